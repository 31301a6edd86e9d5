#ifndef UAVCOV_H
#define UAVCOV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible function.
typedef enum UavcovStatus {
  UAVCOV_STATUS_OK = 0,
  // A required pointer argument was null.
  UAVCOV_STATUS_NULL_POINTER = 1,
  // A parameter is outside its domain.
  UAVCOV_STATUS_INVALID_ARGUMENT = 2,
  // The scenario file is missing a key or holds an out-of-range value.
  UAVCOV_STATUS_CONFIG = 3,
  // A numerical integral did not converge.
  UAVCOV_STATUS_NUMERICAL = 4,
  // The scenario file could not be read.
  UAVCOV_STATUS_IO = 5,
  // A path was not valid UTF-8.
  UAVCOV_STATUS_UTF8 = 6,
  // Internal error; the library caught a panic.
  UAVCOV_STATUS_PANIC = 7,
} UavcovStatus;

// Serving link state selector.
typedef enum UavcovLinkState {
  UAVCOV_LINK_STATE_LOS = 0,
  UAVCOV_LINK_STATE_NLOS = 1,
} UavcovLinkState;

// Opaque scenario handle.
typedef struct UavcovScenario UavcovScenario;

// Monte Carlo coverage estimate with its 95% Wilson interval.
typedef struct UavcovMcResult {
  double p_hat;
  double ci_low;
  double ci_high;
  uint64_t covered;
  uint64_t realizations;
} UavcovMcResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *uavcov_version(void);

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next library call on the same thread.
const char *uavcov_last_error_message(void);

// New scenario with the built-in defaults. Never returns null.
struct UavcovScenario *uavcov_scenario_new(void);

// Load a scenario file. On success `*out` receives a new handle.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum UavcovStatus uavcov_scenario_load(const char *path, struct UavcovScenario **out);

// Release a handle. Null is ignored.
//
// # Safety
// `s` must come from this library and must not be used afterwards.
void uavcov_scenario_free(struct UavcovScenario *s);

// # Safety
// `s` must be a valid handle.
enum UavcovStatus uavcov_scenario_set_height(struct UavcovScenario *s, double height_m);

// # Safety
// `s` must be a valid handle.
enum UavcovStatus uavcov_scenario_set_density(struct UavcovScenario *s, double lambda_per_km2);

// # Safety
// `s` must be a valid handle.
enum UavcovStatus uavcov_scenario_set_threshold_db(struct UavcovScenario *s, double gamma_db);

// # Safety
// `s` must be a valid handle.
enum UavcovStatus uavcov_scenario_set_antennas(struct UavcovScenario *s,
                                               uint32_t n_uav,
                                               uint32_t n_ue);

// # Safety
// `s` must be a valid handle.
enum UavcovStatus uavcov_scenario_set_ptx_dbm(struct UavcovScenario *s, double ptx_dbm);

// Absolute and relative tolerance of the analytic integrals.
//
// # Safety
// `s` must be a valid handle.
enum UavcovStatus uavcov_scenario_set_tolerance(struct UavcovScenario *s,
                                                double abs_tol,
                                                double rel_tol);

// Analytic coverage probability.
//
// # Safety
// `s` must be a valid handle and `out` a valid pointer.
enum UavcovStatus uavcov_coverage_probability(const struct UavcovScenario *s, double *out);

// Probability that the serving UAV is in `state`.
//
// # Safety
// `s` must be a valid handle and `out` a valid pointer.
enum UavcovStatus uavcov_association_probability(const struct UavcovScenario *s,
                                                 enum UavcovLinkState state,
                                                 double *out);

// Monte Carlo estimate over `realizations` independent drops. The result
// depends only on the scenario, `realizations` and `seed`.
//
// # Safety
// `s` must be a valid handle and `out` a valid pointer.
enum UavcovStatus uavcov_mc_estimate(const struct UavcovScenario *s,
                                     uint64_t realizations,
                                     uint64_t seed,
                                     struct UavcovMcResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UAVCOV_H */
