#include <stdio.h>

#include "uavcov.h"

int main(void) {
    UavcovScenario *s = uavcov_scenario_new();
    double pcov = 0.0;
    if (uavcov_scenario_set_height(s, 150.0) != UAVCOV_STATUS_OK ||
        uavcov_coverage_probability(s, &pcov) != UAVCOV_STATUS_OK) {
        fprintf(stderr, "uavcov: %s\n", uavcov_last_error_message());
        uavcov_scenario_free(s);
        return 1;
    }
    printf("%.6f\n", pcov);

    if (uavcov_scenario_set_density(s, -1.0) != UAVCOV_STATUS_INVALID_ARGUMENT) {
        uavcov_scenario_free(s);
        return 2;
    }
    uavcov_scenario_free(s);
    return 0;
}
