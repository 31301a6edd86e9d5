//! C interface to `uavcov`.
//!
//! Scenarios are opaque handles created by `uavcov_scenario_new` or
//! `uavcov_scenario_load` and released with `uavcov_scenario_free`. Every
//! fallible call returns a `UavcovStatus`; on failure the message is kept per
//! thread and can be read with `uavcov_last_error_message`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use uavcov::cli::{load_config, Scenario};
use uavcov::{estimate_coverage, CoverageModel, Error, LinkState};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UavcovStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A parameter is outside its domain.
    InvalidArgument = 2,
    /// The scenario file is missing a key or holds an out-of-range value.
    Config = 3,
    /// A numerical integral did not converge.
    Numerical = 4,
    /// The scenario file could not be read.
    Io = 5,
    /// A path was not valid UTF-8.
    Utf8 = 6,
    /// Internal error; the library caught a panic.
    Panic = 7,
}

/// Serving link state selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UavcovLinkState {
    Los = 0,
    Nlos = 1,
}

/// Opaque scenario handle.
pub struct UavcovScenario {
    inner: Scenario,
}

/// Monte Carlo coverage estimate with its 95% Wilson interval.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct UavcovMcResult {
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub covered: u64,
    pub realizations: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> UavcovStatus {
    match e {
        Error::InvalidParameter { .. } | Error::Usage(_) => UavcovStatus::InvalidArgument,
        Error::Config { .. } => UavcovStatus::Config,
        Error::Quadrature { .. } => UavcovStatus::Numerical,
        Error::Io { .. } | Error::Csv(_) => UavcovStatus::Io,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guard<F>(f: F) -> UavcovStatus
where
    F: FnOnce() -> Result<(), UavcovStatus>,
{
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UavcovStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_last_error("internal panic".into());
            UavcovStatus::Panic
        }
    }
}

fn lib<T>(r: uavcov::Result<T>) -> Result<T, UavcovStatus> {
    r.map_err(|e| {
        set_last_error(e.to_string());
        status_of(&e)
    })
}

fn null(what: &str) -> UavcovStatus {
    set_last_error(format!("{what} is null"));
    UavcovStatus::NullPointer
}

unsafe fn scenario_mut<'a>(s: *mut UavcovScenario) -> Result<&'a mut UavcovScenario, UavcovStatus> {
    unsafe { s.as_mut() }.ok_or_else(|| null("scenario"))
}

unsafe fn scenario_ref<'a>(s: *const UavcovScenario) -> Result<&'a UavcovScenario, UavcovStatus> {
    unsafe { s.as_ref() }.ok_or_else(|| null("scenario"))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), UavcovStatus> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    unsafe { out.write(value) };
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn uavcov_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn uavcov_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// New scenario with the built-in defaults. Never returns null.
#[no_mangle]
pub extern "C" fn uavcov_scenario_new() -> *mut UavcovScenario {
    Box::into_raw(Box::new(UavcovScenario {
        inner: Scenario::default(),
    }))
}

/// Load a scenario file. On success `*out` receives a new handle.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uavcov_scenario_load(path: *const c_char, out: *mut *mut UavcovScenario) -> UavcovStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let path = unsafe { CStr::from_ptr(path) }.to_str().map_err(|_| {
            set_last_error("path is not valid UTF-8".into());
            UavcovStatus::Utf8
        })?;
        let inner = lib(load_config(path))?;
        unsafe { out.write(Box::into_raw(Box::new(UavcovScenario { inner }))) };
        Ok(())
    })
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uavcov_scenario_free(s: *mut UavcovScenario) {
    if !s.is_null() {
        drop(unsafe { Box::from_raw(s) });
    }
}

/// Apply `f` to the network parameters; the change is kept only if the
/// result validates.
unsafe fn update_network<F>(s: *mut UavcovScenario, f: F) -> UavcovStatus
where
    F: FnOnce(uavcov::NetworkConfig) -> uavcov::Result<uavcov::NetworkConfig>,
{
    guard(|| {
        let s = unsafe { scenario_mut(s) }?;
        let n = lib(f(s.inner.network))?;
        lib(n.validate())?;
        s.inner.network = n;
        Ok(())
    })
}

/// # Safety
/// `s` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn uavcov_scenario_set_height(s: *mut UavcovScenario, height_m: f64) -> UavcovStatus {
    unsafe { update_network(s, |n| Ok(n.with_height(height_m))) }
}

/// # Safety
/// `s` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn uavcov_scenario_set_density(s: *mut UavcovScenario, lambda_per_km2: f64) -> UavcovStatus {
    unsafe { update_network(s, |n| Ok(n.with_density_per_km2(lambda_per_km2))) }
}

/// # Safety
/// `s` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn uavcov_scenario_set_threshold_db(s: *mut UavcovScenario, gamma_db: f64) -> UavcovStatus {
    unsafe { update_network(s, |n| n.with_threshold_db(gamma_db)) }
}

/// # Safety
/// `s` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn uavcov_scenario_set_antennas(s: *mut UavcovScenario, n_uav: u32, n_ue: u32) -> UavcovStatus {
    unsafe { update_network(s, |n| Ok(n.with_antennas(n_uav, n_ue))) }
}

/// # Safety
/// `s` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn uavcov_scenario_set_ptx_dbm(s: *mut UavcovScenario, ptx_dbm: f64) -> UavcovStatus {
    unsafe { update_network(s, |n| n.with_ptx_dbm(ptx_dbm)) }
}

/// Absolute and relative tolerance of the analytic integrals.
///
/// # Safety
/// `s` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn uavcov_scenario_set_tolerance(s: *mut UavcovScenario, abs_tol: f64, rel_tol: f64) -> UavcovStatus {
    guard(|| {
        let s = unsafe { scenario_mut(s) }?;
        let q = uavcov::QuadratureSettings {
            abs_tol,
            rel_tol,
            ..s.inner.quadrature
        };
        lib(q.validate())?;
        s.inner.quadrature = q;
        Ok(())
    })
}

fn model(s: &UavcovScenario) -> Result<CoverageModel, UavcovStatus> {
    let sc = &s.inner;
    lib(CoverageModel::new(sc.channel, sc.network, sc.quadrature))
}

/// Analytic coverage probability.
///
/// # Safety
/// `s` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uavcov_coverage_probability(s: *const UavcovScenario, out: *mut f64) -> UavcovStatus {
    guard(|| {
        let s = unsafe { scenario_ref(s) }?;
        let v = lib(model(s)?.coverage_probability())?;
        unsafe { write_out(out, v) }
    })
}

/// Probability that the serving UAV is in `state`.
///
/// # Safety
/// `s` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uavcov_association_probability(
    s: *const UavcovScenario,
    state: UavcovLinkState,
    out: *mut f64,
) -> UavcovStatus {
    guard(|| {
        let s = unsafe { scenario_ref(s) }?;
        let state = match state {
            UavcovLinkState::Los => LinkState::Los,
            UavcovLinkState::Nlos => LinkState::Nlos,
        };
        let v = lib(model(s)?.association_probability(state))?;
        unsafe { write_out(out, v) }
    })
}

/// Monte Carlo estimate over `realizations` independent drops. The result
/// depends only on the scenario, `realizations` and `seed`.
///
/// # Safety
/// `s` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uavcov_mc_estimate(
    s: *const UavcovScenario,
    realizations: u64,
    seed: u64,
    out: *mut UavcovMcResult,
) -> UavcovStatus {
    guard(|| {
        let s = unsafe { scenario_ref(s) }?;
        let e = lib(estimate_coverage(&s.inner.channel, &s.inner.network, realizations, seed))?;
        let r = UavcovMcResult {
            p_hat: e.p_hat,
            ci_low: e.ci_low,
            ci_high: e.ci_high,
            covered: e.covered,
            realizations: e.n,
        };
        unsafe { write_out(out, r) }
    })
}
