//! C interface to catk.
//!
//! Scenarios and reports are opaque handles. Fallible calls return a
//! [`CatkStatus`]; on failure [`catk_last_error`] describes what went wrong.
//! Strings handed out by the library are owned by the caller and released
//! with [`catk_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use catk::error::CatkError;
use catk::scenario::{examples, run, Report, Scenario};

/// Result of a fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CatkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Scenario = 4,
    Curvature = 5,
    Geometry = 6,
    Complex = 7,
    Region = 8,
    Convergence = 9,
    Homology = 10,
    Io = 11,
    /// A Rust panic was caught at the boundary.
    Panic = 12,
}

impl From<&CatkError> for CatkStatus {
    fn from(e: &CatkError) -> Self {
        match e.kind() {
            "curvature" => CatkStatus::Curvature,
            "geometry" => CatkStatus::Geometry,
            "complex" => CatkStatus::Complex,
            "region" => CatkStatus::Region,
            "convergence" => CatkStatus::Convergence,
            "homology" => CatkStatus::Homology,
            "parse" => CatkStatus::Parse,
            "io" => CatkStatus::Io,
            _ => CatkStatus::Scenario,
        }
    }
}

/// A parsed, validated scenario.
pub struct CatkScenario(Scenario);

/// The outcome of running a scenario.
pub struct CatkReport(Report);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(CatkStatus, String);

impl From<CatkError> for Failure {
    fn from(e: CatkError) -> Self {
        Failure(CatkStatus::from(&e), e.to_string())
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CatkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CatkStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            CatkStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(CatkStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(CatkStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    let c = CString::new(s).map_err(|e| Failure(CatkStatus::InvalidUtf8, e.to_string()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn catk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn catk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parse and validate a scenario document.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catk_scenario_from_json(json: *const c_char, out: *mut *mut CatkScenario) -> CatkStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        put(out, CatkScenario(Scenario::from_json(text)?))
    })
}

/// Built-in scenario by name.
///
/// # Safety
/// `name` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catk_scenario_example(name: *const c_char, out: *mut *mut CatkScenario) -> CatkStatus {
    guard(|| {
        let name = read_str(name, "name")?;
        let sc = examples::by_name(name).ok_or_else(|| {
            Failure(CatkStatus::Scenario, format!("unknown example {name}; known: {}", examples::NAMES.join(", ")))
        })?;
        put(out, CatkScenario(sc))
    })
}

/// Override the run seed.
///
/// # Safety
/// `sc` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn catk_scenario_set_seed(sc: *mut CatkScenario, seed: u64) -> CatkStatus {
    guard(|| {
        let sc = sc.as_mut().ok_or_else(|| null("scenario"))?;
        sc.0.plan.seed = seed;
        Ok(())
    })
}

/// Override the mesh size; rejected unless positive and finite.
///
/// # Safety
/// `sc` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn catk_scenario_set_h(sc: *mut CatkScenario, h: f64) -> CatkStatus {
    guard(|| {
        let sc = sc.as_mut().ok_or_else(|| null("scenario"))?;
        if !(h.is_finite() && h > 0.0) {
            return Err(Failure(CatkStatus::Scenario, format!("mesh size h must be positive, got {h}")));
        }
        sc.0.h = h;
        Ok(())
    })
}

/// Hex SHA-256 of the canonical scenario serialization.
///
/// # Safety
/// `sc` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catk_scenario_hash(sc: *const CatkScenario, out: *mut *mut c_char) -> CatkStatus {
    guard(|| write_string(out, get(sc, "scenario")?.0.hash()))
}

/// Pretty-printed scenario document.
///
/// # Safety
/// `sc` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catk_scenario_to_json(sc: *const CatkScenario, out: *mut *mut c_char) -> CatkStatus {
    guard(|| write_string(out, get(sc, "scenario")?.0.to_json()))
}

/// # Safety
/// `sc` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn catk_scenario_free(sc: *mut CatkScenario) {
    if !sc.is_null() {
        drop(Box::from_raw(sc));
    }
}

/// Run a scenario. Violations are not errors; they are recorded in the report.
///
/// # Safety
/// `sc` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catk_run(sc: *const CatkScenario, out: *mut *mut CatkReport) -> CatkStatus {
    guard(|| {
        let report = run(&get(sc, "scenario")?.0)?;
        put(out, CatkReport(report))
    })
}

/// Full report (body and metadata) as JSON.
///
/// # Safety
/// `r` must be a live report handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catk_report_json(r: *const CatkReport, out: *mut *mut c_char) -> CatkStatus {
    guard(|| write_string(out, get(r, "report")?.0.to_json()))
}

/// Report body as JSON; identical across runs of the same scenario.
///
/// # Safety
/// `r` must be a live report handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catk_report_body_json(r: *const CatkReport, out: *mut *mut c_char) -> CatkStatus {
    guard(|| write_string(out, get(r, "report")?.0.body_json()))
}

/// 0 when the outcome matches the scenario's expectation, 2 when it does not, -1 for a null handle.
///
/// # Safety
/// `r` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn catk_report_exit_code(r: *const CatkReport) -> i32 {
    r.as_ref().map_or(-1, |r| r.0.exit_code())
}

/// Number of recorded failures (violations and failed checks).
///
/// # Safety
/// `r` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn catk_report_failure_count(r: *const CatkReport) -> usize {
    r.as_ref().map_or(0, |r| r.0.body.failures.len())
}

/// # Safety
/// `r` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn catk_report_free(r: *mut CatkReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn catk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_error_kind_has_its_own_status() {
        let cases = [
            (CatkError::InvalidCurvature(1.0), CatkStatus::Curvature),
            (CatkError::InvalidGluing(String::new()), CatkStatus::Geometry),
            (CatkError::Location(String::new()), CatkStatus::Complex),
            (CatkError::EmptyRegion, CatkStatus::Region),
            (CatkError::Homology(String::new()), CatkStatus::Homology),
            (CatkError::InvalidScenario(String::new()), CatkStatus::Scenario),
            (CatkError::Io(std::io::Error::other("x")), CatkStatus::Io),
        ];
        for (e, s) in cases {
            assert_eq!(CatkStatus::from(&e), s, "{e}");
        }
    }

    #[test]
    fn panics_become_a_status() {
        assert_eq!(guard(|| panic!("boom")), CatkStatus::Panic);
        let msg = unsafe { CStr::from_ptr(catk_last_error()) }.to_str().unwrap().to_owned();
        assert!(msg.contains("boom"));
    }
}
