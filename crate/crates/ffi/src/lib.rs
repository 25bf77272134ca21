//! C interface to `region_ode`.
//!
//! Every fallible entry point returns a [`RodeStatus`]. On failure the message
//! is kept per thread and read with [`rode_last_error`]. Handles are opaque and
//! owned by the caller until passed to the matching `_free` function. Strings
//! returned through `char **` are released with [`rode_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use region_ode::error::Error;
use region_ode::output::write_run;
use region_ode::pipeline::{self, CheckOutcome, RunOutput, Which};
use region_ode::scenario::ScenarioConfig;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RodeStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad UTF-8, out-of-range index or mismatched buffer length.
    InvalidArgument = 2,
    Dimension = 3,
    NonFiniteInput = 4,
    Evaluation = 5,
    Usage = 6,
    Construction = 7,
    InconsistentPair = 8,
    EventLocalization = 9,
    NonFiniteState = 10,
    Scenario = 11,
    Io = 12,
    /// A Rust panic was caught at the boundary.
    Panic = 13,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RodeChecker {
    Region = 0,
    Transversality = 1,
    Classify = 2,
    Lower = 3,
    Upper = 4,
}

impl From<RodeChecker> for Which {
    fn from(c: RodeChecker) -> Self {
        match c {
            RodeChecker::Region => Which::Region,
            RodeChecker::Transversality => Which::Transversality,
            RodeChecker::Classify => Which::Classify,
            RodeChecker::Lower => Which::Lower,
            RodeChecker::Upper => Which::Upper,
        }
    }
}

/// Parsed scenario.
pub struct RodeScenario(ScenarioConfig);

/// Result of a full run: report and trajectory.
pub struct RodeRun(RunOutput);

/// Result of a single checker.
pub struct RodeCheck(CheckOutcome);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure {
    status: RodeStatus,
    message: String,
}

impl Failure {
    fn new(status: RodeStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Dimension { .. } => RodeStatus::Dimension,
            Error::NonFiniteInput { .. } => RodeStatus::NonFiniteInput,
            Error::Evaluation { .. } => RodeStatus::Evaluation,
            Error::Usage(_) => RodeStatus::Usage,
            Error::Construction { .. } => RodeStatus::Construction,
            Error::InconsistentPair { .. } => RodeStatus::InconsistentPair,
            Error::EventLocalization { .. } => RodeStatus::EventLocalization,
            Error::NonFiniteState { .. } => RodeStatus::NonFiniteState,
            Error::Scenario(_) => RodeStatus::Scenario,
            Error::Io { .. } => RodeStatus::Io,
        };
        Failure::new(status, e.to_string())
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> RodeStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RodeStatus::Ok,
        Ok(Err(fail)) => {
            set_error(fail.message);
            fail.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            RodeStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure::new(RodeStatus::NullPointer, format!("{name} is null")))
}

unsafe fn deref_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure::new(RodeStatus::NullPointer, format!("{name} is null")))
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(
            RodeStatus::NullPointer,
            format!("{name} is null"),
        ));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(RodeStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

unsafe fn put<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    *deref_mut(out, name)? = value;
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s)
        .map_err(|_| Failure::new(RodeStatus::InvalidArgument, "string contains NUL"))?;
    put(out, c.into_raw(), "out")
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn rode_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn rode_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn rode_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Load a scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rode_scenario_load(
    path: *const c_char,
    out: *mut *mut RodeScenario,
) -> RodeStatus {
    guard(|| {
        let path = text(path, "path")?;
        let cfg = ScenarioConfig::load(Path::new(path))?;
        put(out, Box::into_raw(Box::new(RodeScenario(cfg))), "out")
    })
}

/// Parse scenario text.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rode_scenario_parse(
    toml: *const c_char,
    out: *mut *mut RodeScenario,
) -> RodeStatus {
    guard(|| {
        let cfg = ScenarioConfig::from_toml(text(toml, "toml")?)?;
        put(out, Box::into_raw(Box::new(RodeScenario(cfg))), "out")
    })
}

/// Set one numeric parameter (`alpha`, `step`, `seed`, ...). The scenario is
/// left unchanged on failure.
///
/// # Safety
/// `scenario` must be a live handle; `name` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rode_scenario_set_param(
    scenario: *mut RodeScenario,
    name: *const c_char,
    value: f64,
) -> RodeStatus {
    guard(|| {
        let s = deref_mut(scenario, "scenario")?;
        let mut cfg = s.0.clone();
        cfg.set_param(text(name, "name")?, value)?;
        s.0 = cfg;
        Ok(())
    })
}

/// Canonical scenario text; free with [`rode_string_free`].
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rode_scenario_canonical(
    scenario: *const RodeScenario,
    out: *mut *mut c_char,
) -> RodeStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        put_string(out, s.0.to_canonical()?)
    })
}

/// # Safety
/// `scenario` must be null or a live handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn rode_scenario_free(scenario: *mut RodeScenario) {
    if !scenario.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(scenario))));
    }
}

/// Region check, transversality, integration and certificates. A run whose
/// certificate fails still returns `RODE_STATUS_OK`; query
/// [`rode_run_passed`].
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rode_run(
    scenario: *const RodeScenario,
    out: *mut *mut RodeRun,
) -> RodeStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        let run = pipeline::run(&s.0)?;
        put(out, Box::into_raw(Box::new(RodeRun(run))), "out")
    })
}

/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rode_run_passed(run: *const RodeRun, out: *mut bool) -> RodeStatus {
    guard(|| put(out, deref(run, "run")?.0.report.passed, "out"))
}

/// Number of stored grid points.
///
/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rode_run_len(run: *const RodeRun, out: *mut usize) -> RodeStatus {
    guard(|| put(out, deref(run, "run")?.0.trajectory.len(), "out"))
}

/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rode_run_dim(run: *const RodeRun, out: *mut usize) -> RodeStatus {
    guard(|| put(out, deref(run, "run")?.0.trajectory.dim(), "out"))
}

/// Copy grid point `index` into `t` and `x[0..x_len]`; `x_len` must equal
/// the dimension.
///
/// # Safety
/// `run` must be a live handle, `t` writable and `x` valid for `x_len` writes.
#[no_mangle]
pub unsafe extern "C" fn rode_run_state(
    run: *const RodeRun,
    index: usize,
    t: *mut f64,
    x: *mut f64,
    x_len: usize,
) -> RodeStatus {
    guard(|| {
        let traj = &deref(run, "run")?.0.trajectory;
        if index >= traj.len() {
            return Err(Failure::new(
                RodeStatus::InvalidArgument,
                format!("index {index} out of range for {} points", traj.len()),
            ));
        }
        if x_len != traj.dim() {
            return Err(Failure::new(
                RodeStatus::InvalidArgument,
                format!(
                    "buffer length {x_len} differs from dimension {}",
                    traj.dim()
                ),
            ));
        }
        if x.is_null() {
            return Err(Failure::new(RodeStatus::NullPointer, "x is null"));
        }
        put(t, traj.times[index], "t")?;
        std::slice::from_raw_parts_mut(x, x_len).copy_from_slice(traj.states[index].as_slice());
        Ok(())
    })
}

/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rode_run_event_count(run: *const RodeRun, out: *mut usize) -> RodeStatus {
    guard(|| put(out, deref(run, "run")?.0.trajectory.events.len(), "out"))
}

/// Run report as TOML; free with [`rode_string_free`].
///
/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rode_run_report(run: *const RodeRun, out: *mut *mut c_char) -> RodeStatus {
    guard(|| put_string(out, deref(run, "run")?.0.report.to_text()?))
}

/// Write `trajectory.csv`, `events.toml` and `report.toml` under `dir`.
///
/// # Safety
/// `run` must be a live handle; `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rode_run_write(run: *const RodeRun, dir: *const c_char) -> RodeStatus {
    guard(|| {
        let run = deref(run, "run")?;
        write_run(Path::new(text(dir, "dir")?), &run.0)?;
        Ok(())
    })
}

/// # Safety
/// `run` must be null or a live handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn rode_run_free(run: *mut RodeRun) {
    if !run.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(run))));
    }
}

/// Run one checker.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rode_check(
    scenario: *const RodeScenario,
    which: RodeChecker,
    out: *mut *mut RodeCheck,
) -> RodeStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        let outcome = pipeline::check(&s.0, which.into())?;
        put(out, Box::into_raw(Box::new(RodeCheck(outcome))), "out")
    })
}

/// # Safety
/// `check` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rode_check_passed(check: *const RodeCheck, out: *mut bool) -> RodeStatus {
    guard(|| put(out, deref(check, "check")?.0.passed, "out"))
}

/// Worst sampled value of the checked condition.
///
/// # Safety
/// `check` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rode_check_worst(check: *const RodeCheck, out: *mut f64) -> RodeStatus {
    guard(|| put(out, deref(check, "check")?.0.report.worst_value, "out"))
}

/// Checker report as TOML; free with [`rode_string_free`].
///
/// # Safety
/// `check` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rode_check_report(
    check: *const RodeCheck,
    out: *mut *mut c_char,
) -> RodeStatus {
    guard(|| put_string(out, deref(check, "check")?.0.to_text()?))
}

/// # Safety
/// `check` must be null or a live handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn rode_check_free(check: *mut RodeCheck) {
    if !check.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(check))));
    }
}
