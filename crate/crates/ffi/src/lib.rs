//! C interface to the `shcgm` solvers.
//!
//! Every fallible function returns a [`ShcgmStatus`]. On failure the message
//! is kept per thread and can be read with [`shcgm_last_error`]. Handles are
//! opaque; each handle from `shcgm_config_parse` or `shcgm_run` is released with
//! its matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use shcgm::harness::{build_problem, run_command, RunConfig};
use shcgm::solvers::{Solver, TraceRecord};
use shcgm::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShcgmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Config = 4,
    InvalidParameter = 5,
    DimensionMismatch = 6,
    NotConverged = 7,
    Contract = 8,
    Io = 9,
    OutOfRange = 10,
    Panic = 11,
}

/// A parsed run configuration.
pub struct ShcgmConfig {
    inner: RunConfig,
}

/// The trace and final iterate of a finished run.
pub struct ShcgmRun {
    trace: Vec<TraceRecord>,
    solution: Vec<f64>,
}

/// One trace row. Columns a problem does not report hold NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ShcgmRecord {
    pub k: u64,
    pub objective: f64,
    pub residual: f64,
    pub feasibility: f64,
    pub estimator_mse: f64,
    pub beta_k: f64,
    pub wall_time_ms: f64,
}

impl From<&TraceRecord> for ShcgmRecord {
    fn from(r: &TraceRecord) -> Self {
        Self {
            k: r.k as u64,
            objective: r.objective,
            residual: r.residual.unwrap_or(f64::NAN),
            feasibility: r.feasibility,
            estimator_mse: r.estimator_mse.unwrap_or(f64::NAN),
            beta_k: r.beta_k,
            wall_time_ms: r.wall_time_ms,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ShcgmStatus {
    match e {
        Error::DimensionMismatch { .. } => ShcgmStatus::DimensionMismatch,
        Error::InvalidParameter(_) => ShcgmStatus::InvalidParameter,
        Error::Contract(_) => ShcgmStatus::Contract,
        Error::NotConverged { .. } => ShcgmStatus::NotConverged,
        Error::Iteration { source, .. } => status_of(source),
        Error::Parse { .. } => ShcgmStatus::Parse,
        Error::Config(_) => ShcgmStatus::Config,
        Error::Io(_) => ShcgmStatus::Io,
    }
}

struct Failure(ShcgmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(ShcgmStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, turning errors and panics into a status plus a stored message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ShcgmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            ShcgmStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            ShcgmStatus::Panic
        }
    }
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(ShcgmStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn config_ref<'a>(config: *const ShcgmConfig) -> Result<&'a ShcgmConfig, Failure> {
    config.as_ref().ok_or_else(|| null("config"))
}

unsafe fn config_mut<'a>(config: *mut ShcgmConfig) -> Result<&'a mut ShcgmConfig, Failure> {
    config.as_mut().ok_or_else(|| null("config"))
}

unsafe fn run_ref<'a>(run: *const ShcgmRun) -> Result<&'a ShcgmRun, Failure> {
    run.as_ref().ok_or_else(|| null("run"))
}

/// Message of the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn shcgm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn shcgm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses `key = value` config text into a new handle written to `out`.
///
/// # Safety
/// `text` must be NUL-terminated and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn shcgm_config_parse(
    text: *const c_char,
    out: *mut *mut ShcgmConfig,
) -> ShcgmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let cfg = RunConfig::parse(c_str(text, "text")?)?;
        cfg.validate()?;
        *out = Box::into_raw(Box::new(ShcgmConfig { inner: cfg }));
        Ok(())
    })
}

/// # Safety
/// `config` must come from [`shcgm_config_parse`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn shcgm_config_free(config: *mut ShcgmConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn shcgm_config_set_iterations(
    config: *mut ShcgmConfig,
    iterations: u64,
) -> ShcgmStatus {
    guard(|| {
        let c = config_mut(config)?;
        c.inner.iterations = usize::try_from(iterations)
            .map_err(|_| Failure(ShcgmStatus::OutOfRange, format!("{iterations} iterations")))?;
        Ok(())
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn shcgm_config_set_seed(config: *mut ShcgmConfig, seed: u64) -> ShcgmStatus {
    guard(|| {
        config_mut(config)?.inner.seed = seed;
        Ok(())
    })
}

/// Writes the canonical text of `config` into `buf` (capacity `len`,
/// NUL-terminated) and the full length without the NUL into `needed`.
/// A short buffer yields `OutOfRange` and leaves `buf` untouched.
///
/// # Safety
/// `buf` must hold `len` bytes (it may be NULL when `len` is 0); `needed`
/// must be writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn shcgm_config_serialize(
    config: *const ShcgmConfig,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> ShcgmStatus {
    guard(|| {
        let s = config_ref(config)?.inner.serialize();
        if !needed.is_null() {
            *needed = s.len();
        }
        if len < s.len() + 1 || buf.is_null() {
            return Err(Failure(
                ShcgmStatus::OutOfRange,
                format!("buffer of {len} bytes, need {}", s.len() + 1),
            ));
        }
        ptr::copy_nonoverlapping(s.as_ptr(), buf.cast::<u8>(), s.len());
        *buf.add(s.len()) = 0;
        Ok(())
    })
}

/// Runs `config` in memory and stores the trace and final iterate in a new
/// handle written to `out`. No file is written.
///
/// # Safety
/// `config` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn shcgm_run(config: *const ShcgmConfig, out: *mut *mut ShcgmRun) -> ShcgmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let cfg = &config_ref(config)?.inner;
        cfg.validate()?;
        let built = build_problem(cfg)?;
        let result = Solver::new(&built.spec, cfg.solver_options()?)?.run()?;
        *out = Box::into_raw(Box::new(ShcgmRun {
            trace: result.trace,
            solution: result.state.x,
        }));
        Ok(())
    })
}

/// Runs `config` like the command line does, streaming the CSV trace to the
/// config's `output` path (or the default name), and writes the number of
/// rows to `rows` when it is not NULL.
///
/// # Safety
/// `config` must be a live handle; `rows` must be writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn shcgm_run_to_csv(config: *const ShcgmConfig, rows: *mut usize) -> ShcgmStatus {
    guard(|| {
        let summary = run_command(&config_ref(config)?.inner)?;
        if !rows.is_null() {
            *rows = summary.rows;
        }
        Ok(())
    })
}

/// # Safety
/// `run` must come from [`shcgm_run`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn shcgm_run_free(run: *mut ShcgmRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of trace records, 0 for NULL.
///
/// # Safety
/// `run` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn shcgm_run_trace_len(run: *const ShcgmRun) -> usize {
    run.as_ref().map_or(0, |r| r.trace.len())
}

/// # Safety
/// `run` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn shcgm_run_record(
    run: *const ShcgmRun,
    index: usize,
    out: *mut ShcgmRecord,
) -> ShcgmStatus {
    guard(|| {
        let r = run_ref(run)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let rec = r.trace.get(index).ok_or_else(|| {
            Failure(
                ShcgmStatus::OutOfRange,
                format!("record {index} of {}", r.trace.len()),
            )
        })?;
        *out = rec.into();
        Ok(())
    })
}

/// Length of the final iterate, 0 for NULL.
///
/// # Safety
/// `run` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn shcgm_run_solution_len(run: *const ShcgmRun) -> usize {
    run.as_ref().map_or(0, |r| r.solution.len())
}

/// Copies the final iterate into `buf`, which must hold at least
/// [`shcgm_run_solution_len`] values.
///
/// # Safety
/// `run` must be a live handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn shcgm_run_solution(run: *const ShcgmRun, buf: *mut f64, len: usize) -> ShcgmStatus {
    guard(|| {
        let r = run_ref(run)?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len < r.solution.len() {
            return Err(Failure(
                ShcgmStatus::OutOfRange,
                format!("buffer of {len} values, need {}", r.solution.len()),
            ));
        }
        ptr::copy_nonoverlapping(r.solution.as_ptr(), buf, r.solution.len());
        Ok(())
    })
}
