//! C ABI for the fractherm solver.
//!
//! Objects are opaque handles created by `ft_*_new` / `ft_run` and released
//! by the matching `ft_*_free`. Every fallible call returns an [`FtStatus`];
//! on failure [`ft_last_error_message`] describes the cause. Panics never
//! cross the boundary: they surface as `FT_STATUS_PANIC`.
//!
//! Array outputs follow one convention: the caller passes a buffer and its
//! length, the call writes the required length to `*needed` and fills the
//! buffer only when it is large enough (otherwise `FT_STATUS_BUFFER_TOO_SMALL`).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fractherm::config::RunConfig;
use fractherm::{
    CoefficientVector, Error, FractionalOrder, InitialState, L1Weights, ProblemConfig, RunRecord,
    Solver, TimeGrid,
};

/// Result codes. Values 0–4 match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FtStatus {
    Ok = 0,
    Failure = 1,
    Config = 2,
    Hypothesis = 3,
    Solver = 4,
    NullPointer = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// A validated problem description.
pub struct FtConfig {
    problem: ProblemConfig,
}

/// A solver positioned at some step of its run.
pub struct FtSolver {
    solver: Solver,
}

/// A finished run: trajectory and diagnostics.
pub struct FtRecord {
    record: RunRecord,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let clean = message.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).unwrap_or_default());
}

fn status_of(e: &Error) -> FtStatus {
    match e {
        Error::Boundary { .. } | Error::Hypothesis(_) => FtStatus::Hypothesis,
        Error::Config(_) | Error::InvalidParameter(_) => FtStatus::Config,
        Error::Internal(_) => FtStatus::Failure,
        _ => FtStatus::Solver,
    }
}

fn fail(e: &Error) -> FtStatus {
    set_last_error(&e.to_string());
    status_of(e)
}

fn guard<F: FnOnce() -> FtStatus>(f: F) -> FtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == FtStatus::Ok {
                set_last_error("");
            }
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            FtStatus::Panic
        }
    }
}

macro_rules! deref {
    ($p:expr) => {
        match unsafe { $p.as_ref() } {
            Some(v) => v,
            None => {
                set_last_error(concat!("null pointer: ", stringify!($p)));
                return FtStatus::NullPointer;
            }
        }
    };
}

macro_rules! deref_mut {
    ($p:expr) => {
        match unsafe { $p.as_mut() } {
            Some(v) => v,
            None => {
                set_last_error(concat!("null pointer: ", stringify!($p)));
                return FtStatus::NullPointer;
            }
        }
    };
}

fn copy_out(values: &[f64], buf: *mut f64, len: usize, needed: *mut usize) -> FtStatus {
    if let Some(n) = unsafe { needed.as_mut() } {
        *n = values.len();
    }
    if len < values.len() {
        set_last_error(&format!(
            "buffer holds {len} values, {} needed",
            values.len()
        ));
        return FtStatus::BufferTooSmall;
    }
    if values.is_empty() {
        return FtStatus::Ok;
    }
    if buf.is_null() {
        set_last_error("null pointer: buf");
        return FtStatus::NullPointer;
    }
    unsafe { ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len()) };
    FtStatus::Ok
}

fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, FtStatus> {
    if p.is_null() {
        set_last_error(&format!("null pointer: {name}"));
        return Err(FtStatus::NullPointer);
    }
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| {
        set_last_error(&format!("{name} is not valid UTF-8"));
        FtStatus::Config
    })
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `ft_*` call on the same thread.
#[no_mangle]
pub extern "C" fn ft_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ft_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parse a `key = value` configuration text (the CLI file format).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_config_from_text(
    text: *const c_char,
    out: *mut *mut FtConfig,
) -> FtStatus {
    guard(|| {
        let out = deref_mut!(out);
        *out = ptr::null_mut();
        let text = match str_arg(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match RunConfig::parse(text).and_then(|c| c.problem()) {
            Ok(problem) => {
                *out = Box::into_raw(Box::new(FtConfig { problem }));
                FtStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Problem with `u0` given by Galerkin coefficients (`N - 1` values) and no
/// source term. `conductivity` is a registered id such as `"shifted_sine"`.
///
/// # Safety
/// `conductivity` must be NUL-terminated; `u0` must point to `u0_len`
/// values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_config_new(
    alpha: f64,
    lambda: f64,
    final_time: f64,
    steps: usize,
    degree: usize,
    conductivity: *const c_char,
    u0: *const f64,
    u0_len: usize,
    out: *mut *mut FtConfig,
) -> FtStatus {
    guard(|| {
        let out = deref_mut!(out);
        *out = ptr::null_mut();
        let id = match str_arg(conductivity, "conductivity") {
            Ok(t) => t,
            Err(s) => return s,
        };
        if u0.is_null() && u0_len > 0 {
            set_last_error("null pointer: u0");
            return FtStatus::NullPointer;
        }
        let coeffs = if u0_len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(u0, u0_len).to_vec()
        };
        let built = (|| {
            let problem = ProblemConfig::new(
                FractionalOrder::new(alpha)?,
                lambda,
                TimeGrid::new(final_time, steps)?,
                degree,
                fractherm::Conductivity::by_name(id)?,
                InitialState::Coefficients(CoefficientVector(coeffs)),
            );
            problem.validate()?;
            Ok::<_, Error>(problem)
        })();
        match built {
            Ok(problem) => {
                *out = Box::into_raw(Box::new(FtConfig { problem }));
                FtStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Override the Picard tolerance and iteration cap.
///
/// # Safety
/// `config` must come from `ft_config_*` and not be freed.
#[no_mangle]
pub unsafe extern "C" fn ft_config_set_picard(
    config: *mut FtConfig,
    tol: f64,
    max_iter: usize,
) -> FtStatus {
    guard(|| {
        let config = deref_mut!(config);
        let old = config.problem.picard;
        config.problem.picard.tol = tol;
        config.problem.picard.max_iter = max_iter;
        if let Err(e) = config.problem.validate() {
            config.problem.picard = old;
            return fail(&e);
        }
        FtStatus::Ok
    })
}

/// Degree `N`; the state vectors have `N - 1` entries.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_config_degree(config: *const FtConfig, out: *mut usize) -> FtStatus {
    guard(|| {
        let config = deref!(config);
        *deref_mut!(out) = config.problem.degree;
        FtStatus::Ok
    })
}

/// # Safety
/// `config` must come from `ft_config_*` (or be null) and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ft_config_free(config: *mut FtConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// L1 weights `b_0..b_K` for order `alpha` on `K` uniform steps of `[0, T]`,
/// and `α₀ = Γ(2-α) δ^α` (`alpha0` may be null).
///
/// # Safety
/// `buf` must hold `len` values; `needed` and `alpha0` may be null.
#[no_mangle]
pub unsafe extern "C" fn ft_l1_weights(
    alpha: f64,
    final_time: f64,
    steps: usize,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
    alpha0: *mut f64,
) -> FtStatus {
    guard(|| {
        let weights = match FractionalOrder::new(alpha)
            .and_then(|a| Ok(L1Weights::compute(a, TimeGrid::new(final_time, steps)?)))
        {
            Ok(w) => w,
            Err(e) => return fail(&e),
        };
        if let Some(a0) = alpha0.as_mut() {
            *a0 = weights.alpha0();
        }
        copy_out(weights.b(), buf, len, needed)
    })
}

/// Build a solver (projects `u0`, factors the system matrix).
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_solver_new(
    config: *const FtConfig,
    out: *mut *mut FtSolver,
) -> FtStatus {
    guard(|| {
        let out = deref_mut!(out);
        *out = ptr::null_mut();
        let config = deref!(config);
        match Solver::new(config.problem.clone()) {
            Ok(solver) => {
                *out = Box::into_raw(Box::new(FtSolver { solver }));
                FtStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Advance one step. Fails with `FT_STATUS_CONFIG` once the run is finished.
///
/// # Safety
/// `solver` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ft_solver_step(solver: *mut FtSolver) -> FtStatus {
    guard(|| {
        let s = deref_mut!(solver);
        if s.solver.is_finished() {
            set_last_error("run already finished");
            return FtStatus::Config;
        }
        match s.solver.step() {
            Ok(_) => FtStatus::Ok,
            Err(e) => fail(&e),
        }
    })
}

/// Index of the latest computed state (0 before the first step).
///
/// # Safety
/// `solver` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_solver_current_step(
    solver: *const FtSolver,
    out: *mut usize,
) -> FtStatus {
    guard(|| {
        let s = deref!(solver);
        *deref_mut!(out) = s.solver.current_step();
        FtStatus::Ok
    })
}

/// Coefficients of the latest state.
///
/// # Safety
/// `solver` must be a live handle; `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn ft_solver_state(
    solver: *const FtSolver,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> FtStatus {
    guard(|| {
        let s = deref!(solver);
        let record = s.solver.record();
        copy_out(record.final_state().as_slice(), buf, len, needed)
    })
}

/// # Safety
/// `solver` must come from `ft_solver_new` (or be null) and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ft_solver_free(solver: *mut FtSolver) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}

/// Run the whole configuration.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_run(config: *const FtConfig, out: *mut *mut FtRecord) -> FtStatus {
    guard(|| {
        let out = deref_mut!(out);
        *out = ptr::null_mut();
        let config = deref!(config);
        match fractherm::run(config.problem.clone()) {
            Ok(record) => {
                *out = Box::into_raw(Box::new(FtRecord { record }));
                FtStatus::Ok
            }
            Err(e) => fail(&e.error),
        }
    })
}

/// Number of stored states, `K + 1`.
///
/// # Safety
/// `record` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_record_len(record: *const FtRecord, out: *mut usize) -> FtStatus {
    guard(|| {
        let r = deref!(record);
        *deref_mut!(out) = r.record.trajectory.len();
        FtStatus::Ok
    })
}

/// `α₀` used by the run.
///
/// # Safety
/// `record` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_record_alpha0(record: *const FtRecord, out: *mut f64) -> FtStatus {
    guard(|| {
        let r = deref!(record);
        *deref_mut!(out) = r.record.alpha0;
        FtStatus::Ok
    })
}

/// `‖u^k‖₀` for every stored state.
///
/// # Safety
/// `record` must be a live handle; `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn ft_record_l2_norms(
    record: *const FtRecord,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> FtStatus {
    guard(|| copy_out(&deref!(record).record.l2_norms, buf, len, needed))
}

/// Time levels `t_k` for every stored state.
///
/// # Safety
/// `record` must be a live handle; `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn ft_record_times(
    record: *const FtRecord,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> FtStatus {
    guard(|| copy_out(&deref!(record).record.times, buf, len, needed))
}

/// Coefficients of state `k`.
///
/// # Safety
/// `record` must be a live handle; `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn ft_record_state(
    record: *const FtRecord,
    k: usize,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> FtStatus {
    guard(|| {
        let r = deref!(record);
        match r.record.trajectory.get(k) {
            Some(state) => copy_out(state.as_slice(), buf, len, needed),
            None => {
                set_last_error(&format!(
                    "state {k} out of range (len {})",
                    r.record.trajectory.len()
                ));
                FtStatus::Config
            }
        }
    })
}

/// Largest Picard iteration count over the run.
///
/// # Safety
/// `record` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_record_max_picard_iters(
    record: *const FtRecord,
    out: *mut usize,
) -> FtStatus {
    guard(|| {
        let r = deref!(record);
        *deref_mut!(out) = r.record.max_picard_iters();
        FtStatus::Ok
    })
}

/// # Safety
/// `record` must come from `ft_run` (or be null) and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ft_record_free(record: *mut FtRecord) {
    if !record.is_null() {
        drop(Box::from_raw(record));
    }
}
