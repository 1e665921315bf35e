//! C ABI for `detflow`.
//!
//! Scenarios and trajectories are opaque heap handles owned by the caller
//! and released with the matching `_free` function. Every fallible call
//! returns a [`DetflowStatus`]; on failure a description is available from
//! [`detflow_last_error`] on the same thread. Matrices cross the boundary as
//! row-major `double` arrays of length `n * n`.
//!
//! Panics never unwind into C: they are caught and reported as
//! [`DetflowStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use detflow::cli;
use detflow::identity::{self, Evaluation};
use detflow::linalg::{self, Axis, Matrix};
use detflow::{
    IdentityError, IntegrationError, LinalgError, ParseError, Sample, Scenario, SolverConfig,
    Trajectory, ValidationError,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetflowStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Validation = 4,
    Dimension = 5,
    NonFinite = 6,
    Singular = 7,
    Integration = 8,
    Identity = 9,
    NotApplicable = 10,
    BufferTooSmall = 11,
    IndexOutOfRange = 12,
    Panic = 99,
}

/// Per-grid-point series stored on a trajectory.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetflowChannel {
    Times = 0,
    DetDirect = 1,
    DetOde = 2,
    CumTrace = 3,
    Eq5 = 4,
    Eq6 = 5,
    Eq2 = 6,
    Eq4 = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetflowAxis {
    Rows = 0,
    Columns = 1,
}

/// Summary of a trajectory. Drift fields are `NaN` when the channel does
/// not apply; `first_noninvertible_time` is `NaN` when never reached.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetflowDriftReport {
    pub grid_points: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub overflow_points: usize,
    pub max_rel_drift_eq5: f64,
    pub max_rel_drift_eq6: f64,
    pub max_rel_drift_detode: f64,
    pub max_rel_drift_eq2: f64,
    pub max_rel_drift_eq4: f64,
    pub worst_drift: f64,
    pub first_noninvertible_time: f64,
}

/// Opaque parsed and validated scenario.
pub struct DetflowScenario {
    inner: Scenario,
}

/// Opaque integrated trajectory with its evaluated identity series.
pub struct DetflowTrajectory {
    traj: Trajectory,
    eval: Evaluation,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(DetflowStatus, String);

impl Failure {
    fn null(what: &str) -> Self {
        Failure(DetflowStatus::NullPointer, format!("{what} is null"))
    }
}

impl From<LinalgError> for Failure {
    fn from(e: LinalgError) -> Self {
        let status = match e {
            LinalgError::NonFinite { .. } => DetflowStatus::NonFinite,
            LinalgError::SingularMatrix => DetflowStatus::Singular,
            LinalgError::EmptyMatrix
            | LinalgError::ElementCount { .. }
            | LinalgError::DimensionMismatch { .. } => DetflowStatus::Dimension,
        };
        Failure(status, e.to_string())
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure(DetflowStatus::Parse, e.to_string())
    }
}

impl From<ValidationError> for Failure {
    fn from(e: ValidationError) -> Self {
        Failure(DetflowStatus::Validation, e.to_string())
    }
}

impl From<IntegrationError> for Failure {
    fn from(e: IntegrationError) -> Self {
        Failure(DetflowStatus::Integration, e.to_string())
    }
}

impl From<IdentityError> for Failure {
    fn from(e: IdentityError) -> Self {
        Failure(DetflowStatus::Identity, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard<F>(f: F) -> DetflowStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DetflowStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_last_error(&format!("panic: {msg}"));
            DetflowStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(DetflowStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn matrix_arg(p: *const f64, n: usize, what: &str) -> Result<Matrix, Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    if n == 0 || n > linalg::MAX_DIM {
        return Err(Failure(
            DetflowStatus::Dimension,
            format!("{what}: n = {n} outside 1..={}", linalg::MAX_DIM),
        ));
    }
    let elems = std::slice::from_raw_parts(p, n * n).to_vec();
    Ok(Matrix::from_row_major(n, elems)?)
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, needed: usize) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(Failure::null("output buffer"));
    }
    if len < needed {
        return Err(Failure(
            DetflowStatus::BufferTooSmall,
            format!("buffer holds {len} values, {needed} needed"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(p, needed))
}

unsafe fn write_out<T>(p: *mut T, value: T) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::null("output pointer"));
    }
    p.write(value);
    Ok(())
}

fn sample_f64(s: Sample) -> f64 {
    s.value().unwrap_or(f64::INFINITY)
}

fn opt_f64(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

/// Message for the most recent failure on this thread, or null if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn detflow_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn detflow_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses and validates a scenario document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn detflow_scenario_from_json(
    json: *const c_char,
    out: *mut *mut DetflowScenario,
) -> DetflowStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let text = str_arg(json, "json")?;
        let inner = cli::parse_scenario_str(text)?;
        inner.validate()?;
        write_out(out, Box::into_raw(Box::new(DetflowScenario { inner })))
    })
}

/// Matrix dimension of a scenario, or 0 for a null handle.
///
/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn detflow_scenario_dim(scenario: *const DetflowScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.inner.n)
}

/// Switches the scenario to fixed-step RK4 with step `h`.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn detflow_scenario_set_rk4(
    scenario: *mut DetflowScenario,
    h: f64,
) -> DetflowStatus {
    set_solver(scenario, SolverConfig::rk4(h))
}

/// Switches the scenario to adaptive RKF45 with tolerance `tol`.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn detflow_scenario_set_rkf45(
    scenario: *mut DetflowScenario,
    tol: f64,
) -> DetflowStatus {
    set_solver(scenario, SolverConfig::rkf45(tol))
}

unsafe fn set_solver(scenario: *mut DetflowScenario, solver: SolverConfig) -> DetflowStatus {
    guard(|| {
        let s = scenario.as_mut().ok_or_else(|| Failure::null("scenario"))?;
        let mut candidate = s.inner.clone();
        candidate.solver = solver;
        candidate.validate()?;
        s.inner = candidate;
        Ok(())
    })
}

/// # Safety
/// `scenario` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn detflow_scenario_free(scenario: *mut DetflowScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Integrates a scenario and evaluates every determinant channel.
///
/// # Safety
/// `scenario` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn detflow_integrate(
    scenario: *const DetflowScenario,
    out: *mut *mut DetflowTrajectory,
) -> DetflowStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let s = &scenario
            .as_ref()
            .ok_or_else(|| Failure::null("scenario"))?
            .inner;
        let traj = detflow::ode::integrate(s)?;
        let eval = identity::evaluate(s, &traj)?;
        write_out(
            out,
            Box::into_raw(Box::new(DetflowTrajectory { traj, eval })),
        )
    })
}

/// Number of grid points, or 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn detflow_trajectory_len(traj: *const DetflowTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.traj.len())
}

/// Matrix dimension, or 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn detflow_trajectory_dim(traj: *const DetflowTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.traj.dim())
}

/// Copies one channel into `buf`, which must hold at least
/// `detflow_trajectory_len` values. Overflowed samples are written as
/// `+inf`. Points past the first non-invertible sample of `EQ6` are `NaN`.
/// Returns `NOT_APPLICABLE` when the channel was not computed for this
/// scenario.
///
/// # Safety
/// `traj` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn detflow_trajectory_channel(
    traj: *const DetflowTrajectory,
    channel: DetflowChannel,
    buf: *mut f64,
    len: usize,
) -> DetflowStatus {
    guard(|| {
        let t = traj.as_ref().ok_or_else(|| Failure::null("trajectory"))?;
        let dst = out_slice(buf, len, t.traj.len())?;
        let not_applicable = || {
            Failure(
                DetflowStatus::NotApplicable,
                format!("{channel:?} not computed"),
            )
        };
        let samples = match channel {
            DetflowChannel::Times => {
                dst.copy_from_slice(&t.traj.times);
                return Ok(());
            }
            DetflowChannel::CumTrace => {
                dst.copy_from_slice(&t.traj.cum_trace);
                return Ok(());
            }
            DetflowChannel::DetDirect => &t.eval.det_direct,
            DetflowChannel::DetOde => &t.eval.det_ode,
            DetflowChannel::Eq5 => &t.eval.eq5,
            DetflowChannel::Eq6 => &t.eval.eq6.as_ref().ok_or_else(not_applicable)?.values,
            DetflowChannel::Eq2 => t.eval.eq2.as_ref().ok_or_else(not_applicable)?,
            DetflowChannel::Eq4 => t.eval.eq4.as_ref().ok_or_else(not_applicable)?,
        };
        dst.fill(f64::NAN);
        for (d, s) in dst.iter_mut().zip(samples) {
            *d = sample_f64(*s);
        }
        Ok(())
    })
}

/// Copies the matrix at grid point `index` (row-major, `n * n` values).
///
/// # Safety
/// `traj` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn detflow_trajectory_matrix(
    traj: *const DetflowTrajectory,
    index: usize,
    buf: *mut f64,
    len: usize,
) -> DetflowStatus {
    guard(|| {
        let t = traj.as_ref().ok_or_else(|| Failure::null("trajectory"))?;
        let m = t.traj.x_samples.get(index).ok_or_else(|| {
            Failure(
                DetflowStatus::IndexOutOfRange,
                format!("index {index} out of range for {} points", t.traj.len()),
            )
        })?;
        out_slice(buf, len, m.as_slice().len())?.copy_from_slice(m.as_slice());
        Ok(())
    })
}

/// # Safety
/// `traj` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn detflow_trajectory_report(
    traj: *const DetflowTrajectory,
    out: *mut DetflowDriftReport,
) -> DetflowStatus {
    guard(|| {
        let t = traj.as_ref().ok_or_else(|| Failure::null("trajectory"))?;
        let r = &t.eval.report;
        let report = DetflowDriftReport {
            grid_points: r.grid_points,
            accepted_steps: t.traj.step_stats.accepted,
            rejected_steps: t.traj.step_stats.rejected,
            overflow_points: r.overflow_points,
            max_rel_drift_eq5: r.max_rel_drift_eq5,
            max_rel_drift_eq6: opt_f64(r.max_rel_drift_eq6),
            max_rel_drift_detode: r.max_rel_drift_detode,
            max_rel_drift_eq2: opt_f64(r.max_rel_drift_eq2),
            max_rel_drift_eq4: opt_f64(r.max_rel_drift_eq4),
            worst_drift: r.worst_drift(),
            first_noninvertible_time: opt_f64(r.first_noninvertible_time),
        };
        write_out(out, report)
    })
}

/// # Safety
/// `traj` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn detflow_trajectory_free(traj: *mut DetflowTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Parses, integrates and renders a scenario as CSV in one call. The
/// returned string must be released with [`detflow_string_free`].
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn detflow_run_csv(
    json: *const c_char,
    out: *mut *mut c_char,
) -> DetflowStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let text = str_arg(json, "json")?;
        let s = cli::parse_scenario_str(text)?;
        s.validate()?;
        let traj = detflow::ode::integrate(&s)?;
        let eval = identity::evaluate(&s, &traj)?;
        let csv = cli::render_csv(&s, &traj, &eval);
        let c = CString::new(csv).expect("CSV has no NUL bytes");
        write_out(out, c.into_raw())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn detflow_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `m` must point to `n * n` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn detflow_det(m: *const f64, n: usize, out: *mut f64) -> DetflowStatus {
    guard(|| {
        let m = matrix_arg(m, n, "m")?;
        write_out(out, linalg::det(&m))
    })
}

/// # Safety
/// `m` must point to `n * n` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn detflow_trace(m: *const f64, n: usize, out: *mut f64) -> DetflowStatus {
    guard(|| {
        let m = matrix_arg(m, n, "m")?;
        write_out(out, linalg::trace(&m))
    })
}

/// Writes the inverse into `out` (`n * n` doubles). Fails with `SINGULAR`
/// when a pivot is negligible relative to the matrix scale.
///
/// # Safety
/// `m` and `out` must each point to `n * n` doubles.
#[no_mangle]
pub unsafe extern "C" fn detflow_inverse(m: *const f64, n: usize, out: *mut f64) -> DetflowStatus {
    guard(|| {
        let m = matrix_arg(m, n, "m")?;
        let inv = linalg::inverse(&m)?;
        out_slice(out, n * n, n * n)?.copy_from_slice(inv.as_slice());
        Ok(())
    })
}

/// Writes the adjugate into `out` (`n * n` doubles). Defined for singular
/// matrices too.
///
/// # Safety
/// `m` and `out` must each point to `n * n` doubles.
#[no_mangle]
pub unsafe extern "C" fn detflow_adjugate(m: *const f64, n: usize, out: *mut f64) -> DetflowStatus {
    guard(|| {
        let m = matrix_arg(m, n, "m")?;
        out_slice(out, n * n, n * n)?.copy_from_slice(linalg::adjugate(&m).as_slice());
        Ok(())
    })
}

/// Sum over `k` of `det(X)` with row (or column) `k` replaced by that of `F`.
///
/// # Safety
/// `x` and `f` must each point to `n * n` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn detflow_replaced_det_sum(
    x: *const f64,
    f: *const f64,
    n: usize,
    axis: DetflowAxis,
    out: *mut f64,
) -> DetflowStatus {
    guard(|| {
        let x = matrix_arg(x, n, "x")?;
        let f = matrix_arg(f, n, "f")?;
        let axis = match axis {
            DetflowAxis::Rows => Axis::Rows,
            DetflowAxis::Columns => Axis::Columns,
        };
        write_out(out, linalg::replaced_det_sum(&x, &f, axis)?)
    })
}
