//! C ABI over the `vortical` library.
//!
//! Objects cross the boundary as opaque handles (`VorticalParams`,
//! `VorticalTrajectory`) created and freed by this library; plain data
//! crosses as `#[repr(C)]` structs. Every fallible call returns a
//! `VorticalStatus`; on failure the message is kept per thread and read with
//! `vortical_last_error_message`. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use vortical::emden::{self, IntegrationConfig, TerminalEvent, Trajectory};
use vortical::presets;
use vortical::regimes::{self, Branch, RegimeKind};
use vortical::solution::{eval_flow, QueryPoint, ScaleState, SolutionParams};
use vortical::Error;

/// Result of every fallible call. `Ok` is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VorticalStatus {
    Ok = 0,
    NullPointer,
    InvalidParams,
    InvalidArgument,
    UnknownPreset,
    ZeroRotation,
    CollapsedState,
    OutOfRange,
    NoBracket,
    DegenerateOrbit,
    StepFailure,
    Other,
    Panic,
}

impl VorticalStatus {
    fn of(e: &Error) -> Self {
        match e {
            Error::InvalidParams(_) => VorticalStatus::InvalidParams,
            Error::InvalidConfig(_)
            | Error::InvalidGrid(_)
            | Error::NonPositiveTime { .. }
            | Error::Usage(_) => VorticalStatus::InvalidArgument,
            Error::UnknownPreset(_) => VorticalStatus::UnknownPreset,
            Error::ZeroRotation => VorticalStatus::ZeroRotation,
            Error::CollapsedState { .. } | Error::CollapsedAtOrBefore { .. } => {
                VorticalStatus::CollapsedState
            }
            Error::TrajectoryTooShort { .. } => VorticalStatus::OutOfRange,
            Error::NoBracket(_) => VorticalStatus::NoBracket,
            Error::DegenerateOrbit { .. } => VorticalStatus::DegenerateOrbit,
            Error::StepFailure { .. } => VorticalStatus::StepFailure,
            _ => VorticalStatus::Other,
        }
    }
}

/// Validated parameter record.
pub struct VorticalParams(SolutionParams);

/// Integrated scale trajectory with dense output.
pub struct VorticalTrajectory(Trajectory);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VorticalParamValues {
    pub gamma: f64,
    /// Pressure constant `K`.
    pub k: f64,
    pub xi: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub a0: f64,
    pub a1: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VorticalScaleState {
    pub t: f64,
    pub a: f64,
    pub adot: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VorticalFlowSample {
    pub rho: f64,
    pub u1: f64,
    pub u2: f64,
    pub p: f64,
}

/// Solver settings; `max_step` is unbounded when infinite.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VorticalIntegrationConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub collapse_epsilon: f64,
    /// Time at which `a0` and `a1` hold.
    pub t0: f64,
    pub t_end: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VorticalTrajectorySummary {
    pub t_start: f64,
    pub t_end: f64,
    pub nodes: usize,
    /// Max relative energy drift over the nodes.
    pub energy_drift: f64,
    pub collapsed: bool,
    /// Collapse time and bracket width; NaN without collapse.
    pub t_star: f64,
    pub error_bar: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VorticalBranch {
    One,
    TwoAI,
    TwoAII,
    TwoBBlowup,
    TwoBGlobal,
    ThreeA,
    ThreeBIGlobal,
    ThreeBIBlowup,
    ThreeBIIGlobal,
    ThreeBIIBlowup,
}

impl From<Branch> for VorticalBranch {
    fn from(b: Branch) -> Self {
        match b {
            Branch::One => VorticalBranch::One,
            Branch::TwoAI => VorticalBranch::TwoAI,
            Branch::TwoAII => VorticalBranch::TwoAII,
            Branch::TwoBBlowup => VorticalBranch::TwoBBlowup,
            Branch::TwoBGlobal => VorticalBranch::TwoBGlobal,
            Branch::ThreeA => VorticalBranch::ThreeA,
            Branch::ThreeBIGlobal => VorticalBranch::ThreeBIGlobal,
            Branch::ThreeBIBlowup => VorticalBranch::ThreeBIBlowup,
            Branch::ThreeBIIGlobal => VorticalBranch::ThreeBIIGlobal,
            Branch::ThreeBIIBlowup => VorticalBranch::ThreeBIIBlowup,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VorticalRegimeKind {
    Global,
    TimePeriodic,
    Steady,
    FiniteTimeBlowup,
}

/// Fields that do not apply to `kind` are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VorticalRegime {
    pub branch: VorticalBranch,
    pub kind: VorticalRegimeKind,
    pub period: f64,
    pub a_eq: f64,
    /// Blowup time and its bracket, measured from the initial data.
    pub t_star: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    /// Initial energy `E(0)`.
    pub energy: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VorticalPeriod {
    pub period: f64,
    pub error_estimate: f64,
    pub a_min: f64,
    pub a_max: f64,
    /// The lower turning point lies below the resolvable scale range and
    /// `a_min` is the cutoff used instead.
    pub truncated: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    // interior NULs would truncate the C string; drop them
    let msg = CString::new(msg.replace('\0', "")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

/// Run `f`, translating errors and panics into a status and a stored message.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> VorticalStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VorticalStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            VorticalStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(format!("{}: {e}", e.kind()));
            VorticalStatus::of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            VorticalStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or valid for reads of `T`.
unsafe fn read<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

/// # Safety
/// `p` is null or valid for writes of `T`.
unsafe fn write<T>(p: *mut T, what: &'static str, value: T) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    p.write(value);
    Ok(())
}

fn values_of(p: &SolutionParams) -> VorticalParamValues {
    VorticalParamValues {
        gamma: p.gamma(),
        k: p.k(),
        xi: p.xi(),
        lambda: p.lambda(),
        alpha: p.alpha(),
        a0: p.a0(),
        a1: p.a1(),
    }
}

fn params_of(v: &VorticalParamValues) -> vortical::Result<SolutionParams> {
    SolutionParams::new(v.gamma, v.k, v.xi, v.lambda, v.alpha, v.a0, v.a1)
}

fn new_handle(p: SolutionParams) -> *mut VorticalParams {
    Box::into_raw(Box::new(VorticalParams(p)))
}

/// Validate `values` and return a new handle in `*out`.
///
/// # Safety
/// `values` and `out` are null or valid. Free the handle with
/// `vortical_params_free`.
#[no_mangle]
pub unsafe extern "C" fn vortical_params_new(
    values: *const VorticalParamValues,
    out: *mut *mut VorticalParams,
) -> VorticalStatus {
    guard(|| {
        let p = params_of(read(values, "values")?)?;
        write(out, "out", new_handle(p))
    })
}

/// Check `values` without allocating.
///
/// # Safety
/// `values` is null or valid.
#[no_mangle]
pub unsafe extern "C" fn vortical_params_validate(
    values: *const VorticalParamValues,
) -> VorticalStatus {
    guard(|| {
        params_of(read(values, "values")?)?;
        Ok(())
    })
}

/// Handle for a named preset, e.g. `"periodic-demo"`.
///
/// # Safety
/// `name` is null or a NUL-terminated string; `out` is null or valid.
#[no_mangle]
pub unsafe extern "C" fn vortical_params_from_preset(
    name: *const c_char,
    out: *mut *mut VorticalParams,
) -> VorticalStatus {
    guard(|| {
        if name.is_null() {
            return Err(Failure::Null("name"));
        }
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| Error::UnknownPreset("<non-UTF-8 name>".into()))?;
        let p = presets::preset(name)?.params();
        write(out, "out", new_handle(p))
    })
}

/// Copy the values held by a handle.
///
/// # Safety
/// `params` is null or a live handle; `out` is null or valid.
#[no_mangle]
pub unsafe extern "C" fn vortical_params_values(
    params: *const VorticalParams,
    out: *mut VorticalParamValues,
) -> VorticalStatus {
    guard(|| {
        let p = read(params, "params")?;
        write(out, "out", values_of(&p.0))
    })
}

/// # Safety
/// `params` is null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vortical_params_free(params: *mut VorticalParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Density, velocity and pressure at `(x, y)` for the given scale state.
///
/// # Safety
/// Pointers are null or valid.
#[no_mangle]
pub unsafe extern "C" fn vortical_eval_flow(
    params: *const VorticalParams,
    state: *const VorticalScaleState,
    x: f64,
    y: f64,
    out: *mut VorticalFlowSample,
) -> VorticalStatus {
    guard(|| {
        let p = read(params, "params")?;
        let s = read(state, "state")?;
        let f = eval_flow(
            &p.0,
            &ScaleState::new(s.t, s.a, s.adot),
            &QueryPoint::new(x, y),
        )?;
        write(
            out,
            "out",
            VorticalFlowSample {
                rho: f.rho,
                u1: f.u1,
                u2: f.u2,
                p: f.p,
            },
        )
    })
}

/// Default solver settings for a run from `t = 0` to `t_end`.
#[no_mangle]
pub extern "C" fn vortical_integration_config_default(t_end: f64) -> VorticalIntegrationConfig {
    let d = IntegrationConfig::until(t_end);
    VorticalIntegrationConfig {
        rel_tol: d.rel_tol,
        abs_tol: d.abs_tol,
        max_step: d.max_step,
        collapse_epsilon: d.collapse_epsilon,
        t0: d.t0,
        t_end: d.t_end,
    }
}

/// Integrate the scale equation; a collapse ends the run early and is
/// reported by `vortical_trajectory_summary`, not as an error.
///
/// # Safety
/// Pointers are null or valid. Free the trajectory with
/// `vortical_trajectory_free`.
#[no_mangle]
pub unsafe extern "C" fn vortical_integrate(
    params: *const VorticalParams,
    config: *const VorticalIntegrationConfig,
    out: *mut *mut VorticalTrajectory,
) -> VorticalStatus {
    guard(|| {
        let p = read(params, "params")?;
        let c = read(config, "config")?;
        let cfg = IntegrationConfig {
            rel_tol: c.rel_tol,
            abs_tol: c.abs_tol,
            max_step: c.max_step,
            collapse_epsilon: c.collapse_epsilon,
            t0: c.t0,
            t_end: c.t_end,
        };
        let traj = emden::integrate(&p.0, &cfg)?;
        write(
            out,
            "out",
            Box::into_raw(Box::new(VorticalTrajectory(traj))),
        )
    })
}

/// # Safety
/// `traj` is null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vortical_trajectory_free(traj: *mut VorticalTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Dense-output state at `t`; `OutOfRange` outside the integrated span.
///
/// # Safety
/// Pointers are null or valid.
#[no_mangle]
pub unsafe extern "C" fn vortical_trajectory_state_at(
    traj: *const VorticalTrajectory,
    t: f64,
    out: *mut VorticalScaleState,
) -> VorticalStatus {
    guard(|| {
        let tr = &read(traj, "traj")?.0;
        let st = tr.state_at(t).ok_or(Error::TrajectoryTooShort {
            t_lo: tr.t_start(),
            t_hi: tr.t_end(),
            need_lo: t,
            need_hi: t,
        })?;
        write(
            out,
            "out",
            VorticalScaleState {
                t: st.t,
                a: st.a,
                adot: st.adot,
            },
        )
    })
}

/// # Safety
/// Pointers are null or valid.
#[no_mangle]
pub unsafe extern "C" fn vortical_trajectory_summary(
    traj: *const VorticalTrajectory,
    out: *mut VorticalTrajectorySummary,
) -> VorticalStatus {
    guard(|| {
        let tr = &read(traj, "traj")?.0;
        let (collapsed, t_star, error_bar) = match tr.event() {
            TerminalEvent::Collapsed { t_star, error_bar } => (true, t_star, error_bar),
            TerminalEvent::ReachedEnd => (false, f64::NAN, f64::NAN),
        };
        write(
            out,
            "out",
            VorticalTrajectorySummary {
                t_start: tr.t_start(),
                t_end: tr.t_end(),
                nodes: tr.nodes().len(),
                energy_drift: emden::energy_drift(tr),
                collapsed,
                t_star,
                error_bar,
            },
        )
    })
}

/// Long-time regime of the initial data.
///
/// # Safety
/// Pointers are null or valid.
#[no_mangle]
pub unsafe extern "C" fn vortical_classify(
    params: *const VorticalParams,
    out: *mut VorticalRegime,
) -> VorticalStatus {
    guard(|| {
        let r = regimes::classify(&read(params, "params")?.0)?;
        let nan = f64::NAN;
        let mut c = VorticalRegime {
            branch: r.branch.into(),
            kind: VorticalRegimeKind::Global,
            period: nan,
            a_eq: nan,
            t_star: nan,
            t_lo: nan,
            t_hi: nan,
            energy: r.certificate.energy.e,
        };
        match r.kind {
            RegimeKind::Global => {}
            RegimeKind::TimePeriodic { period } => {
                c.kind = VorticalRegimeKind::TimePeriodic;
                c.period = period;
            }
            RegimeKind::Steady { a_eq } => {
                c.kind = VorticalRegimeKind::Steady;
                c.a_eq = a_eq;
            }
            RegimeKind::FiniteTimeBlowup { t_star, t_lo, t_hi } => {
                c.kind = VorticalRegimeKind::FiniteTimeBlowup;
                (c.t_star, c.t_lo, c.t_hi) = (t_star, t_lo, t_hi);
            }
        }
        write(out, "out", c)
    })
}

/// Period of a bound orbit by quadrature.
///
/// # Safety
/// Pointers are null or valid.
#[no_mangle]
pub unsafe extern "C" fn vortical_period(
    params: *const VorticalParams,
    out: *mut VorticalPeriod,
) -> VorticalStatus {
    guard(|| {
        let r = regimes::period_quadrature(&read(params, "params")?.0)?;
        write(
            out,
            "out",
            VorticalPeriod {
                period: r.period,
                error_estimate: r.error_estimate,
                a_min: r.a_min,
                a_max: r.a_max,
                truncated: r.truncated,
            },
        )
    })
}

/// Static label such as `"2b-blowup"`.
#[no_mangle]
pub extern "C" fn vortical_branch_label(branch: VorticalBranch) -> *const c_char {
    let s: &'static CStr = match branch {
        VorticalBranch::One => c"1",
        VorticalBranch::TwoAI => c"2aI",
        VorticalBranch::TwoAII => c"2aII",
        VorticalBranch::TwoBBlowup => c"2b-blowup",
        VorticalBranch::TwoBGlobal => c"2b-global",
        VorticalBranch::ThreeA => c"3a",
        VorticalBranch::ThreeBIGlobal => c"3bI-global",
        VorticalBranch::ThreeBIBlowup => c"3bI-blowup",
        VorticalBranch::ThreeBIIGlobal => c"3bII-global",
        VorticalBranch::ThreeBIIBlowup => c"3bII-blowup",
    };
    s.as_ptr()
}

/// Static name such as `"DegenerateOrbit"`.
#[no_mangle]
pub extern "C" fn vortical_status_name(status: VorticalStatus) -> *const c_char {
    let s: &'static CStr = match status {
        VorticalStatus::Ok => c"Ok",
        VorticalStatus::NullPointer => c"NullPointer",
        VorticalStatus::InvalidParams => c"InvalidParams",
        VorticalStatus::InvalidArgument => c"InvalidArgument",
        VorticalStatus::UnknownPreset => c"UnknownPreset",
        VorticalStatus::ZeroRotation => c"ZeroRotation",
        VorticalStatus::CollapsedState => c"CollapsedState",
        VorticalStatus::OutOfRange => c"OutOfRange",
        VorticalStatus::NoBracket => c"NoBracket",
        VorticalStatus::DegenerateOrbit => c"DegenerateOrbit",
        VorticalStatus::StepFailure => c"StepFailure",
        VorticalStatus::Other => c"Other",
        VorticalStatus::Panic => c"Panic",
    };
    s.as_ptr()
}

/// Copy the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes) and return its full length in bytes, or 0
/// when the last call succeeded. A null `buf` only queries the length.
///
/// # Safety
/// `buf` is null or valid for writes of `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn vortical_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}
