//! C ABI over `smc-lab`.
//!
//! Every fallible function returns an [`SmcStatus`]; on anything other than
//! `SMC_STATUS_OK` a description is available from [`smc_last_error_message`]
//! on the same thread. Scenarios and trajectories are opaque handles owned by
//! the caller and released with their `_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use smc_lab::control::{ahssmc_control, ihssmc_control};
use smc_lab::design::{crane_linearization, sliding_eigenvalues, solve_surface_params, LinearizationConstants};
use smc_lab::experiments::{builtin, export_csv, parse_scenario, run_scenario, Scenario};
use smc_lab::linalg::ackermann_gain;
use smc_lab::plant::{crane_derivative, crane_terms};
use smc_lab::poly::C64;
use smc_lab::{AhssmcParams, CraneParams, Error, IhssmcParams, IntegratorConfig, StateVector, Status, Trajectory};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SingularGain = 3,
    Uncontrollable = 4,
    SingularDesign = 5,
    Config = 6,
    Io = 7,
    OutOfRange = 8,
    Panic = 9,
}

/// How a simulation ended.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmcRunStatus {
    Completed = 0,
    Diverged = 1,
    SingularGain = 2,
    StepUnderflow = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmcState {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub x4: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmcCraneParams {
    pub cart_mass: f64,
    pub payload_mass: f64,
    pub rope_length: f64,
    pub gravity: f64,
    pub x_d: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmcPlantTerms {
    pub f1: f64,
    pub b1: f64,
    pub f2: f64,
    pub b2: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmcIhssmcParams {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub eta: f64,
    pub k: f64,
    pub x_d: f64,
    pub boundary_layer: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmcAhssmcParams {
    pub c1: f64,
    pub c2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub eta: f64,
    pub k: f64,
    pub x_d: f64,
    pub boundary_layer: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmcIntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub t_end: f64,
    pub diverge_norm: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmcSurfaceDesign {
    pub c1: f64,
    pub c2: f64,
    pub alpha1: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmcComplex {
    pub re: f64,
    pub im: f64,
}

/// One recorded sample. Surface fields are NaN when `has_surfaces` is 0.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmcSample {
    pub t: f64,
    pub state: SmcState,
    pub u: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub has_surfaces: u8,
}

/// Opaque scenario handle.
pub struct SmcScenario(Scenario);

/// Opaque trajectory handle.
pub struct SmcTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("nul bytes replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(code: SmcStatus, msg: impl Into<String>) -> SmcStatus {
    set_error(msg);
    code
}

fn from_error(e: Error) -> SmcStatus {
    let code = match &e {
        Error::SingularGain { .. } | Error::SingularInertia { .. } => SmcStatus::SingularGain,
        Error::Uncontrollable { .. } => SmcStatus::Uncontrollable,
        Error::SingularDesign(_) | Error::ZeroCoupling | Error::DegenerateRouth { .. } => SmcStatus::SingularDesign,
        Error::Config(_) => SmcStatus::Config,
        Error::Io(_) => SmcStatus::Io,
        Error::InvalidParams(_) | Error::Dimension(_) | Error::PolesNotConjugate => SmcStatus::InvalidArgument,
    };
    fail(code, e.to_string())
}

/// Runs `f`, converting panics into `SMC_STATUS_PANIC`.
fn guarded(f: impl FnOnce() -> Result<(), SmcStatus>) -> SmcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SmcStatus::Ok,
        Ok(Err(code)) => code,
        Err(_) => fail(SmcStatus::Panic, "internal panic"),
    }
}

unsafe fn arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, SmcStatus> {
    p.as_ref().ok_or_else(|| fail(SmcStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, SmcStatus> {
    p.as_mut().ok_or_else(|| fail(SmcStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, SmcStatus> {
    if p.is_null() {
        return Err(fail(SmcStatus::NullPointer, format!("`{name}` is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(SmcStatus::InvalidArgument, format!("`{name}` is not UTF-8")))
}

impl From<SmcState> for StateVector {
    fn from(s: SmcState) -> Self {
        StateVector::new(s.x1, s.x2, s.x3, s.x4)
    }
}

impl From<StateVector> for SmcState {
    fn from(s: StateVector) -> Self {
        SmcState { x1: s.x1, x2: s.x2, x3: s.x3, x4: s.x4 }
    }
}

impl From<SmcCraneParams> for CraneParams {
    fn from(p: SmcCraneParams) -> Self {
        CraneParams {
            cart_mass: p.cart_mass,
            payload_mass: p.payload_mass,
            rope_length: p.rope_length,
            gravity: p.gravity,
            x_d: p.x_d,
        }
    }
}

impl From<SmcIhssmcParams> for IhssmcParams {
    fn from(p: SmcIhssmcParams) -> Self {
        IhssmcParams { c1: p.c1, c2: p.c2, c3: p.c3, eta: p.eta, k: p.k, x_d: p.x_d, boundary_layer: p.boundary_layer }
    }
}

impl From<SmcAhssmcParams> for AhssmcParams {
    fn from(p: SmcAhssmcParams) -> Self {
        AhssmcParams {
            c1: p.c1,
            c2: p.c2,
            alpha1: p.alpha1,
            alpha2: p.alpha2,
            eta: p.eta,
            k: p.k,
            x_d: p.x_d,
            boundary_layer: p.boundary_layer,
        }
    }
}

impl From<SmcIntegratorConfig> for IntegratorConfig {
    fn from(c: SmcIntegratorConfig) -> Self {
        IntegratorConfig {
            rtol: c.rtol,
            atol: c.atol,
            h_init: c.h_init,
            h_min: c.h_min,
            h_max: c.h_max,
            t_end: c.t_end,
            diverge_norm: c.diverge_norm,
        }
    }
}

impl From<IntegratorConfig> for SmcIntegratorConfig {
    fn from(c: IntegratorConfig) -> Self {
        SmcIntegratorConfig {
            rtol: c.rtol,
            atol: c.atol,
            h_init: c.h_init,
            h_min: c.h_min,
            h_max: c.h_max,
            t_end: c.t_end,
            diverge_norm: c.diverge_norm,
        }
    }
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn smc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Static, nul-terminated library version.
#[no_mangle]
pub extern "C" fn smc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn smc_crane_params_default() -> SmcCraneParams {
    let p = CraneParams::default();
    SmcCraneParams {
        cart_mass: p.cart_mass,
        payload_mass: p.payload_mass,
        rope_length: p.rope_length,
        gravity: p.gravity,
        x_d: p.x_d,
    }
}

#[no_mangle]
pub extern "C" fn smc_ihssmc_params_default() -> SmcIhssmcParams {
    let p = IhssmcParams::default();
    SmcIhssmcParams { c1: p.c1, c2: p.c2, c3: p.c3, eta: p.eta, k: p.k, x_d: p.x_d, boundary_layer: p.boundary_layer }
}

#[no_mangle]
pub extern "C" fn smc_ahssmc_params_default() -> SmcAhssmcParams {
    let p = AhssmcParams::default();
    SmcAhssmcParams {
        c1: p.c1,
        c2: p.c2,
        alpha1: p.alpha1,
        alpha2: p.alpha2,
        eta: p.eta,
        k: p.k,
        x_d: p.x_d,
        boundary_layer: p.boundary_layer,
    }
}

#[no_mangle]
pub extern "C" fn smc_integrator_config_default() -> SmcIntegratorConfig {
    IntegratorConfig::default().into()
}

fn crane(p: &SmcCraneParams) -> Result<CraneParams, SmcStatus> {
    let c = CraneParams::from(*p);
    c.validate().map_err(from_error)?;
    Ok(c)
}

/// Drift and input-gain terms of the crane at `state`.
#[no_mangle]
pub unsafe extern "C" fn smc_crane_terms(
    state: *const SmcState,
    params: *const SmcCraneParams,
    terms_out: *mut SmcPlantTerms,
) -> SmcStatus {
    guarded(|| {
        let s = StateVector::from(*arg(state, "state")?);
        let p = crane(arg(params, "params")?)?;
        let t = crane_terms(&s, &p);
        *out(terms_out, "terms_out")? = SmcPlantTerms { f1: t.f1, b1: t.b1, f2: t.f2, b2: t.b2 };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn smc_crane_derivative(
    state: *const SmcState,
    u: f64,
    params: *const SmcCraneParams,
    derivative_out: *mut SmcState,
) -> SmcStatus {
    guarded(|| {
        let s = StateVector::from(*arg(state, "state")?);
        let p = crane(arg(params, "params")?)?;
        *out(derivative_out, "derivative_out")? = crane_derivative(&s, u, &p).into();
        Ok(())
    })
}

/// Incremental hierarchical sliding-mode input for the crane at `state`.
#[no_mangle]
pub unsafe extern "C" fn smc_ihssmc_control(
    state: *const SmcState,
    gains: *const SmcIhssmcParams,
    params: *const SmcCraneParams,
    u_out: *mut f64,
) -> SmcStatus {
    guarded(|| {
        let s = StateVector::from(*arg(state, "state")?);
        let g = IhssmcParams::from(*arg(gains, "gains")?);
        g.validate().map_err(from_error)?;
        let p = crane(arg(params, "params")?)?;
        *out(u_out, "u_out")? = ihssmc_control(&s, &g, &crane_terms(&s, &p)).map_err(from_error)?;
        Ok(())
    })
}

/// Aggregated hierarchical sliding-mode input for the crane at `state`.
#[no_mangle]
pub unsafe extern "C" fn smc_ahssmc_control(
    state: *const SmcState,
    gains: *const SmcAhssmcParams,
    params: *const SmcCraneParams,
    u_out: *mut f64,
) -> SmcStatus {
    guarded(|| {
        let s = StateVector::from(*arg(state, "state")?);
        let g = AhssmcParams::from(*arg(gains, "gains")?);
        g.validate().map_err(from_error)?;
        let p = crane(arg(params, "params")?)?;
        *out(u_out, "u_out")? = ahssmc_control(&s, &g, &crane_terms(&s, &p)).map_err(from_error)?;
        Ok(())
    })
}

/// Surface parameters giving the sliding dynamics the characteristic
/// polynomial `s^3 + d1 s^2 + d2 s + d3`.
#[no_mangle]
pub unsafe extern "C" fn smc_solve_surface_params(
    params: *const SmcCraneParams,
    d1: f64,
    d2: f64,
    d3: f64,
    design_out: *mut SmcSurfaceDesign,
) -> SmcStatus {
    guarded(|| {
        let p = crane(arg(params, "params")?)?;
        let d = solve_surface_params(&LinearizationConstants::from(&p), d1, d2, d3).map_err(from_error)?;
        *out(design_out, "design_out")? = SmcSurfaceDesign { c1: d.c1, c2: d.c2, alpha1: d.alpha1 };
        Ok(())
    })
}

/// Writes the three eigenvalues of the linearized sliding dynamics,
/// ascending by real part.
#[no_mangle]
pub unsafe extern "C" fn smc_sliding_eigenvalues(
    params: *const SmcCraneParams,
    c1: f64,
    c2: f64,
    alpha1: f64,
    eigenvalues_out: *mut SmcComplex,
) -> SmcStatus {
    guarded(|| {
        let p = crane(arg(params, "params")?)?;
        if eigenvalues_out.is_null() {
            return Err(fail(SmcStatus::NullPointer, "`eigenvalues_out` is null"));
        }
        let ev = sliding_eigenvalues(&LinearizationConstants::from(&p), c1, c2, alpha1).map_err(from_error)?;
        let dst = std::slice::from_raw_parts_mut(eigenvalues_out, 3);
        for (d, z) in dst.iter_mut().zip(ev) {
            *d = SmcComplex { re: z.re, im: z.im };
        }
        Ok(())
    })
}

/// State-feedback gain placing the poles of the linearized crane.
/// `poles` holds four entries; complex poles must come in conjugate pairs.
#[no_mangle]
pub unsafe extern "C" fn smc_crane_ackermann(
    params: *const SmcCraneParams,
    poles: *const SmcComplex,
    n_poles: usize,
    gain_out: *mut f64,
) -> SmcStatus {
    guarded(|| {
        let p = crane(arg(params, "params")?)?;
        if poles.is_null() || gain_out.is_null() {
            return Err(fail(SmcStatus::NullPointer, "`poles` or `gain_out` is null"));
        }
        if n_poles != 4 {
            return Err(fail(SmcStatus::InvalidArgument, format!("{n_poles} poles for a fourth-order plant")));
        }
        let poles: Vec<C64> = std::slice::from_raw_parts(poles, n_poles).iter().map(|z| C64::new(z.re, z.im)).collect();
        let k = ackermann_gain(&crane_linearization(&p), &poles).map_err(from_error)?;
        std::slice::from_raw_parts_mut(gain_out, 4).copy_from_slice(k.as_slice());
        Ok(())
    })
}

/// Creates a handle for a builtin scenario by name.
#[no_mangle]
pub unsafe extern "C" fn smc_scenario_builtin(name: *const c_char, scenario_out: *mut *mut SmcScenario) -> SmcStatus {
    guarded(|| {
        let name = c_str(name, "name")?;
        let dst = out(scenario_out, "scenario_out")?;
        let s = builtin(name).ok_or_else(|| fail(SmcStatus::Config, format!("unknown scenario `{name}`")))?;
        *dst = Box::into_raw(Box::new(SmcScenario(s)));
        Ok(())
    })
}

/// Parses a scenario from the `key = value` configuration text.
#[no_mangle]
pub unsafe extern "C" fn smc_scenario_from_config(
    text: *const c_char,
    scenario_out: *mut *mut SmcScenario,
) -> SmcStatus {
    guarded(|| {
        let text = c_str(text, "text")?;
        let dst = out(scenario_out, "scenario_out")?;
        let s = parse_scenario(text).map_err(from_error)?;
        *dst = Box::into_raw(Box::new(SmcScenario(s)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn smc_scenario_get_integrator(
    scenario: *const SmcScenario,
    config_out: *mut SmcIntegratorConfig,
) -> SmcStatus {
    guarded(|| {
        let s = arg(scenario, "scenario")?;
        *out(config_out, "config_out")? = s.0.integrator.into();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn smc_scenario_set_integrator(
    scenario: *mut SmcScenario,
    config: *const SmcIntegratorConfig,
) -> SmcStatus {
    guarded(|| {
        let cfg = IntegratorConfig::from(*arg(config, "config")?);
        cfg.validate().map_err(from_error)?;
        out(scenario, "scenario")?.0.integrator = cfg;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn smc_scenario_set_initial_state(scenario: *mut SmcScenario, y0: *const SmcState) -> SmcStatus {
    guarded(|| {
        let y0 = StateVector::from(*arg(y0, "y0")?);
        out(scenario, "scenario")?.0.y0 = y0;
        Ok(())
    })
}

/// Releases a scenario handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn smc_scenario_free(scenario: *mut SmcScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Integrates the scenario. Divergence, singular gains and step underflow
/// are reported through [`smc_trajectory_status`], not the return code.
#[no_mangle]
pub unsafe extern "C" fn smc_scenario_run(
    scenario: *const SmcScenario,
    trajectory_out: *mut *mut SmcTrajectory,
) -> SmcStatus {
    guarded(|| {
        let s = arg(scenario, "scenario")?;
        let dst = out(trajectory_out, "trajectory_out")?;
        let (traj, _) = run_scenario(&s.0).map_err(from_error)?;
        *dst = Box::into_raw(Box::new(SmcTrajectory(traj)));
        Ok(())
    })
}

/// Number of recorded samples; zero for a null handle.
#[no_mangle]
pub unsafe extern "C" fn smc_trajectory_len(trajectory: *const SmcTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| t.0.len())
}

#[no_mangle]
pub unsafe extern "C" fn smc_trajectory_sample(
    trajectory: *const SmcTrajectory,
    index: usize,
    sample_out: *mut SmcSample,
) -> SmcStatus {
    guarded(|| {
        let t = &arg(trajectory, "trajectory")?.0;
        let dst = out(sample_out, "sample_out")?;
        if index >= t.len() {
            return Err(fail(SmcStatus::OutOfRange, format!("sample {index} of {}", t.len())));
        }
        let sv = t.surfaces[index];
        *dst = SmcSample {
            t: t.times[index],
            state: t.states[index].into(),
            u: t.controls[index],
            s1: sv.map_or(f64::NAN, |s| s.s1),
            s2: sv.map_or(f64::NAN, |s| s.s2),
            s3: sv.map_or(f64::NAN, |s| s.s3),
            has_surfaces: u8::from(sv.is_some()),
        };
        Ok(())
    })
}

/// Terminal status and, unless completed, the time it was reached
/// (`NaN` for a completed run).
#[no_mangle]
pub unsafe extern "C" fn smc_trajectory_status(
    trajectory: *const SmcTrajectory,
    status_out: *mut SmcRunStatus,
    time_out: *mut f64,
) -> SmcStatus {
    guarded(|| {
        let st = arg(trajectory, "trajectory")?.0.status;
        *out(status_out, "status_out")? = match st {
            Status::Completed => SmcRunStatus::Completed,
            Status::Diverged { .. } => SmcRunStatus::Diverged,
            Status::SingularGain { .. } => SmcRunStatus::SingularGain,
            Status::StepUnderflow { .. } => SmcRunStatus::StepUnderflow,
        };
        if let Some(t) = time_out.as_mut() {
            *t = st.time().unwrap_or(f64::NAN);
        }
        Ok(())
    })
}

/// Writes the trajectory CSV to `path`.
#[no_mangle]
pub unsafe extern "C" fn smc_trajectory_export_csv(trajectory: *const SmcTrajectory, path: *const c_char) -> SmcStatus {
    guarded(|| {
        let t = arg(trajectory, "trajectory")?;
        let path = c_str(path, "path")?;
        export_csv(&t.0, Path::new(path)).map_err(from_error)
    })
}

/// Releases a trajectory handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn smc_trajectory_free(trajectory: *mut SmcTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}
