//! Sliding-mode control laws for the two-chain plant and a linear
//! state-feedback baseline.
//!
//! The incremental (IHSSMC) and aggregated (AHSSMC) laws follow the
//! reference simulation code line by line, including `sign(0) = 0`.
//! Controllers are stateless maps from the current state and plant terms
//! to a force.

use crate::error::{Denominator, Error, Result};
use crate::plant::{crane_terms, CraneParams, PlantTerms, StateVector};

/// Absolute tolerance on every guarded denominator.
pub const SINGULAR_GAIN_TOL: f64 = 1e-9;

pub(crate) fn guard(value: f64, which: Denominator) -> Result<f64> {
    if value.abs() < SINGULAR_GAIN_TOL || !value.is_finite() {
        Err(Error::SingularGain { which, value })
    } else {
        Ok(value)
    }
}

/// `sign` with `sign(0) = 0`.
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Switching nonlinearity of the reaching law. A positive `boundary_layer`
/// replaces `sign(s)` by `sat(s / boundary_layer)`.
pub fn switching(s: f64, boundary_layer: f64) -> f64 {
    if boundary_layer > 0.0 {
        (s / boundary_layer).clamp(-1.0, 1.0)
    } else {
        sign(s)
    }
}

/// Incremental hierarchical sliding-mode gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IhssmcParams {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub eta: f64,
    pub k: f64,
    pub x_d: f64,
    pub boundary_layer: f64,
}

impl Default for IhssmcParams {
    fn default() -> Self {
        Self { c1: 1.4, c2: 0.2, c3: 0.1, eta: 1.0, k: 0.1, x_d: 2.0, boundary_layer: 0.0 }
    }
}

impl IhssmcParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.c1 > 0.0
            && self.c2 >= 0.0
            && self.c3 >= 0.0
            && self.eta >= 0.0
            && self.k >= 0.0
            && self.boundary_layer >= 0.0
            && self.x_d.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("IHSSMC gains out of range: {self:?}")))
        }
    }
}

/// Aggregated hierarchical sliding-mode gains. `c2` may be negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AhssmcParams {
    pub c1: f64,
    pub c2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub eta: f64,
    pub k: f64,
    pub x_d: f64,
    pub boundary_layer: f64,
}

impl Default for AhssmcParams {
    fn default() -> Self {
        Self { c1: 0.8, c2: 35.0, alpha1: 10.0, alpha2: 1.0, eta: 3.5, k: 6.0, x_d: 2.0, boundary_layer: 0.0 }
    }
}

impl AhssmcParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.c1, self.c2, self.alpha1, self.alpha2, self.x_d].iter().all(|v| v.is_finite());
        let ok = finite
            && !(self.alpha1 == 0.0 && self.alpha2 == 0.0)
            && self.eta >= 0.0
            && self.k >= 0.0
            && self.boundary_layer >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("AHSSMC gains out of range: {self:?}")))
        }
    }
}

/// Sliding-variable values at one state.
///
/// For the incremental law `s3` is the outermost surface and `c2_eff`,
/// `c3_eff` are the sign-switched coefficients; for the aggregated law `s3`
/// holds `S` and the effective coefficients are zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SurfaceValues {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub c2_eff: f64,
    pub c3_eff: f64,
}

pub fn ihssmc_surfaces(state: &StateVector, p: &IhssmcParams) -> SurfaceValues {
    let s1 = state.x2 + p.c1 * (state.x1 - p.x_d);
    let c2_eff = p.c2 * sign(state.x3 * s1);
    let s2 = s1 + c2_eff * state.x3;
    let c3_eff = p.c3 * sign(state.x4 * s2);
    let s3 = s2 + c3_eff * state.x4;
    SurfaceValues { s1, s2, s3, c2_eff, c3_eff }
}

pub fn ihssmc_control(state: &StateVector, p: &IhssmcParams, terms: &PlantTerms) -> Result<f64> {
    let sv = ihssmc_surfaces(state, p);
    let PlantTerms { f1, b1, f2, b2 } = *terms;
    let den = guard(sv.c3_eff * b2 + b1, Denominator::Incremental)?;
    let ueq = -(sv.c3_eff * f2 + sv.c2_eff * state.x4 + f1 + p.c1 * state.x2) / den;
    let usw = -(p.eta * switching(sv.s3, p.boundary_layer) + p.k * sv.s3) / den;
    Ok(ueq + usw)
}

pub fn ahssmc_surfaces(state: &StateVector, p: &AhssmcParams) -> SurfaceValues {
    let s1 = state.x2 + p.c1 * (state.x1 - p.x_d);
    let s2 = state.x4 + p.c2 * state.x3;
    SurfaceValues { s1, s2, s3: p.alpha1 * s1 + p.alpha2 * s2, c2_eff: 0.0, c3_eff: 0.0 }
}

/// Equivalent controls of the two sub-surfaces: `(ueq1, ueq2)`.
pub fn ahssmc_equivalent_controls(state: &StateVector, p: &AhssmcParams, terms: &PlantTerms) -> Result<(f64, f64)> {
    let b1 = guard(terms.b1, Denominator::B1)?;
    let b2 = guard(terms.b2, Denominator::B2)?;
    let ueq1 = -(terms.f1 + p.c1 * state.x2) / b1;
    let ueq2 = -(terms.f2 + p.c2 * state.x4) / b2;
    Ok((ueq1, ueq2))
}

pub fn ahssmc_control(state: &StateVector, p: &AhssmcParams, terms: &PlantTerms) -> Result<f64> {
    let sv = ahssmc_surfaces(state, p);
    let (ueq1, ueq2) = ahssmc_equivalent_controls(state, p, terms)?;
    let (ab1, ab2) = (p.alpha1 * terms.b1, p.alpha2 * terms.b2);
    let den = guard(ab1 + ab2, Denominator::Aggregated)?;
    let s = sv.s3;
    let usw = -1.0 / den * (ab1 * ueq2 + ab2 * ueq1 + p.eta * switching(s, p.boundary_layer) + p.k * s);
    Ok(ueq1 + ueq2 + usw)
}

/// Equivalent control on `s1 = x2 + c1 x1 = 0` with `x2` replaced by
/// `-c1 x1`. `state` is in error coordinates; its `x2` is ignored.
pub fn equivalent_control_s1(state: &StateVector, c1: f64, p: &CraneParams) -> f64 {
    let on_surface = StateVector { x2: -c1 * state.x1, ..*state };
    let t = crane_terms(&on_surface, p);
    (c1 * c1 * state.x1 - t.f1) / t.b1
}

/// Equivalent control keeping the aggregated surface `S` stationary, with
/// `x4` eliminated through `S = 0`. `state` is in error coordinates; its
/// `x4` is ignored. `alpha2` is normalized to one.
pub fn equivalent_control_sliding(state: &StateVector, p: &AhssmcParams, cp: &CraneParams) -> Result<f64> {
    let (c1, c2, alpha1) = normalized_surface(p)?;
    let x4 = crate::plant::surface_x4(state.x1, state.x2, state.x3, c1, c2, alpha1);
    let on_surface = StateVector { x4, ..*state };
    let terms = crane_terms(&on_surface, cp);
    crate::plant::sliding_equivalent_control(&on_surface, &terms, c1, c2, alpha1)
}

/// `(c1, c2, alpha1 / alpha2)`.
pub(crate) fn normalized_surface(p: &AhssmcParams) -> Result<(f64, f64, f64)> {
    if p.alpha2 == 0.0 {
        return Err(Error::InvalidParams("alpha2 must be nonzero to normalize S".into()));
    }
    Ok((p.c1, p.c2, p.alpha1 / p.alpha2))
}

/// State-feedback gain `K` for `u = -K (x - x_ref)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearGain(pub [f64; 4]);

impl LinearGain {
    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

pub fn linear_feedback(state: &StateVector, gain: &LinearGain, x_d: f64) -> f64 {
    let e = state.to_error(x_d).to_array();
    -gain.0.iter().zip(e).map(|(k, x)| k * x).sum::<f64>()
}
