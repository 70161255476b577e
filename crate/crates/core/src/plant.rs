//! Closed-form plant models: the overhead crane, the full and degenerate
//! Pendubot, the coupled two-chain family and the reduced dynamics that
//! appear on the sliding surfaces.
//!
//! Every model here is a pure function of its arguments.

use crate::error::{Error, Result};

/// Four-state vector of a two-chain underactuated plant.
///
/// `x1`/`x2` are the actuated chain (cart position and velocity), `x3`/`x4`
/// the unactuated chain (swing angle and rate). In closed-loop simulations
/// `x1` holds the raw cart position and controllers subtract their target.
/// `x3` is never wrapped.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateVector {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub x4: f64,
}

impl StateVector {
    pub const ZERO: StateVector = StateVector::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(x1: f64, x2: f64, x3: f64, x4: f64) -> Self {
        Self { x1, x2, x3, x4 }
    }

    pub const fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub const fn to_array(self) -> [f64; 4] {
        [self.x1, self.x2, self.x3, self.x4]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Infinity if any component is NaN.
    pub fn max_norm(&self) -> f64 {
        self.to_array().iter().fold(0.0_f64, |m, v| if v.is_nan() { f64::INFINITY } else { m.max(v.abs()) })
    }

    /// Same state with `x_d` subtracted from the position.
    pub fn to_error(self, x_d: f64) -> Self {
        Self { x1: self.x1 - x_d, ..self }
    }
}

impl From<[f64; 4]> for StateVector {
    fn from(a: [f64; 4]) -> Self {
        Self::from_array(a)
    }
}

impl From<StateVector> for [f64; 4] {
    fn from(s: StateVector) -> Self {
        s.to_array()
    }
}

/// Overhead crane parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CraneParams {
    /// Cart mass (kg).
    pub cart_mass: f64,
    /// Payload mass (kg).
    pub payload_mass: f64,
    /// Rope length (m).
    pub rope_length: f64,
    pub gravity: f64,
    /// Target cart position (m).
    pub x_d: f64,
}

impl Default for CraneParams {
    fn default() -> Self {
        Self { cart_mass: 1.0, payload_mass: 0.8, rope_length: 0.305, gravity: 9.8, x_d: 2.0 }
    }
}

impl CraneParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.cart_mass > 0.0
            && self.payload_mass >= 0.0
            && self.rope_length > 0.0
            && self.gravity > 0.0
            && self.x_d.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("crane requires M > 0, m >= 0, L > 0, g > 0: {self:?}")))
        }
    }
}

/// Drift and input gain of both chains evaluated at one state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantTerms {
    pub f1: f64,
    pub b1: f64,
    pub f2: f64,
    pub b2: f64,
}

impl PlantTerms {
    /// Rate of the four-state system under input `u`.
    pub fn derivative(&self, state: &StateVector, u: f64) -> StateVector {
        StateVector::new(state.x2, self.f1 + self.b1 * u, state.x4, self.f2 + self.b2 * u)
    }
}

pub fn crane_terms(state: &StateVector, p: &CraneParams) -> PlantTerms {
    let CraneParams { cart_mass: mc, payload_mass: m, rope_length: l, gravity: g, .. } = *p;
    let (s, c) = state.x3.sin_cos();
    let w2 = state.x4 * state.x4;
    let den = mc + m * s * s;
    PlantTerms {
        f1: (m * l * w2 * s + m * g * s * c) / den,
        b1: 1.0 / den,
        f2: -((m + mc) * g * s + m * l * w2 * s * c) / (den * l),
        b2: -c / (den * l),
    }
}

pub fn crane_derivative(state: &StateVector, u: f64, p: &CraneParams) -> StateVector {
    crane_terms(state, p).derivative(state, u)
}

/// Two-link Pendubot parameters (first joint actuated, second free).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendubotParams {
    pub m1: f64,
    pub m2: f64,
    pub l1: f64,
    pub lc1: f64,
    pub lc2: f64,
    pub i1: f64,
    pub i2: f64,
    pub gravity: f64,
}

/// Lumped inertial constants `q1..q5` of the Pendubot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendubotConstants {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub q4: f64,
    pub q5: f64,
}

impl PendubotParams {
    pub fn constants(&self) -> PendubotConstants {
        PendubotConstants {
            q1: self.m1 * self.lc1 * self.lc1 + self.m2 * self.l1 * self.l1 + self.i1,
            q2: self.m2 * self.lc2 * self.lc2 + self.i2,
            q3: self.m2 * self.l1 * self.lc2,
            q4: self.m1 * self.lc1 + self.m2 * self.l1,
            q5: self.m2 * self.lc2,
        }
    }

    /// Checks nonnegativity and that `D(theta)` is positive definite for every
    /// configuration (`q1 q2 > q3^2`).
    pub fn validate(&self) -> Result<()> {
        let fields = [self.m1, self.m2, self.l1, self.lc1, self.lc2, self.i1, self.i2];
        if fields.iter().any(|v| v.is_nan() || *v < 0.0) || self.gravity.is_nan() || self.gravity <= 0.0 {
            return Err(Error::InvalidParams(format!("negative Pendubot parameter: {self:?}")));
        }
        let q = self.constants();
        if q.q1 * q.q2 <= q.q3 * q.q3 {
            return Err(Error::InvalidParams("inertia matrix not positive definite".into()));
        }
        Ok(())
    }
}

pub fn pendubot_derivative(theta: [f64; 2], theta_dot: [f64; 2], tau1: f64, p: &PendubotParams) -> Result<[f64; 4]> {
    let q = p.constants();
    let g = p.gravity;
    let (s2, c2) = theta[1].sin_cos();

    let d11 = q.q1 + q.q2 + 2.0 * q.q3 * c2;
    let d12 = q.q2 + q.q3 * c2;
    let d22 = q.q2;
    let det = d11 * d22 - d12 * d12;
    let floor = 1e-12 * (d11.abs() * d22.abs()).max(f64::MIN_POSITIVE);
    if det.is_nan() || det.abs() <= floor {
        return Err(Error::SingularInertia { det });
    }

    // C(theta, theta_dot) * theta_dot
    let h = q.q3 * s2;
    let c_td1 = h * (-theta_dot[1] * theta_dot[0] + (-theta_dot[1] - theta_dot[0]) * theta_dot[1]);
    let c_td2 = h * theta_dot[0] * theta_dot[0];

    let c12 = (theta[0] + theta[1]).cos();
    let g1 = q.q4 * g * theta[0].cos() + q.q5 * g * c12;
    let g2 = q.q5 * g * c12;

    let r1 = tau1 - c_td1 - g1;
    let r2 = -c_td2 - g2;
    let acc1 = (d22 * r1 - d12 * r2) / det;
    let acc2 = (-d12 * r1 + d11 * r2) / det;
    Ok([theta_dot[0], theta_dot[1], acc1, acc2])
}

/// Pendubot with the second link's centre of mass on its joint axis, written
/// in normalized input `u = (tau1 - q4 g cos theta1) / q1`.
pub fn degenerate_pendubot_derivative(state: &StateVector, u: f64) -> StateVector {
    StateVector::new(state.x2, u, state.x4, -u)
}

/// Plant terms of the degenerate Pendubot: `f1 = f2 = 0`, `b1 = 1`, `b2 = -1`.
pub const DEGENERATE_PENDUBOT_TERMS: PlantTerms = PlantTerms { f1: 0.0, b1: 1.0, f2: 0.0, b2: -1.0 };

/// Two-chain system with `f1 = k f2` and `b1 = k b2`, where `f2`, `b2` come
/// from `base`. Only the unactuated-chain terms of `base` are used.
pub fn coupled_pair_terms<F>(state: &StateVector, k: f64, base: F) -> Result<PlantTerms>
where
    F: Fn(&StateVector) -> PlantTerms,
{
    if k == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    let t = base(state);
    Ok(PlantTerms { f1: k * t.f2, b1: k * t.b2, f2: t.f2, b2: t.b2 })
}

pub fn coupled_pair_derivative<F>(state: &StateVector, u: f64, k: f64, base: F) -> Result<StateVector>
where
    F: Fn(&StateVector) -> PlantTerms,
{
    Ok(coupled_pair_terms(state, k, base)?.derivative(state, u))
}

/// Swing dynamics while the cart chain slides on `x2 + c1 x1 = 0` under its
/// equivalent control. `x1` is the position error.
pub fn reduced_s1_dynamics(x1: f64, x3: f64, x4: f64, c1: f64, p: &CraneParams) -> (f64, f64) {
    let l = p.rope_length;
    (x4, -(p.gravity / l) * x3.sin() - (c1 * c1 / l) * x1 * x3.cos())
}

pub fn asymptotic_pendulum_derivative(x3: f64, x4: f64, p: &CraneParams) -> (f64, f64) {
    (x4, -(p.gravity / p.rope_length) * x3.sin())
}

/// `V = x4^2 / 2 + (g / L)(1 - cos x3)`, conserved by the asymptotic pendulum.
pub fn pendulum_energy(x3: f64, x4: f64, p: &CraneParams) -> f64 {
    0.5 * x4 * x4 + p.gravity / p.rope_length * (1.0 - x3.cos())
}

/// Dynamics restricted to the normalized aggregated surface
/// `S = alpha1 (x2 + c1 x1) + x4 + c2 x3 = 0`, with `x4` eliminated and the
/// input replaced by its equivalent control. Error coordinates.
pub fn reduced_sliding_dynamics(
    x1: f64,
    x2: f64,
    x3: f64,
    p: &CraneParams,
    c1: f64,
    c2: f64,
    alpha1: f64,
) -> Result<[f64; 3]> {
    let x4 = surface_x4(x1, x2, x3, c1, c2, alpha1);
    let state = StateVector::new(x1, x2, x3, x4);
    let terms = crane_terms(&state, p);
    let u = sliding_equivalent_control(&state, &terms, c1, c2, alpha1)?;
    Ok([x2, terms.f1 + terms.b1 * u, x4])
}

/// `x4` implied by `S = 0` with `alpha2 = 1`.
pub fn surface_x4(x1: f64, x2: f64, x3: f64, c1: f64, c2: f64, alpha1: f64) -> f64 {
    -c2 * x3 - alpha1 * (x2 + c1 * x1)
}

/// Equivalent control keeping `S = 0` (alpha2 = 1), with the `c2 x4` term
/// already eliminated through the surface relation. `terms` must be evaluated
/// at `state`.
pub(crate) fn sliding_equivalent_control(
    state: &StateVector,
    terms: &PlantTerms,
    c1: f64,
    c2: f64,
    alpha1: f64,
) -> Result<f64> {
    let den = terms.b2 + alpha1 * terms.b1;
    crate::control::guard(den, crate::error::Denominator::SlidingSurface)?;
    let num =
        alpha1 * terms.f1 + terms.f2 - c1 * c2 * alpha1 * state.x1 + alpha1 * (c1 - c2) * state.x2 - c2 * c2 * state.x3;
    Ok(-num / den)
}
