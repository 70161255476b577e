//! Adaptive Dormand–Prince 5(4) integration for piecewise-continuous
//! right-hand sides, with divergence guarding.
//!
//! The step controller accepts a step when the max-norm of the embedded
//! error estimate, weighted by `atol + rtol * max(|y_n|, |y_{n+1}|)`, is at
//! most one. Every accepted step is recorded. Stepping is deterministic.

use crate::error::{Denominator, Error, Result};

/// Dormand–Prince 5(4) tableau (FSAL, seven stages).
pub mod tableau {
    pub const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

    pub const A: [[f64; 6]; 7] = [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];

    /// Fifth-order weights (identical to the last row of `A`).
    pub const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];

    /// Fourth-order embedded weights.
    pub const B4: [f64; 7] =
        [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub t_end: f64,
    /// Abort once the max-norm of the state exceeds this value.
    pub diverge_norm: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rtol: 1e-3, atol: 1e-4, h_init: 1e-3, h_min: 1e-12, h_max: 1e-2, t_end: 10.0, diverge_norm: 1e6 }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.h_min > 0.0
            && self.h_min <= self.h_init
            && self.h_init <= self.h_max
            && self.rtol > 0.0
            && self.atol > 0.0
            && self.diverge_norm > 0.0
            && self.t_end >= 0.0
            && self.t_end.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("invalid integrator settings: {self:?}")))
        }
    }

    pub fn with_tolerances(self, rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..self }
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Status {
    Completed,
    Diverged { t: f64 },
    SingularGain { t: f64, which: Denominator },
    StepUnderflow { t: f64 },
}

impl Status {
    pub fn is_completed(&self) -> bool {
        matches!(self, Status::Completed)
    }

    pub fn time(&self) -> Option<f64> {
        match *self {
            Status::Completed => None,
            Status::Diverged { t } | Status::SingularGain { t, .. } | Status::StepUnderflow { t } => Some(t),
        }
    }

    /// Compact token used in CSV output, e.g. `singular_gain:b2`.
    pub fn token(&self) -> String {
        match self {
            Status::Completed => "completed".into(),
            Status::Diverged { .. } => "diverged".into(),
            Status::SingularGain { which, .. } => format!("singular_gain:{which}"),
            Status::StepUnderflow { .. } => "step_underflow".into(),
        }
    }

    /// Inverse of [`Status::token`]; `t` is the termination time.
    pub fn from_token(token: &str, t: f64) -> Option<Self> {
        match token {
            "completed" => Some(Status::Completed),
            "diverged" => Some(Status::Diverged { t }),
            "step_underflow" => Some(Status::StepUnderflow { t }),
            _ => {
                let which = token.strip_prefix("singular_gain:")?;
                Some(Status::SingularGain { t, which: Denominator::from_token(which)? })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Accepted samples of an `N`-dimensional integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub status: Status,
    pub stats: StepStats,
}

impl<const N: usize> Solution<N> {
    pub fn last(&self) -> Option<(f64, [f64; N])> {
        Some((*self.times.last()?, *self.states.last()?))
    }
}

/// Max-norm with NaN mapped to infinity.
fn max_norm<const N: usize>(y: &[f64; N]) -> f64 {
    y.iter().fold(0.0_f64, |m, v| if v.is_nan() { f64::INFINITY } else { m.max(v.abs()) })
}

struct Step<const N: usize> {
    y: [f64; N],
    err: [f64; N],
    k_last: [f64; N],
}

fn dopri_step<const N: usize, F>(rhs: &mut F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> Result<Step<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    use tableau::{A, B4, B5, C};
    let mut k = [[0.0; N]; 7];
    k[0] = *k1;
    for s in 1..7 {
        let mut ys = *y;
        for (i, yi) in ys.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..s {
                acc += A[s][j] * k[j][i];
            }
            *yi += h * acc;
        }
        k[s] = rhs(t + C[s] * h, &ys)?;
    }
    let mut y_new = *y;
    let mut err = [0.0; N];
    for i in 0..N {
        let mut hi = 0.0;
        let mut lo = 0.0;
        for s in 0..7 {
            hi += B5[s] * k[s][i];
            lo += B4[s] * k[s][i];
        }
        y_new[i] += h * hi;
        err[i] = h * (hi - lo);
    }
    Ok(Step { y: y_new, err, k_last: k[6] })
}

fn terminal_status(err: Error, t: f64) -> Result<Status> {
    match err {
        Error::SingularGain { which, .. } => Ok(Status::SingularGain { t, which }),
        other => Err(other),
    }
}

/// Integrates `rhs` from `t = 0` to `cfg.t_end`.
///
/// Returns `Err` only for invalid configuration or for errors from `rhs`
/// other than [`Error::SingularGain`], which terminates the run with the
/// matching [`Status`]. A zero horizon yields an empty solution.
pub fn integrate<const N: usize, F>(mut rhs: F, y0: [f64; N], cfg: &IntegratorConfig) -> Result<Solution<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    cfg.validate()?;
    let mut sol =
        Solution { times: Vec::new(), states: Vec::new(), status: Status::Completed, stats: StepStats::default() };
    if cfg.t_end == 0.0 {
        return Ok(sol);
    }
    sol.times.push(0.0);
    sol.states.push(y0);
    if max_norm(&y0) > cfg.diverge_norm {
        sol.status = Status::Diverged { t: 0.0 };
        return Ok(sol);
    }

    const SAFETY: f64 = 0.9;
    const MIN_FACTOR: f64 = 0.2;
    const MAX_FACTOR: f64 = 5.0;

    let mut t = 0.0;
    let mut y = y0;
    let mut h = cfg.h_init;
    let mut k1 = match rhs(t, &y) {
        Ok(k) => k,
        Err(e) => {
            sol.status = terminal_status(e, t)?;
            return Ok(sol);
        }
    };
    sol.stats.evaluations += 1;
    let mut last_rejected = false;

    while t < cfg.t_end {
        // Do not leave a sliver shorter than h_min before t_end.
        let remaining = cfg.t_end - t;
        let h_try = if remaining <= h || remaining - h < cfg.h_min { remaining } else { h };

        let step = match dopri_step(&mut rhs, t, &y, &k1, h_try) {
            Ok(s) => s,
            Err(e) => {
                sol.status = terminal_status(e, t)?;
                return Ok(sol);
            }
        };
        sol.stats.evaluations += 6;

        let mut err_norm = 0.0_f64;
        for ((yo, yn), err) in y.iter().zip(&step.y).zip(&step.err) {
            let sc = cfg.atol + cfg.rtol * yo.abs().max(yn.abs());
            let e = (err / sc).abs();
            err_norm = if e.is_nan() { f64::INFINITY } else { err_norm.max(e) };
        }

        if err_norm <= 1.0 {
            t = if h_try == remaining { cfg.t_end } else { t + h_try };
            y = step.y;
            k1 = step.k_last;
            sol.stats.accepted += 1;
            sol.times.push(t);
            sol.states.push(y);
            if max_norm(&y) > cfg.diverge_norm {
                sol.status = Status::Diverged { t };
                return Ok(sol);
            }
            let factor =
                if err_norm == 0.0 { MAX_FACTOR } else { (SAFETY * err_norm.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR) };
            let factor = if last_rejected { factor.min(1.0) } else { factor };
            h = (h_try * factor).clamp(cfg.h_min, cfg.h_max);
            last_rejected = false;
        } else {
            sol.stats.rejected += 1;
            if h_try <= cfg.h_min {
                sol.status = Status::StepUnderflow { t };
                return Ok(sol);
            }
            let factor = if err_norm.is_finite() { (SAFETY * err_norm.powf(-0.2)).max(MIN_FACTOR) } else { MIN_FACTOR };
            h = (h_try * factor).max(cfg.h_min);
            last_rejected = true;
        }
    }
    Ok(sol)
}

/// Fixed-step Dormand–Prince (fifth-order solution), `steps` steps of size `h`.
pub fn integrate_fixed<const N: usize, F>(mut rhs: F, y0: [f64; N], h: f64, steps: usize) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut y = y0;
    let mut t = 0.0;
    let mut k1 = rhs(t, &y)?;
    for _ in 0..steps {
        let s = dopri_step(&mut rhs, t, &y, &k1, h)?;
        y = s.y;
        k1 = s.k_last;
        t += h;
    }
    Ok(y)
}

/// Observed convergence order of the fixed-step scheme on the harmonic
/// oscillator `x'' = -x` over `[0, t_end]`, comparing step `h` with `h / 2`.
pub fn observed_order(h: f64, t_end: f64) -> f64 {
    let error = |h: f64| {
        let steps = (t_end / h).round() as usize;
        let y = integrate_fixed(|_, y: &[f64; 2]| Ok([y[1], -y[0]]), [1.0, 0.0], h, steps).expect("smooth rhs");
        let t = steps as f64 * h;
        ((y[0] - t.cos()).powi(2) + (y[1] + t.sin()).powi(2)).sqrt()
    };
    (error(h) / error(h / 2.0)).log2()
}

/// Observed order with the reference settings (`h = 0.01` vs `0.005`).
pub fn step_order_check() -> f64 {
    observed_order(0.01, 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::{asymptotic_pendulum_derivative, pendulum_energy, CraneParams};
    use approx::assert_abs_diff_eq;

    fn tight(t_end: f64) -> IntegratorConfig {
        IntegratorConfig { rtol: 1e-9, atol: 1e-12, h_max: 0.1, t_end, ..Default::default() }
    }

    #[test]
    fn tableau_is_consistent() {
        use tableau::*;
        for s in 0..7 {
            let row: f64 = A[s].iter().sum();
            assert_abs_diff_eq!(row, C[s], epsilon = 1e-15);
        }
        assert_abs_diff_eq!(B5.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(B4.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_rhs_is_constant() {
        let sol =
            integrate(|_, _: &[f64; 4]| Ok([0.0; 4]), [1.0, 2.0, 3.0, 4.0], &IntegratorConfig::default()).unwrap();
        assert_eq!(sol.status, Status::Completed);
        assert!(sol.states.iter().all(|y| *y == [1.0, 2.0, 3.0, 4.0]));
        assert_eq!(*sol.times.last().unwrap(), 10.0);
    }

    #[test]
    fn exponential_decay() {
        let sol = integrate(|_, y: &[f64; 1]| Ok([-y[0]]), [1.0], &tight(1.0)).unwrap();
        let (t, y) = sol.last().unwrap();
        assert_eq!(t, 1.0);
        assert_abs_diff_eq!(y[0], (-1.0f64).exp(), epsilon = 1e-7);
        assert!(sol.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn pendulum_energy_is_conserved() {
        let p = CraneParams::default();
        let sol = integrate(
            |_, y: &[f64; 2]| {
                let (a, b) = asymptotic_pendulum_derivative(y[0], y[1], &p);
                Ok([a, b])
            },
            [0.5, 0.0],
            &tight(10.0),
        )
        .unwrap();
        let v0 = pendulum_energy(0.5, 0.0, &p);
        let drift = sol.states.iter().map(|y| (pendulum_energy(y[0], y[1], &p) - v0).abs()).fold(0.0, f64::max);
        assert!(drift <= 1e-6 * v0.max(1.0), "drift {drift}");
    }

    #[test]
    fn fifth_order_convergence() {
        let order = step_order_check();
        assert!((4.5..=5.5).contains(&order), "order {order}");
    }

    #[test]
    fn linear_system_matches_matrix_exponential() {
        // A = [[-1, 2], [0, -3]] has eigenvalues -1, -3; exp(At) y0 in closed form.
        let sol = integrate(|_, y: &[f64; 2]| Ok([-y[0] + 2.0 * y[1], -3.0 * y[1]]), [1.0, 1.0], &tight(2.0)).unwrap();
        let (t, y) = sol.last().unwrap();
        let x2 = (-3.0 * t).exp();
        let x1 = (-t).exp() + ((-t).exp() - (-3.0 * t).exp());
        assert!((y[0] - x1).abs() <= 1e-8 * x1.abs());
        assert!((y[1] - x2).abs() <= 1e-8 * x2.abs());
    }

    #[test]
    fn tighter_tolerance_never_hurts_smooth_problems() {
        let mut prev = f64::INFINITY;
        for k in 3..10 {
            let cfg = IntegratorConfig {
                rtol: 10f64.powi(-k),
                atol: 10f64.powi(-k - 3),
                h_max: 1.0,
                t_end: 5.0,
                ..Default::default()
            };
            let sol = integrate(|_, y: &[f64; 2]| Ok([y[1], -y[0]]), [1.0, 0.0], &cfg).unwrap();
            let (t, y) = sol.last().unwrap();
            let err = (y[0] - t.cos()).abs().max((y[1] + t.sin()).abs());
            assert!(err <= prev * 1.0001, "rtol 1e-{k}: {err} > {prev}");
            prev = err;
        }
    }

    #[test]
    fn discontinuous_rhs_shrinks_step_without_failing() {
        let cfg = IntegratorConfig { t_end: 2.0, ..Default::default() };
        let sol = integrate(|_, y: &[f64; 1]| Ok([-crate::control::sign(y[0] - 0.5)]), [1.0], &cfg).unwrap();
        assert_eq!(sol.status, Status::Completed);
        let min_h = sol.times.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        // Accepted steps straddling the switch are well below the cap.
        assert!(min_h < 0.5 * cfg.h_max, "min step {min_h}");
        let tail = sol.times.iter().zip(&sol.states).filter(|(t, _)| **t > 1.0);
        for (_, y) in tail {
            assert!((y[0] - 0.5).abs() < 2e-3, "chatter amplitude {}", y[0] - 0.5);
        }
    }

    #[test]
    fn divergence_guard() {
        let cfg = IntegratorConfig { diverge_norm: 100.0, h_max: 0.1, ..Default::default() };
        let sol = integrate(|_, y: &[f64; 1]| Ok([y[0]]), [1.0], &cfg).unwrap();
        match sol.status {
            Status::Diverged { t } => assert!(t > 4.0 && t < 5.0, "t = {t}"),
            s => panic!("unexpected {s:?}"),
        }
    }

    #[test]
    fn singular_gain_terminates_run() {
        let sol = integrate(
            |t, y: &[f64; 1]| {
                if t > 0.5 {
                    Err(Error::SingularGain { which: Denominator::B2, value: 0.0 })
                } else {
                    Ok([y[0]])
                }
            },
            [1.0],
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!(matches!(sol.status, Status::SingularGain { which: Denominator::B2, t } if t <= 0.5));
    }

    #[test]
    fn step_underflow_reported() {
        // A rhs whose local error cannot be reduced below the tolerance.
        let cfg = IntegratorConfig { h_min: 1e-3, h_init: 1e-3, ..Default::default() };
        let sol = integrate(|t, _: &[f64; 1]| Ok([1e9 * (1e5 * t).sin()]), [0.0], &cfg).unwrap();
        assert!(matches!(sol.status, Status::StepUnderflow { .. }), "{:?}", sol.status);
    }

    #[test]
    fn zero_horizon_is_empty() {
        let cfg = IntegratorConfig { t_end: 0.0, ..Default::default() };
        let sol = integrate(|_, y: &[f64; 1]| Ok(*y), [1.0], &cfg).unwrap();
        assert!(sol.times.is_empty());
        assert_eq!(sol.status, Status::Completed);
    }

    #[test]
    fn runs_are_deterministic() {
        let f = |_: f64, y: &[f64; 2]| Ok([y[1], -crate::control::sign(y[0]) - 0.3 * y[1]]);
        let a = integrate(f, [1.0, 0.0], &IntegratorConfig::default()).unwrap();
        let b = integrate(f, [1.0, 0.0], &IntegratorConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn status_tokens_round_trip() {
        for s in [
            Status::Completed,
            Status::Diverged { t: 1.5 },
            Status::StepUnderflow { t: 2.0 },
            Status::SingularGain { t: 3.0, which: Denominator::Aggregated },
        ] {
            assert_eq!(Status::from_token(&s.token(), s.time().unwrap_or(0.0)), Some(s));
        }
    }
}
