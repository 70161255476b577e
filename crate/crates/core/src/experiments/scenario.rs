use std::fmt;
use std::str::FromStr;

use crate::control::{
    ahssmc_control, ahssmc_surfaces, ihssmc_control, ihssmc_surfaces, linear_feedback, AhssmcParams, IhssmcParams,
    LinearGain, SurfaceValues,
};
use crate::design::{crane_linearization, solve_surface_params, LinearizationConstants, SurfaceDesign};
use crate::error::{Error, Result};
use crate::linalg::ackermann_gain;
use crate::ode::{integrate, IntegratorConfig, Status};
use crate::plant::{
    asymptotic_pendulum_derivative, coupled_pair_terms, crane_terms, pendulum_energy, CraneParams, PlantTerms,
    StateVector, DEGENERATE_PENDUBOT_TERMS,
};
use crate::poly::C64;
use crate::trajectory::Trajectory;

/// Threshold on `|s1|` used by the settle-time metric.
pub const SETTLE_TOL: f64 = 1e-2;

/// Unactuated-chain terms feeding the coupled counterexample plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoupledBase {
    /// `f2 = 0`, `b2 = -1`.
    Degenerate,
    /// Swing terms of a crane.
    Crane(CraneParams),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlantSpec {
    Crane(CraneParams),
    DegeneratePendubot,
    CoupledPair {
        k: f64,
        base: CoupledBase,
    },
    /// Unforced swing `(x3, x4)`; the cart states stay frozen.
    Pendulum(CraneParams),
}

impl PlantSpec {
    pub fn name(&self) -> &'static str {
        match self {
            PlantSpec::Crane(_) => "crane",
            PlantSpec::DegeneratePendubot => "degenerate_pendubot",
            PlantSpec::CoupledPair { .. } => "coupled",
            PlantSpec::Pendulum(_) => "pendulum",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PlantSpec::Crane(p) | PlantSpec::Pendulum(p) => p.validate(),
            PlantSpec::DegeneratePendubot => Ok(()),
            PlantSpec::CoupledPair { k, base } => {
                if *k == 0.0 {
                    return Err(Error::ZeroCoupling);
                }
                match base {
                    CoupledBase::Crane(p) => p.validate(),
                    CoupledBase::Degenerate => Ok(()),
                }
            }
        }
    }

    /// Drift and gain terms, when the plant is in two-chain form.
    pub fn terms(&self, s: &StateVector) -> Option<PlantTerms> {
        match self {
            PlantSpec::Crane(p) => Some(crane_terms(s, p)),
            PlantSpec::DegeneratePendubot => Some(DEGENERATE_PENDUBOT_TERMS),
            PlantSpec::CoupledPair { k, base } => {
                let base = *base;
                coupled_pair_terms(s, *k, move |s| match base {
                    CoupledBase::Degenerate => DEGENERATE_PENDUBOT_TERMS,
                    CoupledBase::Crane(p) => crane_terms(s, &p),
                })
                .ok()
            }
            PlantSpec::Pendulum(_) => None,
        }
    }

    fn derivative(&self, s: &StateVector, u: f64) -> StateVector {
        match self {
            PlantSpec::Pendulum(p) => {
                let (a, b) = asymptotic_pendulum_derivative(s.x3, s.x4, p);
                StateVector::new(0.0, 0.0, a, b)
            }
            _ => self.terms(s).expect("two-chain plant").derivative(s, u),
        }
    }
}

/// Named open-loop input signals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputProfile {
    Zero,
    Sin,
    Cos,
    Constant(f64),
}

impl InputProfile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            InputProfile::Zero => 0.0,
            InputProfile::Sin => t.sin(),
            InputProfile::Cos => t.cos(),
            InputProfile::Constant(c) => c,
        }
    }
}

impl FromStr for InputProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" | "0" => Ok(InputProfile::Zero),
            "sin" => Ok(InputProfile::Sin),
            "cos" => Ok(InputProfile::Cos),
            other => other
                .strip_prefix("const:")
                .and_then(|v| v.trim().parse().ok())
                .map(InputProfile::Constant)
                .ok_or_else(|| Error::Config(format!("unknown input profile `{other}`"))),
        }
    }
}

impl fmt::Display for InputProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputProfile::Zero => f.write_str("zero"),
            InputProfile::Sin => f.write_str("sin"),
            InputProfile::Cos => f.write_str("cos"),
            InputProfile::Constant(c) => write!(f, "const:{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControllerSpec {
    OpenLoop(InputProfile),
    Ihssmc(IhssmcParams),
    Ahssmc(AhssmcParams),
    Linear {
        gain: LinearGain,
        x_d: f64,
    },
    /// Ackermann gain on the crane linearization, resolved when the
    /// scenario is assembled.
    PolePlacement {
        poles: Vec<C64>,
        x_d: f64,
    },
}

impl ControllerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ControllerSpec::OpenLoop(_) => "open_loop",
            ControllerSpec::Ihssmc(_) => "ihssmc",
            ControllerSpec::Ahssmc(_) => "ahssmc",
            ControllerSpec::Linear { .. } | ControllerSpec::PolePlacement { .. } => "linear",
        }
    }
}

/// Controller after pole placement has been resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Law {
    OpenLoop(InputProfile),
    Ihssmc(IhssmcParams),
    Ahssmc(AhssmcParams),
    Linear { gain: LinearGain, x_d: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct ClosedLoop {
    plant: PlantSpec,
    law: Law,
}

impl ClosedLoop {
    fn assemble(plant: &PlantSpec, controller: &ControllerSpec) -> Result<Self> {
        plant.validate()?;
        let law = match controller {
            ControllerSpec::OpenLoop(p) => Law::OpenLoop(*p),
            ControllerSpec::Ihssmc(p) => {
                p.validate()?;
                Law::Ihssmc(*p)
            }
            ControllerSpec::Ahssmc(p) => {
                p.validate()?;
                Law::Ahssmc(*p)
            }
            ControllerSpec::Linear { gain, x_d } => {
                if !gain.is_finite() {
                    return Err(Error::Config("linear gain must be finite".into()));
                }
                Law::Linear { gain: *gain, x_d: *x_d }
            }
            ControllerSpec::PolePlacement { poles, x_d } => {
                let PlantSpec::Crane(p) = plant else {
                    return Err(Error::Config("pole placement is defined for the crane plant only".into()));
                };
                let k = ackermann_gain(&crane_linearization(p), poles)?;
                Law::Linear { gain: LinearGain([k[0], k[1], k[2], k[3]]), x_d: *x_d }
            }
        };
        if matches!(plant, PlantSpec::Pendulum(_)) && !matches!(law, Law::OpenLoop(InputProfile::Zero)) {
            return Err(Error::Config("the pendulum plant accepts only a zero open-loop input".into()));
        }
        Ok(Self { plant: *plant, law })
    }

    fn control(&self, t: f64, s: &StateVector) -> Result<f64> {
        let terms = || self.plant.terms(s).expect("validated two-chain plant");
        Ok(match &self.law {
            Law::OpenLoop(p) => p.value(t),
            Law::Ihssmc(p) => ihssmc_control(s, p, &terms())?,
            Law::Ahssmc(p) => ahssmc_control(s, p, &terms())?,
            Law::Linear { gain, x_d } => linear_feedback(s, gain, *x_d),
        })
    }

    fn surfaces(&self, s: &StateVector) -> Option<SurfaceValues> {
        match &self.law {
            Law::Ihssmc(p) => Some(ihssmc_surfaces(s, p)),
            Law::Ahssmc(p) => Some(ahssmc_surfaces(s, p)),
            _ => None,
        }
    }

    fn target(&self) -> f64 {
        match &self.law {
            Law::OpenLoop(_) => 0.0,
            Law::Ihssmc(p) => p.x_d,
            Law::Ahssmc(p) => p.x_d,
            Law::Linear { x_d, .. } => *x_d,
        }
    }

    fn run(&self, y0: StateVector, cfg: &IntegratorConfig) -> Result<Trajectory> {
        let sol = integrate(
            |t, y: &[f64; 4]| {
                let s = StateVector::from_array(*y);
                let u = self.control(t, &s)?;
                Ok(self.plant.derivative(&s, u).to_array())
            },
            y0.to_array(),
            cfg,
        )?;
        let mut traj = Trajectory::empty();
        traj.status = sol.status;
        traj.stats = sol.stats;
        for (t, y) in sol.times.into_iter().zip(sol.states) {
            let s = StateVector::from_array(y);
            // Surfaces stay defined where the control law is singular.
            let u = self.control(t, &s).unwrap_or(f64::NAN);
            let sv = self.surfaces(&s);
            traj.times.push(t);
            traj.states.push(s);
            traj.controls.push(u);
            traj.surfaces.push(sv);
        }
        Ok(traj)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    FinalError,
    S1SettleTime,
    SwingAmplitudeTail,
    DivergenceTime,
    EnergyDrift,
}

impl MetricKind {
    pub const ALL: [MetricKind; 5] = [
        MetricKind::FinalError,
        MetricKind::S1SettleTime,
        MetricKind::SwingAmplitudeTail,
        MetricKind::DivergenceTime,
        MetricKind::EnergyDrift,
    ];

    pub fn key(&self) -> &'static str {
        match self {
            MetricKind::FinalError => "final_error",
            MetricKind::S1SettleTime => "s1_settle_time",
            MetricKind::SwingAmplitudeTail => "swing_amplitude_tail",
            MetricKind::DivergenceTime => "divergence_time",
            MetricKind::EnergyDrift => "energy_drift",
        }
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricKind::ALL.into_iter().find(|m| m.key() == s).ok_or_else(|| Error::Config(format!("unknown metric `{s}`")))
    }
}

/// Scalar summaries of a run. Unrequested or undefined entries are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricsReport {
    /// Max-norm of the error state at the last sample.
    pub final_error: Option<f64>,
    /// First time after which `|s1| <= 1e-2` holds for the rest of the run.
    pub s1_settle_time: Option<f64>,
    /// Max `|x3|` over the final 20% of the horizon.
    pub swing_amplitude_tail: Option<f64>,
    /// Time at which the divergence guard fired.
    pub divergence_time: Option<f64>,
    /// Max `|V(t) - V(0)|` of the swing energy.
    pub energy_drift: Option<f64>,
}

impl MetricsReport {
    pub fn get(&self, kind: MetricKind) -> Option<f64> {
        match kind {
            MetricKind::FinalError => self.final_error,
            MetricKind::S1SettleTime => self.s1_settle_time,
            MetricKind::SwingAmplitudeTail => self.swing_amplitude_tail,
            MetricKind::DivergenceTime => self.divergence_time,
            MetricKind::EnergyDrift => self.energy_drift,
        }
    }

    /// `key = value` lines for the requested metrics; absent values print `none`.
    pub fn to_text(&self, requested: &[MetricKind]) -> String {
        requested
            .iter()
            .map(|k| match self.get(*k) {
                Some(v) => format!("{} = {v:.9e}\n", k.key()),
                None => format!("{} = none\n", k.key()),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub plant: PlantSpec,
    pub controller: ControllerSpec,
    /// Raw initial state (cart position, not error).
    pub y0: StateVector,
    pub integrator: IntegratorConfig,
    pub metrics: Vec<MetricKind>,
}

impl Scenario {
    pub fn new(name: impl Into<String>, plant: PlantSpec, controller: ControllerSpec) -> Self {
        Self {
            name: name.into(),
            plant,
            controller,
            y0: StateVector::ZERO,
            integrator: IntegratorConfig::default(),
            metrics: MetricKind::ALL.to_vec(),
        }
    }

    pub fn with_y0(mut self, y0: StateVector) -> Self {
        self.y0 = y0;
        self
    }

    pub fn with_integrator(mut self, cfg: IntegratorConfig) -> Self {
        self.integrator = cfg;
        self
    }

    pub fn with_metrics(mut self, metrics: &[MetricKind]) -> Self {
        self.metrics = metrics.to_vec();
        self
    }

    /// Target cart position of the attached controller (zero when open loop).
    pub fn target(&self) -> Result<f64> {
        Ok(ClosedLoop::assemble(&self.plant, &self.controller)?.target())
    }
}

fn compute_metrics(s: &Scenario, traj: &Trajectory, x_d: f64) -> MetricsReport {
    let mut m = MetricsReport::default();
    let t_end = s.integrator.t_end;
    for kind in &s.metrics {
        match kind {
            MetricKind::FinalError => {
                m.final_error = traj.final_state().map(|st| st.to_error(x_d).max_norm());
            }
            MetricKind::S1SettleTime => m.s1_settle_time = traj.settle_time(SETTLE_TOL, |sv| sv.s1),
            MetricKind::SwingAmplitudeTail => {
                let start = 0.8 * t_end;
                if traj.status.is_completed() || traj.final_time().is_some_and(|t| t >= t_end) {
                    m.swing_amplitude_tail = traj.window_max_abs(start, t_end, |st| st.x3);
                }
            }
            MetricKind::DivergenceTime => {
                if let Status::Diverged { t } = traj.status {
                    m.divergence_time = Some(t);
                }
            }
            MetricKind::EnergyDrift => {
                if let PlantSpec::Pendulum(p) = &s.plant {
                    if let Some(first) = traj.states.first() {
                        let v0 = pendulum_energy(first.x3, first.x4, p);
                        m.energy_drift =
                            traj.states.iter().map(|st| (pendulum_energy(st.x3, st.x4, p) - v0).abs()).reduce(f64::max);
                    }
                }
            }
        }
    }
    m
}

/// Assembles the closed loop, integrates it and evaluates the requested
/// metrics. Integration outcomes (divergence, singular gain, step
/// underflow) are reported through the trajectory status, not as errors.
pub fn run_scenario(s: &Scenario) -> Result<(Trajectory, MetricsReport)> {
    let cl = ClosedLoop::assemble(&s.plant, &s.controller)?;
    let traj = cl.run(s.y0, &s.integrator)?;
    let metrics = compute_metrics(s, &traj, cl.target());
    Ok((traj, metrics))
}

/// Pole set used for the linear baseline.
pub const BASELINE_POLES: [f64; 4] = [-3.0, -2.8, -2.6, -2.4];

/// Desired sliding-dynamics polynomial `(s + 5)(s + 4)(s + 3)`.
pub const CORRECTED_SLIDING_POLY: (f64, f64, f64) = (12.0, 47.0, 60.0);

pub const BUILTIN_NAMES: [&str; 7] =
    ["fig_b", "fig_c", "fig_d", "fig_e", "pendulum", "counterexample", "counterexample_ihssmc"];

/// Corrected sliding surface for the default crane.
pub fn corrected_design() -> Result<SurfaceDesign> {
    let (d1, d2, d3) = CORRECTED_SLIDING_POLY;
    solve_surface_params(&LinearizationConstants::from(&CraneParams::default()), d1, d2, d3)
}

pub fn builtin(name: &str) -> Option<Scenario> {
    let crane = CraneParams::default();
    let x_d = crane.x_d;
    let s = match name {
        "fig_b" => Scenario::new(name, PlantSpec::Crane(crane), ControllerSpec::Ihssmc(IhssmcParams::default()))
            .with_metrics(&[MetricKind::FinalError, MetricKind::S1SettleTime, MetricKind::SwingAmplitudeTail]),
        "fig_c" => Scenario::new(
            name,
            PlantSpec::Crane(crane),
            ControllerSpec::PolePlacement { poles: BASELINE_POLES.iter().map(|p| C64::new(*p, 0.0)).collect(), x_d },
        )
        .with_metrics(&[MetricKind::FinalError, MetricKind::SwingAmplitudeTail]),
        "fig_d" => Scenario::new(name, PlantSpec::Crane(crane), ControllerSpec::Ahssmc(AhssmcParams::default()))
            .with_integrator(IntegratorConfig { diverge_norm: 1e3, ..Default::default() })
            .with_metrics(&[MetricKind::FinalError, MetricKind::DivergenceTime]),
        "fig_e" => {
            let design = corrected_design().ok()?;
            let base = AhssmcParams::default();
            Scenario::new(
                name,
                PlantSpec::Crane(crane),
                ControllerSpec::Ahssmc(design.controller(base.eta, base.k, x_d)),
            )
            .with_integrator(IntegratorConfig { diverge_norm: 1e3, ..Default::default() })
            .with_metrics(&[
                MetricKind::FinalError,
                MetricKind::DivergenceTime,
                MetricKind::SwingAmplitudeTail,
            ])
        }
        "pendulum" => Scenario::new(name, PlantSpec::Pendulum(crane), ControllerSpec::OpenLoop(InputProfile::Zero))
            .with_y0(StateVector::new(0.0, 0.0, 0.5, 0.0))
            .with_integrator(IntegratorConfig { rtol: 1e-9, atol: 1e-12, ..Default::default() })
            .with_metrics(&[MetricKind::EnergyDrift]),
        "counterexample" => Scenario::new(
            name,
            PlantSpec::CoupledPair { k: -1.0, base: CoupledBase::Degenerate },
            ControllerSpec::OpenLoop(InputProfile::Sin),
        )
        .with_y0(StateVector::new(1.0, 0.0, 0.0, 0.0))
        .with_metrics(&[MetricKind::FinalError]),
        "counterexample_ihssmc" => Scenario::new(
            name,
            PlantSpec::CoupledPair { k: -1.0, base: CoupledBase::Degenerate },
            ControllerSpec::Ihssmc(IhssmcParams { x_d: 0.0, ..Default::default() }),
        )
        .with_y0(StateVector::new(1.0, 0.0, 0.0, 0.0))
        .with_metrics(&[MetricKind::FinalError, MetricKind::S1SettleTime]),
        _ => return None,
    };
    Some(s)
}

pub fn builtins() -> Vec<Scenario> {
    BUILTIN_NAMES.iter().filter_map(|n| builtin(n)).collect()
}

/// Runs the corrected-surface aggregated controller on the default crane.
pub fn run_fig_e() -> Result<(Trajectory, MetricsReport)> {
    let s = builtin("fig_e").ok_or(Error::SingularDesign("corrected design failed"))?;
    run_scenario(&s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_resolve() {
        assert_eq!(builtins().len(), BUILTIN_NAMES.len());
        assert!(builtin("nope").is_none());
    }

    #[test]
    fn incompatible_combinations_rejected() {
        let s = Scenario::new(
            "bad",
            PlantSpec::Pendulum(CraneParams::default()),
            ControllerSpec::Ihssmc(IhssmcParams::default()),
        );
        assert!(matches!(run_scenario(&s), Err(Error::Config(_))));
        let s = Scenario::new(
            "bad",
            PlantSpec::DegeneratePendubot,
            ControllerSpec::PolePlacement { poles: vec![C64::new(-1.0, 0.0); 4], x_d: 0.0 },
        );
        assert!(matches!(run_scenario(&s), Err(Error::Config(_))));
        let s = Scenario::new(
            "bad",
            PlantSpec::CoupledPair { k: 0.0, base: CoupledBase::Degenerate },
            ControllerSpec::OpenLoop(InputProfile::Sin),
        );
        assert!(matches!(run_scenario(&s), Err(Error::ZeroCoupling)));
    }

    #[test]
    fn input_profiles_parse() {
        assert_eq!("sin".parse::<InputProfile>().unwrap(), InputProfile::Sin);
        assert_eq!("const:2.5".parse::<InputProfile>().unwrap(), InputProfile::Constant(2.5));
        assert!("square".parse::<InputProfile>().is_err());
        for p in [InputProfile::Zero, InputProfile::Cos, InputProfile::Constant(-1.0)] {
            assert_eq!(p.to_string().parse::<InputProfile>().unwrap(), p);
        }
    }

    #[test]
    fn open_loop_zero_input_keeps_rest() {
        let s = Scenario::new("rest", PlantSpec::DegeneratePendubot, ControllerSpec::OpenLoop(InputProfile::Zero))
            .with_y0(StateVector::new(1.0, 0.0, 0.0, 0.0));
        let (traj, m) = run_scenario(&s).unwrap();
        assert!(traj.states.iter().all(|st| *st == StateVector::new(1.0, 0.0, 0.0, 0.0)));
        assert!(!traj.has_surfaces());
        assert_eq!(m.final_error, Some(1.0));
    }
}
