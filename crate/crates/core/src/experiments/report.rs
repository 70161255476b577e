use std::fmt;

use nalgebra::DMatrix;

use super::scenario::{run_scenario, ControllerSpec, CoupledBase, MetricKind, PlantSpec, Scenario};
use crate::design::{
    sliding_char_coeffs, sliding_linearization, solve_surface_params, LinearizationConstants, SurfaceDesign,
};
use crate::error::{Error, Result};
use crate::ode::IntegratorConfig;
use crate::plant::{CraneParams, StateVector};
use crate::poly::{hurwitz_check, C64};
use crate::trajectory::Trajectory;
use crate::{linalg, IhssmcParams};

/// Result of a sliding-surface design for the crane.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignReport {
    pub design: SurfaceDesign,
    pub a2: DMatrix<f64>,
    pub eigenvalues: Vec<C64>,
    /// `None` when the Routh array is degenerate.
    pub stable: Option<bool>,
    /// Max relative deviation of the achieved `(l1, l2, l3)` from `(d1, d2, d3)`.
    pub residual: f64,
}

pub fn design_report(d1: f64, d2: f64, d3: f64) -> Result<DesignReport> {
    design_report_for(&CraneParams::default(), d1, d2, d3)
}

pub fn design_report_for(p: &CraneParams, d1: f64, d2: f64, d3: f64) -> Result<DesignReport> {
    if ![d1, d2, d3].iter().all(|v| v.is_finite()) {
        return Err(Error::Config("design coefficients must be finite".into()));
    }
    let lc = LinearizationConstants::from(p);
    let design = solve_surface_params(&lc, d1, d2, d3)?;
    let a2 = sliding_linearization(&lc, design.c1, design.c2, design.alpha1)?;
    let eigenvalues = linalg::eigenvalues(&a2)?;
    let l = sliding_char_coeffs(&lc, design.c1, design.c2, design.alpha1)?;
    let stable = match hurwitz_check(&l.monic()) {
        Ok(v) => Some(v),
        Err(Error::DegenerateRouth { .. }) => None,
        Err(e) => return Err(e),
    };
    let residual = [(l.l1, d1), (l.l2, d2), (l.l3, d3)]
        .iter()
        .map(|(got, want)| (got - want).abs() / want.abs().max(1e-300))
        .fold(0.0, f64::max);
    Ok(DesignReport { design, a2, eigenvalues, stable, residual })
}

fn fmt_complex(z: &C64) -> String {
    if z.im == 0.0 {
        format!("{:.6}", z.re)
    } else {
        format!("{:.6}{:+.6}i", z.re, z.im)
    }
}

impl fmt::Display for DesignReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = &self.design;
        writeln!(f, "d1 = {}", d.d1)?;
        writeln!(f, "d2 = {}", d.d2)?;
        writeln!(f, "d3 = {}", d.d3)?;
        writeln!(f, "c1 = {:.6}", d.c1)?;
        writeln!(f, "c2 = {:.6}", d.c2)?;
        writeln!(f, "alpha1 = {:.6}", d.alpha1)?;
        for r in 0..3 {
            let row: Vec<String> = (0..3).map(|c| format!("{:.6}", self.a2[(r, c)])).collect();
            writeln!(f, "a2_row{} = {}", r + 1, row.join(", "))?;
        }
        let ev: Vec<String> = self.eigenvalues.iter().map(fmt_complex).collect();
        writeln!(f, "eigenvalues = {}", ev.join(", "))?;
        let verdict = match self.stable {
            Some(true) => "stable",
            Some(false) => "unstable",
            None => "indeterminate",
        };
        writeln!(f, "hurwitz = {verdict}")?;
        writeln!(f, "round_trip_residual = {:.3e}", self.residual)
    }
}

/// Drift of the conserved offsets of a coupled-pair run.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleReport {
    pub k: f64,
    /// Max `|(x1 - k x3)(t) - (x1 - k x3)(0)|`.
    pub offset_drift: f64,
    /// Max `|(x2 - k x4)(t) - (x2 - k x4)(0)|`.
    pub velocity_offset_drift: f64,
    /// `min_t max(|x1(t)|, |x3(t)|)`.
    pub min_joint_magnitude: f64,
    pub trajectory: Trajectory,
}

impl fmt::Display for CounterexampleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "k = {}", self.k)?;
        writeln!(f, "offset_drift = {:.3e}", self.offset_drift)?;
        writeln!(f, "velocity_offset_drift = {:.3e}", self.velocity_offset_drift)?;
        writeln!(f, "min_max_abs_x1_x3 = {:.9}", self.min_joint_magnitude)?;
        writeln!(f, "status = {}", self.trajectory.status.token())
    }
}

/// Input applied to the coupled plant: an open-loop profile name
/// (`zero`, `sin`, `cos`, `const:<v>`) or `ihssmc` for the incremental
/// sliding-mode law regulating to the origin.
pub fn counterexample_controller(profile: &str) -> Result<ControllerSpec> {
    if profile == "ihssmc" {
        return Ok(ControllerSpec::Ihssmc(IhssmcParams { x_d: 0.0, ..Default::default() }));
    }
    Ok(ControllerSpec::OpenLoop(profile.parse()?))
}

pub fn run_counterexample(
    k: f64,
    y0: StateVector,
    profile: &str,
    base: CoupledBase,
    cfg: &IntegratorConfig,
) -> Result<CounterexampleReport> {
    if k == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    let scenario =
        Scenario::new("counterexample", PlantSpec::CoupledPair { k, base }, counterexample_controller(profile)?)
            .with_y0(y0)
            .with_integrator(*cfg)
            .with_metrics(&[MetricKind::FinalError]);
    let (trajectory, _) = run_scenario(&scenario)?;
    let pos0 = y0.x1 - k * y0.x3;
    let vel0 = y0.x2 - k * y0.x4;
    let mut offset_drift = 0.0_f64;
    let mut velocity_offset_drift = 0.0_f64;
    let mut min_joint_magnitude = f64::INFINITY;
    for s in &trajectory.states {
        offset_drift = offset_drift.max((s.x1 - k * s.x3 - pos0).abs());
        velocity_offset_drift = velocity_offset_drift.max((s.x2 - k * s.x4 - vel0).abs());
        min_joint_magnitude = min_joint_magnitude.min(s.x1.abs().max(s.x3.abs()));
    }
    Ok(CounterexampleReport { k, offset_drift, velocity_offset_drift, min_joint_magnitude, trajectory })
}
