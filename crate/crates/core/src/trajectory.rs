use crate::control::SurfaceValues;
use crate::ode::{Status, StepStats};
use crate::plant::StateVector;

/// Recorded closed-loop run: one entry per accepted integration step,
/// starting with the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub controls: Vec<f64>,
    /// `None` for open-loop runs.
    pub surfaces: Vec<Option<SurfaceValues>>,
    pub status: Status,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn empty() -> Self {
        Self {
            times: Vec::new(),
            states: Vec::new(),
            controls: Vec::new(),
            surfaces: Vec::new(),
            status: Status::Completed,
            stats: StepStats::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> Option<f64> {
        self.times.last().copied()
    }

    pub fn final_state(&self) -> Option<StateVector> {
        self.states.last().copied()
    }

    pub fn has_surfaces(&self) -> bool {
        self.surfaces.iter().any(Option::is_some)
    }

    /// Largest `|f(state)|` over samples with `t0 <= t <= t1`, or `None` when
    /// the window holds no samples.
    pub fn window_max_abs(&self, t0: f64, t1: f64, f: impl Fn(&StateVector) -> f64) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.states)
            .filter(|(t, _)| **t >= t0 && **t <= t1)
            .map(|(_, s)| f(s).abs())
            .reduce(f64::max)
    }

    /// Earliest sample time after which `|surface(sv)| <= tol` for every
    /// remaining sample.
    pub fn settle_time(&self, tol: f64, surface: impl Fn(&SurfaceValues) -> f64) -> Option<f64> {
        let mut settle = None;
        for (t, sv) in self.times.iter().zip(&self.surfaces) {
            let sv = sv.as_ref()?;
            if surface(sv).abs() <= tol {
                settle.get_or_insert(*t);
            } else {
                settle = None;
            }
        }
        settle
    }

    /// Index of the first sample at which the outermost surface has changed
    /// sign relative to the initial sample (or reached zero).
    pub fn first_surface_crossing(&self) -> Option<usize> {
        let s0 = self.surfaces.first()?.as_ref()?.s3;
        self.surfaces.iter().position(|sv| sv.is_some_and(|sv| sv.s3 == 0.0 || sv.s3.signum() != s0.signum()))
    }
}
