//! Verification lab for hierarchical sliding-mode controllers on
//! underactuated two-chain plants.
//!
//! The crate provides the plant models (overhead crane, Pendubot and the
//! coupled counterexample family), the incremental and aggregated
//! sliding-mode laws, an adaptive Dormand–Prince integrator, small-matrix
//! design routines (Ackermann, characteristic polynomials, Routh–Hurwitz,
//! sliding-surface parameter design) and a scenario runner that reproduces
//! the standard crane experiments.

pub mod control;
pub mod design;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod ode;
pub mod plant;
pub mod poly;
pub mod trajectory;

pub use control::{AhssmcParams, IhssmcParams, LinearGain, SurfaceValues};
pub use error::{Denominator, Error, Result};
pub use ode::{IntegratorConfig, Status};
pub use plant::{CraneParams, PlantTerms, StateVector};
pub use trajectory::Trajectory;
