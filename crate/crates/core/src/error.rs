use std::fmt;

use thiserror::Error;

/// Guarded denominators that can make a control law or reduced model ill-posed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Denominator {
    /// `c3_eff * b2 + b1` in the incremental hierarchical law.
    Incremental,
    /// `b1` in the aggregated law's first equivalent control.
    B1,
    /// `b2` in the aggregated law's second equivalent control.
    B2,
    /// `alpha1 * b1 + alpha2 * b2` in the aggregated switching term.
    Aggregated,
    /// `b2 + alpha1 * b1` on the normalized aggregated surface.
    SlidingSurface,
}

impl Denominator {
    pub fn token(self) -> &'static str {
        match self {
            Denominator::Incremental => "c3b2_plus_b1",
            Denominator::B1 => "b1",
            Denominator::B2 => "b2",
            Denominator::Aggregated => "alpha1b1_plus_alpha2b2",
            Denominator::SlidingSurface => "b2_plus_alpha1b1",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        [
            Denominator::Incremental,
            Denominator::B1,
            Denominator::B2,
            Denominator::Aggregated,
            Denominator::SlidingSurface,
        ]
        .into_iter()
        .find(|d| d.token() == token)
    }
}

impl fmt::Display for Denominator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("singular gain: |{which}| = {value:e} is below tolerance")]
    SingularGain { which: Denominator, value: f64 },

    #[error("inertia matrix is singular (det = {det:e})")]
    SingularInertia { det: f64 },

    #[error("coupling constant must be nonzero")]
    ZeroCoupling,

    #[error("pair (A, B) is not controllable (rank {rank} < {n})")]
    Uncontrollable { rank: usize, n: usize },

    #[error("requested poles are not closed under conjugation")]
    PolesNotConjugate,

    #[error("singular surface design: {0}")]
    SingularDesign(&'static str),

    #[error("Routh array has a zero pivot in row {row}; verdict indeterminate")]
    DegenerateRouth { row: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
