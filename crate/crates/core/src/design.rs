//! Linear design for the crane: the upright-rest linearization used for
//! pole placement, and the linearized dynamics on the aggregated sliding
//! surface together with the parameter solver that makes them Hurwitz.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, LinearPlant};
use crate::plant::CraneParams;
use crate::poly::{self, C64};

/// Small-angle constants of the crane at rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizationConstants {
    /// `m g / M`
    pub a1: f64,
    /// `-(m + M) g / (M L)`
    pub a2: f64,
    /// `1 / M`
    pub b10: f64,
    /// `-1 / (M L)`
    pub b20: f64,
}

impl From<&CraneParams> for LinearizationConstants {
    fn from(p: &CraneParams) -> Self {
        let (mc, m, l, g) = (p.cart_mass, p.payload_mass, p.rope_length, p.gravity);
        Self { a1: m * g / mc, a2: -(m + mc) * g / (mc * l), b10: 1.0 / mc, b20: -1.0 / (mc * l) }
    }
}

/// Linearization of the crane about `(x_d, 0, 0, 0)`.
pub fn crane_linearization(p: &CraneParams) -> LinearPlant {
    let lc = LinearizationConstants::from(p);
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(4, 4, &[
        0.0, 1.0, 0.0,   0.0,
        0.0, 0.0, lc.a1, 0.0,
        0.0, 0.0, 0.0,   1.0,
        0.0, 0.0, lc.a2, 0.0,
    ]);
    let b = DVector::from_vec(vec![0.0, lc.b10, 0.0, lc.b20]);
    LinearPlant::new(a, b).expect("4x4 crane linearization").with_labels(&["x1", "x2", "x3", "x4"])
}

fn surface_ratio(lc: &LinearizationConstants, alpha1: f64) -> Result<f64> {
    let den = lc.b20 + alpha1 * lc.b10;
    crate::control::guard(den, crate::error::Denominator::SlidingSurface)?;
    Ok(lc.b10 / den)
}

/// Linearized dynamics of `(x1, x2, x3)` on `S = 0` (with `alpha2 = 1`).
pub fn sliding_linearization(lc: &LinearizationConstants, c1: f64, c2: f64, alpha1: f64) -> Result<DMatrix<f64>> {
    let r = surface_ratio(lc, alpha1)?;
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(3, 3, &[
        0.0,                  1.0,                        0.0,
        r * c1 * c2 * alpha1, -r * alpha1 * (c1 - c2),    lc.a1 - r * (lc.a2 + alpha1 * lc.a1 - c2 * c2),
        -alpha1 * c1,         -alpha1,                    -c2,
    ]);
    Ok(a)
}

/// `det(sI - A2) = s^3 + l1 s^2 + l2 s + l3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlidingCharCoeffs {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
}

impl SlidingCharCoeffs {
    /// `[1, l1, l2, l3]`
    pub fn monic(&self) -> [f64; 4] {
        [1.0, self.l1, self.l2, self.l3]
    }
}

pub fn sliding_char_coeffs(lc: &LinearizationConstants, c1: f64, c2: f64, alpha1: f64) -> Result<SlidingCharCoeffs> {
    let r = surface_ratio(lc, alpha1)?;
    let den = lc.b20 + alpha1 * lc.b10;
    let l1 = c2 + r * alpha1 * (c1 - c2);
    let l2 = alpha1 / den * (lc.b20 * lc.a1 - lc.b10 * lc.a2);
    Ok(SlidingCharCoeffs { l1, l2, l3: c1 * l2 })
}

/// Surface parameters that give the sliding dynamics a prescribed
/// characteristic polynomial `s^3 + d1 s^2 + d2 s + d3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceDesign {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub c1: f64,
    pub c2: f64,
    pub alpha1: f64,
}

impl SurfaceDesign {
    /// Aggregated controller using this surface with `alpha2 = 1`.
    pub fn controller(&self, eta: f64, k: f64, x_d: f64) -> crate::control::AhssmcParams {
        crate::control::AhssmcParams {
            c1: self.c1,
            c2: self.c2,
            alpha1: self.alpha1,
            alpha2: 1.0,
            eta,
            k,
            x_d,
            boundary_layer: 0.0,
        }
    }
}

/// Solves the coefficient-matching equations for `(c1, c2, alpha1)`.
///
/// The `alpha1` denominator is `b20 a1 - b10 a2 - d2 b10`, which is what the
/// second matching equation yields when solved directly.
pub fn solve_surface_params(lc: &LinearizationConstants, d1: f64, d2: f64, d3: f64) -> Result<SurfaceDesign> {
    const TOL: f64 = 1e-12;
    if d2.abs() < TOL {
        return Err(Error::SingularDesign("d2 = 0 leaves c1 undefined"));
    }
    let c1 = d3 / d2;
    let den = lc.b20 * lc.a1 - lc.b10 * lc.a2 - d2 * lc.b10;
    if den.abs() < TOL * (lc.b20 * lc.a1).abs().max(1.0) {
        return Err(Error::SingularDesign("alpha1 denominator vanishes"));
    }
    let alpha1 = lc.b20 * d2 / den;
    if (lc.b20 + alpha1 * lc.b10).abs() < crate::control::SINGULAR_GAIN_TOL {
        return Err(Error::SingularDesign("b20 + alpha1 b10 vanishes"));
    }
    let c2 = d1 + alpha1 * lc.b10 * (d1 - c1) / lc.b20;
    Ok(SurfaceDesign { d1, d2, d3, c1, c2, alpha1 })
}

/// Eigenvalues of the sliding linearization for the given surface.
pub fn sliding_eigenvalues(lc: &LinearizationConstants, c1: f64, c2: f64, alpha1: f64) -> Result<Vec<C64>> {
    linalg::eigenvalues(&sliding_linearization(lc, c1, c2, alpha1)?)
}

/// Hurwitz verdict for the sliding dynamics of a surface.
pub fn sliding_is_hurwitz(lc: &LinearizationConstants, c1: f64, c2: f64, alpha1: f64) -> Result<bool> {
    poly::hurwitz_check(&sliding_char_coeffs(lc, c1, c2, alpha1)?.monic())
}
