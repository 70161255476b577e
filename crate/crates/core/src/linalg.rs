//! Small dense linear algebra for state-space design: characteristic
//! polynomials, eigenvalues, controllability and Ackermann pole placement.

use log::warn;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::poly::{self, C64};

/// Relative pivot threshold used for numerical rank.
pub const RANK_TOL: f64 = 1e-10;

/// Controllability condition estimate above which Ackermann warns.
pub const ACKERMANN_COND_WARN: f64 = 1e8;

/// Linear single-input plant `x' = A x + B u`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPlant {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub labels: Vec<String>,
}

impl LinearPlant {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.len() != n {
            return Err(Error::Dimension(format!("A is {}x{}, B has {} rows", a.nrows(), a.ncols(), b.len())));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite plant entry".into()));
        }
        let labels = (1..=n).map(|i| format!("x{i}")).collect();
        Ok(Self { a, b, labels })
    }

    pub fn with_labels(mut self, labels: &[&str]) -> Self {
        self.labels = labels.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }
}

/// Faddeev–LeVerrier characteristic polynomial `det(sI - A)`, descending
/// coefficients with leading one.
pub fn char_poly(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension("matrix must be square".into()));
    }
    if n > 4 {
        return Err(Error::Dimension(format!("order {n} exceeds 4")));
    }
    let mut coeffs = vec![1.0];
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut c_prev = 1.0;
    for k in 1..=n {
        m = a * &m;
        for i in 0..n {
            m[(i, i)] += c_prev;
        }
        let c = -(a * &m).trace() / k as f64;
        coeffs.push(c);
        c_prev = c;
    }
    Ok(coeffs)
}

/// Eigenvalues of a matrix of order at most four, as roots of its
/// characteristic polynomial.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<C64>> {
    poly::roots(&char_poly(a)?)
}

/// Numerical rank by Gaussian elimination with complete pivoting. Pivots
/// below `RANK_TOL` times the largest pivot count as zero.
pub fn rank(m: &DMatrix<f64>) -> usize {
    let mut w = m.clone();
    let (rows, cols) = w.shape();
    let mut r = 0;
    let mut first_pivot = 0.0_f64;
    while r < rows.min(cols) {
        let mut best = (r, r, 0.0_f64);
        for i in r..rows {
            for j in r..cols {
                if w[(i, j)].abs() > best.2 {
                    best = (i, j, w[(i, j)].abs());
                }
            }
        }
        if r == 0 {
            first_pivot = best.2;
        }
        if best.2 == 0.0 || best.2 <= RANK_TOL * first_pivot {
            break;
        }
        w.swap_rows(r, best.0);
        w.swap_columns(r, best.1);
        let p = w[(r, r)];
        for i in (r + 1)..rows {
            let f = w[(i, r)] / p;
            if f != 0.0 {
                for j in r..cols {
                    w[(i, j)] -= f * w[(r, j)];
                }
            }
        }
        r += 1;
    }
    r
}

/// `[B, AB, ..., A^(n-1) B]`.
pub fn controllability_matrix(plant: &LinearPlant) -> DMatrix<f64> {
    let n = plant.order();
    let mut c = DMatrix::<f64>::zeros(n, n);
    let mut col = plant.b.clone();
    for j in 0..n {
        c.set_column(j, &col);
        col = &plant.a * col;
    }
    c
}

/// Controllability matrix together with the full-rank verdict.
pub fn controllability(plant: &LinearPlant) -> (DMatrix<f64>, bool) {
    let c = controllability_matrix(plant);
    let full = rank(&c) == plant.order();
    (c, full)
}

fn condition_estimate(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Ackermann gain `K = e_n^T C^-1 phi(A)` placing the eigenvalues of
/// `A - B K` at `poles`.
pub fn ackermann_gain(plant: &LinearPlant, poles: &[C64]) -> Result<DVector<f64>> {
    let n = plant.order();
    if poles.len() != n {
        return Err(Error::Dimension(format!("{} poles for order {n}", poles.len())));
    }
    let desired = poly::from_roots(poles)?;
    let (ctrb, full) = controllability(plant);
    if !full {
        return Err(Error::Uncontrollable { rank: rank(&ctrb), n });
    }
    let cond = condition_estimate(&ctrb);
    if cond > ACKERMANN_COND_WARN {
        warn!("controllability matrix is ill-conditioned (cond ~ {cond:.3e}); gain may be inaccurate");
    }

    // phi(A) by Horner.
    let mut phi = DMatrix::<f64>::zeros(n, n);
    for &c in &desired {
        phi = &plant.a * phi;
        for i in 0..n {
            phi[(i, i)] += c;
        }
    }

    // Last row of C^-1: solve C^T w = e_n.
    let mut e_n = DVector::<f64>::zeros(n);
    e_n[n - 1] = 1.0;
    let w = ctrb.transpose().lu().solve(&e_n).ok_or(Error::Uncontrollable { rank: rank(&ctrb), n })?;
    Ok((w.transpose() * phi).transpose())
}

/// `A - B K`.
pub fn closed_loop(plant: &LinearPlant, gain: &DVector<f64>) -> DMatrix<f64> {
    &plant.a - &plant.b * gain.transpose()
}
