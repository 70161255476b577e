//! Monic polynomials of degree at most four: closed-form roots and the
//! Routh–Hurwitz test.
//!
//! Coefficients are stored in descending powers including the leading one,
//! `[1, a1, ..., an]` for `s^n + a1 s^(n-1) + ... + an`.

use nalgebra::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Horner evaluation of a real polynomial at a complex point, with its derivative.
pub fn eval_with_derivative(coeffs: &[f64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn monic(coeffs: &[f64]) -> Result<Vec<f64>> {
    let lead = *coeffs.first().ok_or_else(|| Error::Dimension("empty polynomial".into()))?;
    if lead == 0.0 || !lead.is_finite() {
        return Err(Error::Dimension("leading coefficient must be nonzero".into()));
    }
    Ok(coeffs.iter().map(|c| c / lead).collect())
}

fn quadratic(b: f64, c: f64) -> [C64; 2] {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        let q = -0.5 * (b + if b >= 0.0 { sq } else { -sq });
        if q == 0.0 {
            return [C64::new(0.0, 0.0); 2];
        }
        [C64::new(q, 0.0), C64::new(c / q, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [C64::new(-0.5 * b, im), C64::new(-0.5 * b, -im)]
    }
}

/// `z^2 + b z + c` with complex coefficients.
fn complex_quadratic(b: C64, c: C64) -> [C64; 2] {
    let sq = (b * b - c * 4.0).sqrt();
    let q = if (b.conj() * sq).re >= 0.0 { (b + sq) * -0.5 } else { (b - sq) * -0.5 };
    if q.norm() == 0.0 {
        return [C64::new(0.0, 0.0); 2];
    }
    [q, c / q]
}

/// Roots of `x^3 + a x^2 + b x + c`; real roots have exactly zero imaginary part.
fn cubic(a: f64, b: f64, c: f64) -> [C64; 3] {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if disc < 0.0 {
        // Three distinct real roots; p < 0 here.
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = ((3.0 * q) / (p * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let tau = 2.0 * std::f64::consts::PI / 3.0;
        [0, 1, 2].map(|k| C64::new(r * (phi - tau * k as f64).cos() - shift, 0.0))
    } else {
        let sd = disc.sqrt();
        let w = -q / 2.0 - if q >= 0.0 { sd } else { -sd };
        let u = w.cbrt();
        let v = if u == 0.0 { 0.0 } else { -p / (3.0 * u) };
        let re = -(u + v) / 2.0 - shift;
        let im = (3f64.sqrt() / 2.0) * (u - v);
        [C64::new(u + v - shift, 0.0), C64::new(re, im), C64::new(re, -im)]
    }
}

/// Roots of `x^4 + a x^3 + b x^2 + c x + d` by the resolvent cubic.
fn quartic(a: f64, b: f64, c: f64, d: f64) -> [C64; 4] {
    let shift = a / 4.0;
    let a2 = a * a;
    let p = b - 3.0 * a2 / 8.0;
    let q = c - a * b / 2.0 + a2 * a / 8.0;
    let r = d - a * c / 4.0 + a2 * b / 16.0 - 3.0 * a2 * a2 / 256.0;
    let scale = 1.0 + p.abs() + r.abs().sqrt();

    let ys: [C64; 4] = if q.abs() <= 1e-14 * scale * scale.sqrt() {
        // Biquadratic: y^2 = z with z^2 + p z + r = 0.
        let [z1, z2] = quadratic(p, r);
        let (w1, w2) = (z1.sqrt(), z2.sqrt());
        [w1, -w1, w2, -w2]
    } else {
        // m^3 + p m^2 + (p^2/4 - r) m - q^2/8 = 0 has a positive root.
        let m = cubic(p, p * p / 4.0 - r, -q * q / 8.0)
            .iter()
            .filter(|z| z.im == 0.0)
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
            .max(f64::MIN_POSITIVE);
        let s = (2.0 * m).sqrt();
        let half = p / 2.0 + m;
        let [y1, y2] = complex_quadratic(C64::new(-s, 0.0), C64::new(half + q / (2.0 * s), 0.0));
        let [y3, y4] = complex_quadratic(C64::new(s, 0.0), C64::new(half - q / (2.0 * s), 0.0));
        [y1, y2, y3, y4]
    };
    ys.map(|y| y - shift)
}

fn polish(coeffs: &[f64], z: C64) -> C64 {
    let (p, dp) = eval_with_derivative(coeffs, z);
    if dp.norm() == 0.0 || !p.is_finite() {
        return z;
    }
    let candidate = z - p / dp;
    let (pc, _) = eval_with_derivative(coeffs, candidate);
    if pc.is_finite() && pc.norm() < p.norm() {
        candidate
    } else {
        z
    }
}

/// Roots of a polynomial of degree at most four, each refined by one Newton
/// step and sorted by real then imaginary part. Imaginary parts below
/// `1e-10 * max(1, |z|)` are cleared.
pub fn roots(coeffs: &[f64]) -> Result<Vec<C64>> {
    let c = monic(coeffs)?;
    let raw: Vec<C64> = match c.len() {
        1 => Vec::new(),
        2 => vec![C64::new(-c[1], 0.0)],
        3 => quadratic(c[1], c[2]).to_vec(),
        4 => cubic(c[1], c[2], c[3]).to_vec(),
        5 => quartic(c[1], c[2], c[3], c[4]).to_vec(),
        n => return Err(Error::Dimension(format!("degree {} exceeds 4", n - 1))),
    };
    let mut out: Vec<C64> = raw
        .into_iter()
        .map(|z| {
            let z = polish(&c, z);
            if z.im.abs() <= 1e-10 * z.norm().max(1.0) {
                C64::new(z.re, 0.0)
            } else {
                z
            }
        })
        .collect();
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(out)
}

/// Monic coefficients of `prod (s - r_i)`. Fails if the product is not real.
pub fn from_roots(roots: &[C64]) -> Result<Vec<f64>> {
    let mut c = vec![C64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![C64::new(0.0, 0.0); c.len() + 1];
        for (i, &ci) in c.iter().enumerate() {
            next[i] += ci;
            next[i + 1] -= ci * r;
        }
        c = next;
    }
    let scale = c.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if c.iter().any(|z| z.im.abs() > 1e-9 * scale) {
        return Err(Error::PolesNotConjugate);
    }
    Ok(c.into_iter().map(|z| z.re).collect())
}

/// Routh–Hurwitz verdict for a monic polynomial: `true` iff every root has a
/// negative real part. A vanishing first-column pivot is reported as
/// [`Error::DegenerateRouth`].
pub fn hurwitz_check(coeffs: &[f64]) -> Result<bool> {
    let c = monic(coeffs)?;
    let n = c.len() - 1;
    if n == 0 {
        return Ok(true);
    }
    let scale = c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale;
    let width = n / 2 + 1;
    let row = |start: usize| -> Vec<f64> { (0..width).map(|j| c.get(start + 2 * j).copied().unwrap_or(0.0)).collect() };
    let mut prev = row(0);
    let mut cur = row(1);
    let mut stable = true;
    for r in 1..=n {
        let pivot = cur[0];
        if pivot.abs() <= tol {
            return Err(Error::DegenerateRouth { row: r });
        }
        if pivot < 0.0 {
            stable = false;
        }
        if r == n {
            break;
        }
        let next: Vec<f64> = (0..width)
            .map(|j| {
                let a = prev.get(j + 1).copied().unwrap_or(0.0);
                let b = cur.get(j + 1).copied().unwrap_or(0.0);
                (pivot * a - prev[0] * b) / pivot
            })
            .collect();
        prev = cur;
        cur = next;
    }
    Ok(stable)
}
