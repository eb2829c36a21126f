//! Harmonic-retrieval building blocks: Vandermonde steering vectors,
//! single-tone ESPRIT, exact maximization of trigonometric-polynomial ratios
//! on the unit circle, and 2-D alternating coordinate ascent built on it.

mod acd;
mod trig;

pub use acd::{acd_2d, AcdConfig, AcdResult, Coordinate};
pub use trig::{eval_on_grid, max_unit_circle, TrigPolyRatio, UnitCircleMax, FALLBACK_GRID, ROOT_BAND};
pub(crate) use trig::grid_angle;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::tensor::{dot_conj, ComplexMatrix};

/// `[1, e^{jω}, …, e^{j(n-1)ω}]`.
pub fn vandermonde(omega: f64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, k as f64 * omega))
        .collect()
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    // rem_euclid can return exactly 2π for tiny negative inputs
    if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

/// Absolute distance between two angles on the circle, in `[0, π]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// Frequency of a single complex exponential by ESPRIT on the Hankel matrix
/// of `v`.
pub fn esprit_tone(v: &[Complex64]) -> Result<f64> {
    let n = v.len();
    if n < 3 {
        return Err(Error::ShapeMismatch(format!(
            "ESPRIT needs at least 3 samples, got {n}"
        )));
    }
    if v.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return Err(Error::ZeroVector("esprit_tone"));
    }
    let m = n.div_ceil(2);
    let hankel = ComplexMatrix::from_fn(m, n - m + 1, |i, j| v[i + j]);
    let u = linalg::dominant_left_singular_vector(&hankel)?;
    let (head, tail) = (&u[..m - 1], &u[1..]);
    let rho = dot_conj(head, tail) / dot_conj(head, head).re;
    Ok(wrap_angle(rho.arg()))
}
