//! Thin bridge to `faer` for the dense factorizations the estimators need.
//!
//! All calls run with sequential parallelism so results are bit-reproducible
//! regardless of how many worker threads the caller uses.

use faer::{Mat, MatRef};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::ComplexMatrix;

fn to_faer(m: &ComplexMatrix) -> Mat<Complex64> {
    Mat::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

fn from_faer(m: MatRef<'_, Complex64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn check_finite(m: &ComplexMatrix) -> Result<()> {
    if m.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite("matrix"))
    }
}

/// Thin SVD `m = U diag(s) Vᴴ` with `s` sorted nonincreasing.
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

pub fn thin_svd(m: &ComplexMatrix) -> Result<Svd> {
    check_finite(m)?;
    let svd = to_faer(m)
        .thin_svd()
        .map_err(|e| Error::Linalg(format!("svd: {e:?}")))?;
    let s = svd.S().column_vector().iter().map(|z| z.re).collect();
    Ok(Svd {
        u: from_faer(svd.U()),
        s,
        v: from_faer(svd.V()),
    })
}

pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_finite(m)?;
    to_faer(m)
        .singular_values()
        .map_err(|e| Error::Linalg(format!("svd: {e:?}")))
}

/// Moore–Penrose pseudoinverse; singular values below `rel_floor · σ_max` are
/// treated as zero.
pub fn pinv(m: &ComplexMatrix, rel_floor: f64) -> Result<ComplexMatrix> {
    let Svd { u, s, v } = thin_svd(m)?;
    let cutoff = s.first().copied().unwrap_or(0.0) * rel_floor;
    let mut out = ComplexMatrix::zeros(m.cols(), m.rows());
    for (k, &sk) in s.iter().enumerate() {
        if sk <= cutoff || sk == 0.0 {
            continue;
        }
        let inv = 1.0 / sk;
        for j in 0..m.rows() {
            let w = u[(j, k)].conj() * inv;
            for i in 0..m.cols() {
                out[(i, j)] += v[(i, k)] * w;
            }
        }
    }
    Ok(out)
}

/// Eigenvalues of a general square complex matrix.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    check_finite(m)?;
    if m.rows() != m.cols() {
        return Err(Error::ShapeMismatch("eigenvalues of non-square matrix".into()));
    }
    if m.rows() == 0 {
        return Ok(Vec::new());
    }
    to_faer(m)
        .eigenvalues()
        .map_err(|e| Error::Linalg(format!("evd: {e:?}")))
}

/// Dominant left singular vector of `m`.
pub fn dominant_left_singular_vector(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let svd = thin_svd(m)?;
    Ok(svd.u.column(0).to_vec())
}

/// The first `k` left singular vectors, as columns.
pub fn leading_left_singular_vectors(m: &ComplexMatrix, k: usize) -> Result<ComplexMatrix> {
    let svd = thin_svd(m)?;
    let k = k.min(svd.u.cols());
    let cols: Vec<Vec<Complex64>> = (0..k).map(|j| svd.u.column(j).to_vec()).collect();
    ComplexMatrix::from_columns(&cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        a.data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn svd_reconstructs() {
        let m = random(5, 8, 1);
        let Svd { u, s, v } = thin_svd(&m).unwrap();
        let us = ComplexMatrix::from_fn(u.rows(), u.cols(), |i, j| u[(i, j)] * s[j]);
        let back = us.matmul(&v.adjoint()).unwrap();
        assert!(max_abs_diff(&back, &m) < 1e-13);
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn pinv_satisfies_penrose_identity() {
        let m = random(6, 3, 2);
        let p = pinv(&m, 1e-12).unwrap();
        let mpm = m.matmul(&p).unwrap().matmul(&m).unwrap();
        assert!(max_abs_diff(&mpm, &m) < 1e-12);
    }

    #[test]
    fn pinv_floors_tiny_singular_values() {
        let d = ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => Complex64::new(1.0, 0.0),
            (1, 1) => Complex64::new(1e-14, 0.0),
            _ => Complex64::new(0.0, 0.0),
        });
        let p = pinv(&d, 1e-12).unwrap();
        assert_eq!(p[(1, 1)], Complex64::new(0.0, 0.0));
        assert!((p[(0, 0)] - 1.0).norm() < 1e-15);
    }

    #[test]
    fn eigenvalues_of_companion_are_roots() {
        // z^2 - 3z + 2 = (z-1)(z-2); companion with last column -[2, -3]
        let c = ComplexMatrix::from_rows(&[
            vec![Complex64::new(0.0, 0.0), Complex64::new(-2.0, 0.0)],
            vec![Complex64::new(1.0, 0.0), Complex64::new(3.0, 0.0)],
        ])
        .unwrap();
        let mut ev: Vec<f64> = eigenvalues(&c).unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn non_finite_is_rejected() {
        let mut m = random(2, 2, 3);
        m[(0, 1)] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(thin_svd(&m), Err(Error::NonFinite(_))));
    }
}
