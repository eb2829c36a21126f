//! Model-order detection with the Wax–Kailath MDL criterion applied to every
//! mode unfolding.

use crate::error::{Error, Result};
use crate::linalg;
use crate::tensor::{ComplexMatrix, ComplexTensor};

/// Eigenvalues are floored at this fraction of the largest one so that the
/// geometric mean stays defined for exactly rank-deficient inputs.
pub const EIGEN_FLOOR: f64 = 1e-30;

#[derive(Clone, Debug, PartialEq)]
pub struct MdlReport {
    pub per_mode_estimates: Vec<usize>,
    pub l_hat: usize,
    /// Squared singular values divided by the long dimension, per mode.
    pub eigenvalue_profiles: Vec<Vec<f64>>,
}

/// MDL score for every candidate rank `0..p` given the sorted eigenvalue
/// profile of a matrix whose long side has length `n_long`.
pub fn mdl_scores(eigen: &[f64], n_long: usize) -> Vec<f64> {
    let p = eigen.len();
    let n = n_long as f64;
    let lmax = eigen.first().copied().unwrap_or(0.0);
    let floor = lmax * EIGEN_FLOOR;
    let lam: Vec<f64> = eigen.iter().map(|&l| l.max(floor)).collect();
    (0..p)
        .map(|k| {
            let tail = &lam[k..];
            let m = tail.len() as f64;
            let mean_log = tail.iter().map(|l| l.ln()).sum::<f64>() / m;
            let log_am = (tail.iter().sum::<f64>() / m).ln();
            let kf = k as f64;
            -n * m * (mean_log - log_am) + 0.5 * kf * (2.0 * p as f64 - kf) * n.ln()
        })
        .collect()
}

fn eigen_profile(m: &ComplexMatrix) -> Result<(Vec<f64>, usize)> {
    if !m.is_finite() {
        return Err(Error::NonFinite("MDL input"));
    }
    let n_long = m.rows().max(m.cols());
    let s = linalg::singular_values(m)?;
    Ok((s.iter().map(|x| x * x / n_long as f64).collect(), n_long))
}

fn argmin_rank(eigen: &[f64], n_long: usize) -> usize {
    if eigen.first().is_none_or(|&l| l <= 0.0) {
        return 0;
    }
    mdl_scores(eigen, n_long)
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map_or(0, |(k, _)| k)
}

/// Rank estimate in `0..min(rows, cols)`. An all-zero matrix yields 0.
pub fn mdl_rank(m: &ComplexMatrix) -> Result<usize> {
    let (eigen, n_long) = eigen_profile(m)?;
    Ok(argmin_rank(&eigen, n_long))
}

/// Applies [`mdl_rank`] to the three unfoldings and keeps the largest estimate.
pub fn estimate_model_order(t: &ComplexTensor) -> Result<MdlReport> {
    if t.order() != 3 {
        return Err(Error::ShapeMismatch(format!(
            "model order needs a third-order tensor, got order {}",
            t.order()
        )));
    }
    let mut per_mode_estimates = Vec::with_capacity(3);
    let mut eigenvalue_profiles = Vec::with_capacity(3);
    for mode in 0..3 {
        let (eigen, n_long) = eigen_profile(&t.unfold(mode)?)?;
        per_mode_estimates.push(argmin_rank(&eigen, n_long));
        eigenvalue_profiles.push(eigen);
    }
    let l_hat = per_mode_estimates.iter().copied().max().unwrap_or(0);
    Ok(MdlReport {
        per_mode_estimates,
        l_hat,
        eigenvalue_profiles,
    })
}
