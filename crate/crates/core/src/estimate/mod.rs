//! End-to-end parameter estimators for the digital and hybrid front ends.
//!
//! Both pipelines share the same front (model order, then CP) and differ in
//! how each rank-one component is turned into path parameters.

mod digital;
mod hybrid;

pub use digital::{estimate_digital, estimate_digital_paths, jade_digital, refine_a2};
pub use hybrid::{estimate_hybrid, estimate_hybrid_paths, estimate_psi_hybrid, jade_hybrid, refine_a1};

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cp::{cp_als, CpFactors, CpSolveConfig};
use crate::error::{Error, Result};
use crate::harmonic::{acd_2d, wrap_angle, AcdConfig, Coordinate, TrigPolyRatio};
use crate::mdl::estimate_model_order;
use crate::sim::{channel_tensor, ChannelParamSet, PathParams, SystemDims};
use crate::tensor::{norm_sqr, ComplexMatrix, ComplexTensor};

/// Added to a matched-filter denominator, relative to its constant term, when
/// it touches zero somewhere on the circle.
pub const DENOMINATOR_RIDGE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorConfig {
    /// ALS settings; `rank` is overwritten by the detected model order.
    pub cp: CpSolveConfig,
    pub acd: AcdConfig,
    /// Least-squares refinement of the CP factor that feeds the joint search.
    /// When off, that factor is taken straight from the CP solution.
    pub refine: bool,
    /// Run the per-path branches on the rayon pool.
    pub parallel: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            cp: CpSolveConfig::default(),
            acd: AcdConfig::default(),
            refine: true,
            parallel: true,
        }
    }
}

/// Wall-clock per stage, in milliseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageTimings {
    pub model_order_ms: f64,
    pub cp_ms: f64,
    pub per_path_ms: f64,
    pub total_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub mdl_per_mode: Vec<usize>,
    /// MDL estimate before clamping, when it exceeded the identifiability bound.
    pub clamped_from: Option<usize>,
    pub cp_residual: Option<f64>,
    pub cp_restart: Option<usize>,
    /// Joint-search objective of every path, in output order.
    pub path_objectives: Vec<f64>,
    pub acd_sweeps: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct EstimationResult {
    pub l_hat: usize,
    /// Paths sorted by descending `|b|`.
    pub params: ChannelParamSet,
    pub h_hat: ComplexTensor,
    pub timings: StageTimings,
    pub diagnostics: Diagnostics,
}

/// Outcome of the two-frequency matched filter for one path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JadeFit {
    /// Frequency along the data index (ω₂ for digital, ω₁ for hybrid).
    pub omega: f64,
    pub varsigma: f64,
    pub b: Complex64,
    pub objective: f64,
    pub sweeps: usize,
}

/// One estimated path plus its search diagnostics, before sorting.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PathFit {
    pub params: PathParams,
    pub objective: f64,
    pub sweeps: usize,
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Least-squares fit of the factor along `mode` of a third-order tensor given
/// fixed vectors `u`, `w` on the other two modes (ascending mode order):
/// `x_i = Σ conj(u_j w_k) t[..i..] / (‖u‖² ‖w‖²)`.
pub(crate) fn fit_mode(t: &ComplexTensor, mode: usize, u: &[Complex64], w: &[Complex64]) -> Result<Vec<Complex64>> {
    if t.order() != 3 || mode > 2 {
        return Err(Error::ShapeMismatch(format!(
            "need a third-order tensor and mode < 3, got dims {:?}, mode {mode}",
            t.dims()
        )));
    }
    let d = t.dims();
    let others: Vec<usize> = (0..3).filter(|&k| k != mode).collect();
    if u.len() != d[others[0]] || w.len() != d[others[1]] {
        return Err(Error::ShapeMismatch(format!(
            "steering lengths {} and {} do not match tensor dims {:?}",
            u.len(),
            w.len(),
            d
        )));
    }
    let scale = norm_sqr(u) * norm_sqr(w);
    if scale == 0.0 {
        return Err(Error::ZeroVector("factor refinement"));
    }
    let mut x = vec![Complex64::new(0.0, 0.0); d[mode]];
    for k in 0..d[2] {
        for j in 0..d[1] {
            for i in 0..d[0] {
                let idx = [i, j, k];
                let weight = (u[idx[others[0]]] * w[idx[others[1]]]).conj();
                x[idx[mode]] += weight * t.at3(i, j, k);
            }
        }
    }
    x.iter_mut().for_each(|z| *z /= scale);
    Ok(x)
}

/// Maximizes `|β(θ,ς)ᴴ y|² / ‖β(θ,ς)‖²` with `β_i = e^{jiθ} Σ_v m[i,v] e^{jvς}`
/// by alternating exact line searches, then returns the profiled gain
/// `b = βᴴy / ‖β‖²`.
pub(crate) fn jade(m: &ComplexMatrix, y: &[Complex64], cfg: &AcdConfig) -> Result<JadeFit> {
    if m.rows() != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "pilot has {} rows, data has {} entries",
            m.rows(),
            y.len()
        )));
    }
    if m.frobenius() == 0.0 {
        return Err(Error::PilotDesign("pilot is identically zero".into()));
    }
    let den_b = jade_denominator(m);
    let build = |coord: Coordinate, fixed: f64| jade_slice(m, y, &den_b, coord, fixed);
    let r = acd_2d(build, cfg)?;
    let (omega, varsigma) = (wrap_angle(r.omega_a), wrap_angle(r.omega_b));
    let beta = steering(m, omega, varsigma);
    let energy = norm_sqr(&beta);
    if energy == 0.0 {
        return Err(Error::PilotDesign(format!(
            "pilot has no energy at (ω, ς) = ({omega}, {varsigma})"
        )));
    }
    let corr: Complex64 = beta.iter().zip(y).map(|(b, y)| b.conj() * y).sum();
    Ok(JadeFit {
        omega,
        varsigma,
        b: corr / energy,
        objective: corr.norm_sqr() / energy,
        sweeps: r.sweeps,
    })
}

/// Hermitian half-sequence of `‖β(θ, ·)‖²`, which does not depend on θ.
pub(crate) fn jade_denominator(m: &ComplexMatrix) -> Vec<Complex64> {
    let cols = m.cols();
    let gram = m.gram();
    (0..cols)
        .map(|d| (0..cols - d).map(|i| gram[(i, i + d)]).sum())
        .collect()
}

/// Exact one-dimensional slice of the matched-filter objective along θ
/// (`Coordinate::A`) or ς (`Coordinate::B`) with the other one fixed.
pub(crate) fn jade_slice(
    m: &ComplexMatrix,
    y: &[Complex64],
    den_b: &[Complex64],
    coord: Coordinate,
    fixed: f64,
) -> Result<TrigPolyRatio> {
    let (rows, cols) = (m.rows(), m.cols());
    match coord {
        Coordinate::A => {
            let c: Vec<Complex64> = (0..rows)
                .map(|i| (0..cols).map(|v| m[(i, v)] * Complex64::from_polar(1.0, v as f64 * fixed)).sum())
                .collect();
            let num = c.iter().zip(y).map(|(c, y)| c * y.conj()).collect();
            let energy = norm_sqr(&c);
            TrigPolyRatio::new_ridged(num, vec![Complex64::new(energy, 0.0)], DENOMINATOR_RIDGE)
        }
        Coordinate::B => {
            let num = (0..cols)
                .map(|v| {
                    (0..rows)
                        .map(|i| Complex64::from_polar(1.0, i as f64 * fixed) * m[(i, v)] * y[i].conj())
                        .sum()
                })
                .collect();
            TrigPolyRatio::new_ridged(num, den_b.to_vec(), DENOMINATOR_RIDGE)
        }
    }
}

/// `β_i(θ, ς) = e^{jiθ} Σ_v m[i,v] e^{jvς}`.
pub(crate) fn steering(m: &ComplexMatrix, theta: f64, varsigma: f64) -> Vec<Complex64> {
    (0..m.rows())
        .map(|i| {
            let c: Complex64 = (0..m.cols())
                .map(|v| m[(i, v)] * Complex64::from_polar(1.0, v as f64 * varsigma))
                .sum();
            c * Complex64::from_polar(1.0, i as f64 * theta)
        })
        .collect()
}

/// Matched-filter objective `|βᴴy|²/‖β‖²` at a given point; zero where `β = 0`.
#[cfg(test)]
pub(crate) fn jade_objective(m: &ComplexMatrix, y: &[Complex64], theta: f64, varsigma: f64) -> f64 {
    let beta = steering(m, theta, varsigma);
    let energy = norm_sqr(&beta);
    if energy == 0.0 {
        return 0.0;
    }
    let corr: Complex64 = beta.iter().zip(y).map(|(b, y)| b.conj() * y).sum();
    corr.norm_sqr() / energy
}

/// Model order and CP front shared by both pipelines.
pub(crate) struct Front {
    pub l_hat: usize,
    pub factors: Option<CpFactors>,
    pub diagnostics: Diagnostics,
    pub timings: StageTimings,
}

pub(crate) fn front(t: &ComplexTensor, cfg: &CpSolveConfig) -> Result<Front> {
    let d = t.dims();
    let mut diagnostics = Diagnostics::default();
    let mut timings = StageTimings::default();

    let clock = Instant::now();
    let report = estimate_model_order(t)?;
    timings.model_order_ms = elapsed_ms(clock);
    diagnostics.mdl_per_mode = report.per_mode_estimates.clone();

    let bound = (d[0] * d[1]).min(d[1] * d[2]).min(d[0] * d[2]);
    let mut l_hat = report.l_hat;
    if l_hat > bound {
        diagnostics.clamped_from = Some(l_hat);
        l_hat = bound;
    }
    if l_hat == 0 {
        return Ok(Front {
            l_hat,
            factors: None,
            diagnostics,
            timings,
        });
    }

    let clock = Instant::now();
    let sol = cp_als(t, &cfg.clone().with_rank(l_hat))?;
    timings.cp_ms = elapsed_ms(clock);
    diagnostics.cp_residual = Some(sol.residual);
    diagnostics.cp_restart = Some(sol.restart);
    Ok(Front {
        l_hat,
        factors: Some(sol.factors),
        diagnostics,
        timings,
    })
}

/// Runs `branch` for every component, in parallel when asked; errors carry
/// the component index.
pub(crate) fn per_path<F>(l: usize, parallel: bool, branch: F) -> Result<Vec<PathFit>>
where
    F: Fn(usize) -> Result<PathFit> + Sync,
{
    let run = |i: usize| branch(i).map_err(|e| e.at_path(i));
    if parallel {
        (0..l).into_par_iter().map(run).collect()
    } else {
        (0..l).map(run).collect()
    }
}

/// Sorts paths by gain and reconstructs the channel.
pub(crate) fn assemble(
    front: Front,
    mut fits: Vec<PathFit>,
    dims: &SystemDims,
    per_path_ms: f64,
    started: Instant,
) -> EstimationResult {
    fits.sort_by(|x, y| y.params.b.norm().total_cmp(&x.params.b.norm()));
    let Front {
        l_hat,
        mut diagnostics,
        mut timings,
        ..
    } = front;
    diagnostics.path_objectives = fits.iter().map(|f| f.objective).collect();
    diagnostics.acd_sweeps = fits.iter().map(|f| f.sweeps).collect();
    let params = ChannelParamSet::new(fits.into_iter().map(|f| f.params).collect());
    let h_hat = channel_tensor(&params, dims);
    timings.per_path_ms = per_path_ms;
    timings.total_ms = elapsed_ms(started);
    EstimationResult {
        l_hat,
        params,
        h_hat,
        timings,
        diagnostics,
    }
}

/// Relative Frobenius error `‖h − ĥ‖ / ‖h‖`.
pub fn relative_error(h: &ComplexTensor, h_hat: &ComplexTensor) -> Result<f64> {
    let denom = h.frobenius();
    if denom == 0.0 {
        return Err(Error::ZeroSignal);
    }
    Ok(h.sub(h_hat)?.frobenius() / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::vandermonde;
    use crate::linalg;
    use crate::tensor::rank1_compose;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect()
    }

    /// Dense LS oracle: materialize the design matrix of the fixed modes and solve by pinv.
    fn dense_fit(t: &ComplexTensor, mode: usize, u: &[Complex64], w: &[Complex64]) -> Vec<Complex64> {
        let d = t.dims().to_vec();
        let n = d[mode];
        let design = ComplexMatrix::from_fn(t.len(), n, |row, col| {
            let idx = [row % d[0], (row / d[0]) % d[1], row / (d[0] * d[1])];
            if idx[mode] != col {
                return Complex64::new(0.0, 0.0);
            }
            let o: Vec<usize> = (0..3).filter(|&k| k != mode).collect();
            u[idx[o[0]]] * w[idx[o[1]]]
        });
        linalg::pinv(&design, 1e-14).unwrap().apply(t.data()).unwrap()
    }

    #[test]
    fn fit_mode_matches_dense_oracle_on_every_mode() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let dims = [4, 5, 3];
        let t = ComplexTensor::new(dims.to_vec(), gaussian(60, &mut rng)).unwrap();
        for mode in 0..3 {
            let o: Vec<usize> = (0..3).filter(|&k| k != mode).collect();
            let u = gaussian(dims[o[0]], &mut rng);
            let w = gaussian(dims[o[1]], &mut rng);
            let fast = fit_mode(&t, mode, &u, &w).unwrap();
            let slow = dense_fit(&t, mode, &u, &w);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-10 * (1.0 + b.norm()), "mode {mode}");
            }
        }
    }

    #[test]
    fn fit_mode_rejects_zero_steering() {
        let t = rank1_compose(&[&[Complex64::new(1.0, 0.0); 2], &[Complex64::new(1.0, 0.0); 3], &[Complex64::new(1.0, 0.0); 2]])
            .unwrap();
        let z = vec![Complex64::new(0.0, 0.0); 2];
        assert!(matches!(
            fit_mode(&t, 1, &z, &[Complex64::new(1.0, 0.0); 2]),
            Err(Error::ZeroVector(_))
        ));
    }

    #[test]
    fn jade_recovers_plain_two_dimensional_tone() {
        // m[i,v] = 1 for v = 0 only: β is a pure tone in θ, flat in ς.
        let m = ComplexMatrix::from_fn(12, 3, |_, v| Complex64::new(if v == 0 { 1.0 } else { 0.0 }, 0.0));
        let y: Vec<Complex64> = vandermonde(0.7, 12).into_iter().map(|z| z * 2.0).collect();
        let fit = jade(&m, &y, &AcdConfig::default()).unwrap();
        assert!((fit.omega - 0.7).abs() < 1e-9);
        assert!((fit.b - 2.0).norm() < 1e-9);
    }

    #[test]
    fn jade_flags_zero_pilot() {
        let m = ComplexMatrix::zeros(4, 2);
        let r = jade(&m, &[Complex64::new(1.0, 0.0); 4], &AcdConfig::default());
        assert!(matches!(r, Err(Error::PilotDesign(_))));
    }

    #[test]
    fn relative_error_of_truth_is_zero() {
        let t = ComplexTensor::from_fn(&[2, 2, 2], |i| Complex64::new(i[0] as f64 + 1.0, i[2] as f64));
        assert_eq!(relative_error(&t, &t).unwrap(), 0.0);
        assert!(matches!(
            relative_error(&ComplexTensor::zeros(&[2, 2]), &ComplexTensor::zeros(&[2, 2])),
            Err(Error::ZeroSignal)
        ));
    }
}
