//! Rank-K CP decomposition of third-order complex tensors by alternating
//! least squares with restarts.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::tensor::{cp_compose, norm, ComplexMatrix, ComplexTensor};

/// Singular values below this fraction of the largest are dropped when
/// inverting the ALS normal equations.
pub const PINV_FLOOR: f64 = 1e-12;

/// Residual ratio at which ALS is considered to have hit working precision.
const RESIDUAL_FLOOR: f64 = 1e-14;

/// Factor matrices `[[a1, a2, a3]]` of a rank-K CP model.
#[derive(Clone, Debug, PartialEq)]
pub struct CpFactors {
    pub a1: ComplexMatrix,
    pub a2: ComplexMatrix,
    pub a3: ComplexMatrix,
}

impl CpFactors {
    pub fn rank(&self) -> usize {
        self.a1.cols()
    }

    /// The `r`-th rank-1 term as a dense tensor.
    pub fn component(&self, r: usize) -> Result<ComplexTensor> {
        crate::tensor::rank1_compose(&[self.a1.column(r), self.a2.column(r), self.a3.column(r)])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CpSolveConfig {
    pub rank: usize,
    pub max_iters: usize,
    /// Stop once the relative change of the residual ratio drops below this.
    pub rel_tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for CpSolveConfig {
    fn default() -> Self {
        Self {
            rank: 1,
            max_iters: 500,
            rel_tol: 1e-8,
            restarts: 5,
            seed: 0,
        }
    }
}

impl CpSolveConfig {
    pub fn with_rank(mut self, rank: usize) -> Self {
        self.rank = rank;
        self
    }
}

#[derive(Clone, Debug)]
pub struct CpSolution {
    /// Normalized factors; see [`normalize_factors`].
    pub factors: CpFactors,
    /// Residual ratio `‖t − model‖ / ‖t‖` after every ALS sweep of the winning restart.
    pub fit_history: Vec<f64>,
    pub residual: f64,
    /// Index of the winning restart.
    pub restart: usize,
}

/// Fits a rank-`cfg.rank` CP model to `t`.
///
/// Restart 0 starts from the leading singular vectors of the unfoldings, the
/// rest from independent complex Gaussian draws. The restart with the smallest
/// residual wins (ties go to the lower index). Restarts whose normal equations
/// collapse are discarded.
pub fn cp_als(t: &ComplexTensor, cfg: &CpSolveConfig) -> Result<CpSolution> {
    if t.order() != 3 {
        return Err(Error::ShapeMismatch(format!(
            "CP-ALS needs a third-order tensor, got order {}",
            t.order()
        )));
    }
    if !t.is_finite() {
        return Err(Error::NonFinite("CP input tensor"));
    }
    let d = t.dims();
    let bound = (d[0] * d[1]).min(d[0] * d[2]).min(d[1] * d[2]);
    if cfg.rank == 0 || cfg.rank > bound {
        return Err(Error::RankInfeasible {
            rank: cfg.rank,
            bound,
        });
    }
    if cfg.restarts == 0 {
        return Err(Error::Config("restarts must be at least 1".into()));
    }
    let t_norm = t.frobenius();
    if t_norm == 0.0 {
        return Err(Error::ZeroSignal);
    }

    let runs: Vec<Option<Run>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let init = initial_factors(t, cfg.rank, r, cfg.seed).ok()?;
            als_run(t, t_norm, init, cfg)
        })
        .collect();

    let (restart, best) = runs
        .into_iter()
        .enumerate()
        .filter_map(|(i, r)| r.map(|r| (i, r)))
        .min_by(|(ia, a), (ib, b)| a.residual.total_cmp(&b.residual).then(ia.cmp(ib)))
        .ok_or(Error::AllRestartsFailed(cfg.restarts))?;

    Ok(CpSolution {
        factors: normalize_factors(&best.factors)?,
        fit_history: best.history,
        residual: best.residual,
        restart,
    })
}

struct Run {
    factors: CpFactors,
    history: Vec<f64>,
    residual: f64,
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn initial_factors(t: &ComplexTensor, rank: usize, restart: usize, seed: u64) -> Result<CpFactors> {
    let mut rng = restart_rng(seed, restart);
    let d = t.dims();
    let mut mats = Vec::with_capacity(3);
    for (mode, &n) in d.iter().enumerate() {
        let m = if restart == 0 {
            let u = linalg::leading_left_singular_vectors(&t.unfold(mode)?, rank)?;
            // pad with random columns when the mode is narrower than the rank
            ComplexMatrix::from_fn(n, rank, |i, j| {
                if j < u.cols() {
                    u[(i, j)]
                } else {
                    complex_gaussian(&mut rng)
                }
            })
        } else {
            ComplexMatrix::from_fn(n, rank, |_, _| complex_gaussian(&mut rng))
        };
        mats.push(m);
    }
    let a3 = mats.pop().unwrap();
    let a2 = mats.pop().unwrap();
    let a1 = mats.pop().unwrap();
    Ok(CpFactors { a1, a2, a3 })
}

fn als_run(t: &ComplexTensor, t_norm: f64, mut f: CpFactors, cfg: &CpSolveConfig) -> Option<Run> {
    let (ni, nj, nk) = (t.dims()[0], t.dims()[1], t.dims()[2]);
    let k = cfg.rank;
    let mut history = Vec::new();
    let mut prev = f64::INFINITY;

    for _ in 0..cfg.max_iters {
        // mode 0: X(0) conj(C ⊙ B)
        let mut m0 = ComplexMatrix::zeros(ni, k);
        for r in 0..k {
            let (br, cr) = (f.a2.column(r), f.a3.column(r));
            let dst = m0.column_mut(r);
            for kk in 0..nk {
                for (j, &bj) in br.iter().enumerate() {
                    let w = (bj * cr[kk]).conj();
                    let base = ni * (j + nj * kk);
                    for (dv, &x) in dst.iter_mut().zip(&t.data()[base..base + ni]) {
                        *dv += x * w;
                    }
                }
            }
        }
        f.a1 = solve_update(&m0, &f.a2, &f.a3)?;

        // contraction with conj(A) shared by the mode-1 and mode-2 updates
        let mut partial = vec![Complex64::new(0.0, 0.0); nj * nk * k];
        for r in 0..k {
            let ar = f.a1.column(r);
            for kk in 0..nk {
                for j in 0..nj {
                    let base = ni * (j + nj * kk);
                    partial[j + nj * (kk + nk * r)] = t.data()[base..base + ni]
                        .iter()
                        .zip(ar)
                        .map(|(x, a)| x * a.conj())
                        .sum();
                }
            }
        }

        let m1 = ComplexMatrix::from_fn(nj, k, |j, r| {
            (0..nk)
                .map(|kk| partial[j + nj * (kk + nk * r)] * f.a3[(kk, r)].conj())
                .sum()
        });
        f.a2 = solve_update(&m1, &f.a1, &f.a3)?;

        let m2 = ComplexMatrix::from_fn(nk, k, |kk, r| {
            (0..nj)
                .map(|j| partial[j + nj * (kk + nk * r)] * f.a2[(j, r)].conj())
                .sum()
        });
        f.a3 = solve_update(&m2, &f.a1, &f.a2)?;

        let fit = residual_ratio(t, t_norm, &f, &m2)?;
        if !fit.is_finite() {
            return None;
        }
        history.push(fit);
        if fit <= RESIDUAL_FLOOR || (prev.is_finite() && (prev - fit).abs() <= cfg.rel_tol * prev) {
            break;
        }
        prev = fit;
    }
    let residual = *history.last()?;
    Some(Run {
        factors: f,
        history,
        residual,
    })
}

/// Below this residual ratio the Gram-based residual loses too many digits
/// and the model is recomposed explicitly.
const EXPLICIT_RESIDUAL_BELOW: f64 = 1e-4;

/// `‖t − model‖ / ‖t‖` from `‖t‖² − 2 Re⟨t, model⟩ + ‖model‖²`, where
/// `⟨t, model⟩` reuses the mode-2 MTTKRP `m2` of the current factors.
fn residual_ratio(t: &ComplexTensor, t_norm: f64, f: &CpFactors, m2: &ComplexMatrix) -> Option<f64> {
    let cross: f64 = m2
        .data()
        .iter()
        .zip(f.a3.data())
        .map(|(m, c)| (m * c.conj()).re)
        .sum();
    let (g1, g2, g3) = (f.a1.gram(), f.a2.gram(), f.a3.gram());
    let model_sq: f64 = (0..g1.data().len())
        .map(|i| (g1.data()[i] * g2.data()[i] * g3.data()[i]).re)
        .sum();
    let fast = (t_norm * t_norm - 2.0 * cross + model_sq).max(0.0).sqrt() / t_norm;
    if !fast.is_finite() {
        return None;
    }
    if fast >= EXPLICIT_RESIDUAL_BELOW {
        return Some(fast);
    }
    let model = cp_compose(f).ok()?;
    let resid: Vec<Complex64> = t.data().iter().zip(model.data()).map(|(a, b)| a - b).collect();
    Some(norm(&resid) / t_norm)
}

/// Least-squares factor update `M · pinv(conj((YᴴY) ∘ (ZᴴZ)))` for the mode
/// whose complementary factors are `y` and `z`.
fn solve_update(mttkrp: &ComplexMatrix, y: &ComplexMatrix, z: &ComplexMatrix) -> Option<ComplexMatrix> {
    let gy = y.gram();
    let gz = z.gram();
    let k = gy.rows();
    let h = ComplexMatrix::from_fn(k, k, |i, j| (gy[(i, j)] * gz[(i, j)]).conj());
    if !h.is_finite() || h.frobenius() == 0.0 {
        return None;
    }
    let hp = linalg::pinv(&h, PINV_FLOOR).ok()?;
    let out = mttkrp.matmul(&hp).ok()?;
    out.is_finite().then_some(out)
}

fn phase_of_leading(v: &[Complex64]) -> Complex64 {
    v.iter()
        .find(|z| z.norm() > 0.0)
        .map_or(Complex64::new(1.0, 0.0), |z| z / z.norm())
}

/// Rescales every component so that its mode-1 and mode-3 columns have unit
/// norm and a real nonnegative leading entry; the removed scale and phase move
/// into the mode-2 column. The leading entry is the first nonzero one.
pub fn normalize_factors(f: &CpFactors) -> Result<CpFactors> {
    let k = f.rank();
    if f.a2.cols() != k || f.a3.cols() != k {
        return Err(Error::RankMismatch(vec![k, f.a2.cols(), f.a3.cols()]));
    }
    let mut out = f.clone();
    for r in 0..k {
        let n1 = norm(f.a1.column(r));
        let n3 = norm(f.a3.column(r));
        if n1 == 0.0 || n3 == 0.0 {
            return Err(Error::DegenerateComponent(r));
        }
        let s1 = phase_of_leading(f.a1.column(r)) * n1;
        let s3 = phase_of_leading(f.a3.column(r)) * n3;
        out.a1.column_mut(r).iter_mut().for_each(|z| *z /= s1);
        out.a3.column_mut(r).iter_mut().for_each(|z| *z /= s3);
        out.a2.column_mut(r).iter_mut().for_each(|z| *z *= s1 * s3);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::dot_conj;
    use std::f64::consts::PI;

    fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
    }

    fn coherence(a: &[Complex64], b: &[Complex64]) -> f64 {
        dot_conj(a, b).norm() / (norm(a) * norm(b))
    }

    fn rel_diff(a: &ComplexTensor, b: &ComplexTensor) -> f64 {
        a.sub(b).unwrap().frobenius() / a.frobenius()
    }

    #[test]
    fn rank1_exact_recovery() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = CpFactors {
            a1: random_matrix(8, 1, &mut rng),
            a2: random_matrix(8, 1, &mut rng),
            a3: random_matrix(8, 1, &mut rng),
        };
        let t = cp_compose(&f).unwrap();
        let sol = cp_als(&t, &CpSolveConfig::default()).unwrap();
        assert!(sol.residual <= 1e-10, "residual {}", sol.residual);
        let term = sol.factors.component(0).unwrap();
        assert!(rel_diff(&t, &term) <= 1e-8);
    }

    #[test]
    fn rank2_well_conditioned_recovery() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = loop {
            let f = CpFactors {
                a1: random_matrix(8, 2, &mut rng),
                a2: random_matrix(8, 2, &mut rng),
                a3: random_matrix(8, 2, &mut rng),
            };
            if [&f.a1, &f.a2, &f.a3]
                .iter()
                .all(|m| coherence(m.column(0), m.column(1)) < 0.7)
            {
                break f;
            }
        };
        let t = cp_compose(&f).unwrap();
        let sol = cp_als(&t, &CpSolveConfig::default().with_rank(2)).unwrap();
        assert!(sol.residual <= 1e-8, "residual {}", sol.residual);

        // terms match as an unordered set
        let truth: Vec<ComplexTensor> = (0..2).map(|r| f.component(r).unwrap()).collect();
        for r in 0..2 {
            let est = sol.factors.component(r).unwrap();
            let best = truth
                .iter()
                .map(|g| rel_diff(g, &est))
                .fold(f64::INFINITY, f64::min);
            assert!(best <= 1e-6, "term {r}: {best}");
        }
    }

    #[test]
    fn noise_fit_bounded_by_unfolding_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = ComplexTensor::from_fn(&[4, 4, 4], |_| complex_gaussian(&mut rng));
        let sol = cp_als(&t, &CpSolveConfig::default()).unwrap();
        assert!(sol.residual < 1.0);
        let total = t.frobenius().powi(2);
        for mode in 0..3 {
            let s = linalg::singular_values(&t.unfold(mode).unwrap()).unwrap();
            let svd_ratio = ((total - s[0] * s[0]) / total).sqrt();
            assert!(sol.residual >= svd_ratio - 1e-12, "mode {mode}");
        }
    }

    #[test]
    fn fit_history_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = CpFactors {
            a1: random_matrix(6, 3, &mut rng),
            a2: random_matrix(7, 3, &mut rng),
            a3: random_matrix(5, 3, &mut rng),
        };
        let clean = cp_compose(&f).unwrap();
        let noisy = ComplexTensor::from_fn(clean.dims(), |idx| {
            clean.get(idx) + complex_gaussian(&mut rng) * 0.05
        });
        let sol = cp_als(&noisy, &CpSolveConfig::default().with_rank(3)).unwrap();
        for w in sol.fit_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = ComplexTensor::from_fn(&[5, 4, 3], |_| complex_gaussian(&mut rng));
        let cfg = CpSolveConfig {
            rank: 2,
            seed: 77,
            ..Default::default()
        };
        let a = cp_als(&t, &cfg).unwrap();
        let b = cp_als(&t, &cfg).unwrap();
        assert_eq!(a.factors, b.factors);
        assert_eq!(a.fit_history, b.fit_history);
    }

    #[test]
    fn rejects_bad_inputs() {
        let t = ComplexTensor::from_fn(&[2, 2, 2], |_| Complex64::new(1.0, 0.0));
        let too_big = CpSolveConfig::default().with_rank(5);
        assert!(matches!(
            cp_als(&t, &too_big),
            Err(Error::RankInfeasible { rank: 5, bound: 4 })
        ));
        assert!(matches!(
            cp_als(&t, &CpSolveConfig::default().with_rank(0)),
            Err(Error::RankInfeasible { .. })
        ));
        let mut bad = t.clone();
        bad.set(&[0, 0, 0], Complex64::new(f64::INFINITY, 0.0));
        assert!(matches!(
            cp_als(&bad, &CpSolveConfig::default()),
            Err(Error::NonFinite(_))
        ));
        let m = ComplexTensor::zeros(&[2, 2]);
        assert!(cp_als(&m, &CpSolveConfig::default()).is_err());
    }

    #[test]
    fn normalize_is_identity_on_normalized_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = CpFactors {
            a1: random_matrix(4, 2, &mut rng),
            a2: random_matrix(3, 2, &mut rng),
            a3: random_matrix(5, 2, &mut rng),
        };
        let n = normalize_factors(&f).unwrap();
        let nn = normalize_factors(&n).unwrap();
        let d = n
            .a2
            .data()
            .iter()
            .zip(nn.a2.data())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(d < 1e-14);
        for r in 0..2 {
            assert!((norm(n.a1.column(r)) - 1.0).abs() < 1e-14);
            assert!((norm(n.a3.column(r)) - 1.0).abs() < 1e-14);
            assert!(n.a1[(0, r)].im.abs() < 1e-15 && n.a1[(0, r)].re >= 0.0);
            assert!(n.a3[(0, r)].im.abs() < 1e-15 && n.a3[(0, r)].re >= 0.0);
        }
        let before = cp_compose(&f).unwrap();
        assert!(rel_diff(&before, &cp_compose(&n).unwrap()) < 1e-12);
    }

    #[test]
    fn normalize_moves_scale_into_mode2() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let base = normalize_factors(&CpFactors {
            a1: random_matrix(4, 1, &mut rng),
            a2: random_matrix(3, 1, &mut rng),
            a3: random_matrix(5, 1, &mut rng),
        })
        .unwrap();
        let s = Complex64::from_polar(2.0, PI / 4.0);
        let mut scaled = base.clone();
        scaled.a1.column_mut(0).iter_mut().for_each(|z| *z *= s);
        let renorm = normalize_factors(&scaled).unwrap();
        let want = scaled.component(0).unwrap();
        assert!(rel_diff(&want, &renorm.component(0).unwrap()) < 1e-12);
        // `base` already has a unit, real-leading a1, so a2 picks up exactly s
        for (a, b) in renorm.a2.column(0).iter().zip(base.a2.column(0)) {
            assert!((a - b * s).norm() < 1e-12);
        }
        let norms = |g: &CpFactors| norm(g.a1.column(0)) * norm(g.a2.column(0)) * norm(g.a3.column(0));
        assert!((norms(&scaled) - norms(&renorm)).abs() < 1e-12 * norms(&scaled));
    }

    #[test]
    fn normalize_rejects_zero_column() {
        let f = CpFactors {
            a1: ComplexMatrix::zeros(3, 1),
            a2: ComplexMatrix::identity(1),
            a3: ComplexMatrix::identity(1),
        };
        assert!(matches!(
            normalize_factors(&f),
            Err(Error::DegenerateComponent(0))
        ));
    }
}
