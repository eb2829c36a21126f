//! Exact global maximization of `J(ω) = |f(e^{jω})|² / g(ω)` on the unit circle.
//!
//! The stationary points of `J` are the zeros of `F'G − FG'`, where `F = |f|²`
//! and `G = g` are Laurent polynomials in `z = e^{jω}`. Clearing the negative
//! powers gives an ordinary polynomial whose unit-modulus roots, found as
//! companion-matrix eigenvalues, are the candidate maximizers.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{angular_distance, wrap_angle};
use crate::error::{Error, Result};
use crate::linalg;
use crate::tensor::ComplexMatrix;

/// Roots within this distance of the unit circle are accepted as stationary points.
pub const ROOT_BAND: f64 = 1e-6;

/// Size of the uniform grid that backs up the rooting step.
pub const FALLBACK_GRID: usize = 4096;

const TIE_RTOL: f64 = 1e-12;
/// Candidates closer than this (rad) are treated as the same peak.
const SAME_PEAK: f64 = 1e-4;
const TRIM_RTOL: f64 = 1e-13;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Ratio of trigonometric polynomials, maximized by [`max_unit_circle`].
///
/// The numerator is `|f(e^{jω})|²` with `f(z) = Σ_k num[k] zᵏ`. The
/// denominator is the real trigonometric polynomial
/// `g(ω) = Re(den[0]) + 2·Re(Σ_{d≥1} den[d] e^{jdω})`, i.e. `den` holds the
/// nonnegative-lag half of a Hermitian-symmetric coefficient sequence. An
/// empty `den` means `g ≡ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolyRatio {
    num: Vec<Complex64>,
    den: Vec<Complex64>,
}

impl TrigPolyRatio {
    pub fn new(num: Vec<Complex64>, den: Vec<Complex64>) -> Result<Self> {
        if num.is_empty() {
            return Err(Error::InvalidRatio("empty numerator".into()));
        }
        let finite = |v: &[Complex64]| v.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite(&num) || !finite(&den) {
            return Err(Error::NonFinite("trigonometric ratio coefficients"));
        }
        let r = Self { num, den };
        if !r.den.is_empty() {
            let grid = (16 * r.den.len()).max(1024);
            let g = r.den_grid(grid);
            let (lo, hi) = g
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
            if !(lo > 0.0 && lo > 1e-14 * hi) {
                return Err(Error::InvalidRatio(format!(
                    "denominator not positive on the circle (min {lo:e}, max {hi:e})"
                )));
            }
        }
        Ok(r)
    }

    /// Like [`TrigPolyRatio::new`], but a denominator that touches zero on the
    /// circle gets `ridge · den[0]` added to its constant term, and an
    /// identically zero denominator yields the zero objective.
    ///
    /// For matched-filter ratios the numerator vanishes wherever the
    /// denominator does, so the ridge only perturbs those removable points.
    pub fn new_ridged(num: Vec<Complex64>, mut den: Vec<Complex64>, ridge: f64) -> Result<Self> {
        let c0 = den.first().map_or(1.0, |c| c.re);
        if c0 <= 0.0 {
            return Self::new(vec![ZERO], vec![]);
        }
        match Self::new(num.clone(), den.clone()) {
            Err(Error::InvalidRatio(_)) => {
                den[0] += ridge * c0;
                Self::new(num, den)
            }
            r => r,
        }
    }

    /// Ratio for the matched-filter objective `|s(θ)ᴴ y|² / ‖s(θ)‖²` where
    /// `s(θ) = basis · [1, e^{jθ}, …]ᵀ`.
    pub fn from_linear_family(basis: &ComplexMatrix, data: &[Complex64]) -> Result<Self> {
        let (num, den) = linear_family_coefficients(basis, data)?;
        Self::new(num, den)
    }

    /// [`TrigPolyRatio::from_linear_family`] through [`TrigPolyRatio::new_ridged`].
    pub fn from_linear_family_ridged(basis: &ComplexMatrix, data: &[Complex64], ridge: f64) -> Result<Self> {
        let (num, den) = linear_family_coefficients(basis, data)?;
        Self::new_ridged(num, den, ridge)
    }

    pub fn numerator(&self) -> &[Complex64] {
        &self.num
    }

    pub fn denominator(&self) -> &[Complex64] {
        &self.den
    }

    pub fn numerator_at(&self, omega: f64) -> Complex64 {
        horner(&self.num, Complex64::from_polar(1.0, omega))
    }

    pub fn denominator_at(&self, omega: f64) -> f64 {
        if self.den.is_empty() {
            return 1.0;
        }
        let h = horner(&self.den, Complex64::from_polar(1.0, omega));
        2.0 * h.re - self.den[0].re
    }

    /// Objective value `J(ω)`.
    pub fn eval(&self, omega: f64) -> f64 {
        self.numerator_at(omega).norm_sqr() / self.denominator_at(omega)
    }

    /// Exact derivative `dJ/dω`.
    pub fn derivative_at(&self, omega: f64) -> f64 {
        let z = Complex64::from_polar(1.0, omega);
        let f = horner(&self.num, z);
        let df = Complex64::i() * horner(&ramp(&self.num), z);
        let num = self.numerator_at(omega).norm_sqr();
        let dnum = 2.0 * (f.conj() * df).re;
        let (den, dden) = if self.den.is_empty() {
            (1.0, 0.0)
        } else {
            (self.denominator_at(omega), 2.0 * (Complex64::i() * horner(&ramp(&self.den), z)).re)
        };
        (dnum * den - num * dden) / (den * den)
    }

    fn den_grid(&self, n: usize) -> Vec<f64> {
        if self.den.is_empty() {
            return vec![1.0; n];
        }
        let c0 = self.den[0].re;
        eval_on_grid(&self.den, n)
            .into_iter()
            .map(|h| 2.0 * h.re - c0)
            .collect()
    }

    /// `J` on the uniform grid `ω_i = 2πi/n`, `i = 0..n`.
    pub fn eval_grid(&self, n: usize) -> Vec<f64> {
        let f = eval_on_grid(&self.num, n);
        let g = self.den_grid(n);
        f.iter().zip(&g).map(|(a, b)| a.norm_sqr() / b).collect()
    }

    /// Coefficients of `F'G − FG'` for lags `-(n+m)..=(n+m)`.
    fn stationarity_laurent(&self) -> Laurent {
        let f = Laurent::autocorrelation(&self.num);
        let g = if self.den.is_empty() {
            Laurent {
                lo: 0,
                c: vec![Complex64::new(1.0, 0.0)],
            }
        } else {
            Laurent::hermitian(&self.den)
        };
        let mut out = f.derivative().mul(&g);
        out.sub_assign(&f.mul(&g.derivative()));
        out
    }
}

fn linear_family_coefficients(basis: &ComplexMatrix, data: &[Complex64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if basis.rows() != data.len() {
        return Err(Error::ShapeMismatch(format!(
            "basis has {} rows, data has {} entries",
            basis.rows(),
            data.len()
        )));
    }
    let k = basis.cols();
    let num = (0..k)
        .map(|c| {
            basis
                .column(c)
                .iter()
                .zip(data)
                .map(|(b, y)| b * y.conj())
                .sum()
        })
        .collect();
    let gram = basis.gram();
    let den = (0..k)
        .map(|d| (0..k - d).map(|i| gram[(i, i + d)]).sum())
        .collect();
    Ok((num, den))
}

/// Grid angle `2πi/n` mapped into `(-π, π]`.
pub(crate) fn grid_angle(i: usize, n: usize) -> f64 {
    if 2 * i <= n {
        2.0 * PI * i as f64 / n as f64
    } else {
        2.0 * PI * i as f64 / n as f64 - 2.0 * PI
    }
}

/// Evaluates `Σ_k c_k e^{jkω}` at `ω_i = 2πi/n` by an inverse FFT,
/// folding coefficients beyond `n`.
pub fn eval_on_grid(coeffs: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut buf = vec![ZERO; n];
    for (k, &c) in coeffs.iter().enumerate() {
        buf[k % n] += c;
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf
}

/// Coefficients `k·c_k`, the polynomial part of `z d/dz`.
fn ramp(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs.iter().enumerate().map(|(k, c)| c * k as f64).collect()
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
}

/// `Σ_{d=lo}^{lo+len-1} c[d-lo] zᵈ`.
#[derive(Clone, Debug)]
struct Laurent {
    lo: i64,
    c: Vec<Complex64>,
}

impl Laurent {
    /// `|f(z)|²` on the circle: lag `d` holds `Σ_k f_{k+d} conj(f_k)`.
    fn autocorrelation(f: &[Complex64]) -> Self {
        let n = f.len() as i64 - 1;
        let c = (-n..=n)
            .map(|d| {
                (0..f.len() as i64)
                    .filter(|&k| (0..=n).contains(&(k + d)))
                    .map(|k| f[(k + d) as usize] * f[k as usize].conj())
                    .sum()
            })
            .collect();
        Self { lo: -n, c }
    }

    fn hermitian(half: &[Complex64]) -> Self {
        let m = half.len() as i64 - 1;
        let c = (-m..=m)
            .map(|d| {
                if d < 0 {
                    half[(-d) as usize].conj()
                } else if d == 0 {
                    Complex64::new(half[0].re, 0.0)
                } else {
                    half[d as usize]
                }
            })
            .collect();
        Self { lo: -m, c }
    }

    fn derivative(&self) -> Self {
        let c = self
            .c
            .iter()
            .enumerate()
            .map(|(i, &x)| x * Complex64::new(0.0, (self.lo + i as i64) as f64))
            .collect();
        Self { lo: self.lo, c }
    }

    fn mul(&self, other: &Self) -> Self {
        let mut c = vec![ZERO; self.c.len() + other.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            for (j, &b) in other.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self {
            lo: self.lo + other.lo,
            c,
        }
    }

    fn sub_assign(&mut self, other: &Self) {
        debug_assert_eq!(self.lo, other.lo);
        for (a, b) in self.c.iter_mut().zip(&other.c) {
            *a -= b;
        }
    }

    fn eval(&self, omega: f64) -> Complex64 {
        let z = Complex64::from_polar(1.0, omega);
        horner(&self.c, z) * Complex64::from_polar(1.0, self.lo as f64 * omega)
    }
}

/// Result of [`max_unit_circle`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitCircleMax {
    pub omega: f64,
    pub value: f64,
    /// Set when the numerator vanishes identically; `omega` is then 0.
    pub degenerate: bool,
    /// Number of unit-circle roots that entered the candidate set.
    pub roots_used: usize,
}

/// Unit-modulus roots of a polynomial given in ascending coefficient order,
/// returned as angles.
fn unit_circle_roots(poly: &[Complex64]) -> Result<Vec<f64>> {
    let scale = poly.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(Vec::new());
    }
    let tol = scale * TRIM_RTOL;
    let hi = poly.iter().rposition(|z| z.norm() > tol).unwrap_or(0);
    let lo = poly.iter().position(|z| z.norm() > tol).unwrap_or(0);
    let p = &poly[lo..=hi];
    let deg = p.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = p[deg];
    let companion = ComplexMatrix::from_fn(deg, deg, |i, j| {
        if j == deg - 1 {
            -p[i] / lead
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            ZERO
        }
    });
    Ok(linalg::eigenvalues(&companion)?
        .into_iter()
        .filter(|z| (z.norm() - 1.0).abs() < ROOT_BAND)
        .map(|z| wrap_angle(z.arg()))
        .collect())
}

/// Global maximizer of `r` over `(-π, π]`.
///
/// Candidates are the unit-circle roots of the stationarity polynomial plus
/// the best point of a [`FALLBACK_GRID`]-point grid; the winner is polished by
/// a few guarded Newton steps. Ties go to the smallest `|ω|`.
pub fn max_unit_circle(r: &TrigPolyRatio) -> Result<UnitCircleMax> {
    if r.num.iter().all(|z| *z == ZERO) {
        return Ok(UnitCircleMax {
            omega: 0.0,
            value: 0.0,
            degenerate: true,
            roots_used: 0,
        });
    }
    let stat = r.stationarity_laurent();
    let roots = unit_circle_roots(&stat.c)?;
    let roots_used = roots.len();

    let grid = r.eval_grid(FALLBACK_GRID);
    let (gi, _) = grid
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });

    let mut candidates: Vec<(f64, f64)> = roots
        .into_iter()
        .chain(std::iter::once(grid_angle(gi, FALLBACK_GRID)))
        .map(|w| (w, r.eval(w)))
        .collect();

    // Newton polish of the strongest candidates on the stationarity numerator.
    let best_val = candidates.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let deriv = stat.derivative();
    let polished: Vec<(f64, f64)> = candidates
        .iter()
        .filter(|c| c.1 >= best_val * (1.0 - 1e-6))
        .map(|&(w0, v0)| {
            let (mut w, mut v) = (w0, v0);
            for _ in 0..8 {
                let d1 = deriv.eval(w).re;
                if d1 == 0.0 {
                    break;
                }
                let step = stat.eval(w).re / d1;
                if !step.is_finite() || step.abs() > 1e-2 {
                    break;
                }
                let wn = wrap_angle(w - step);
                let vn = r.eval(wn);
                if vn < v - TIE_RTOL * v.abs() {
                    break;
                }
                w = wn;
                v = vn;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            (w, v)
        })
        .collect();
    candidates.extend(polished);

    // Near a peak the objective is flat to rounding, so copies of one peak
    // tie on value; keep the copy closest to stationarity and apply the
    // smallest-|ω| rule only between distinct peaks.
    let top = candidates.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let newton_step = |w: f64| (stat.eval(w).re / deriv.eval(w).re).abs();
    let mut contenders: Vec<(f64, f64, f64)> = candidates
        .into_iter()
        .filter(|c| c.1 >= top - TIE_RTOL * top.abs())
        .map(|(w, v)| (w, v, newton_step(w)))
        .collect();
    contenders.sort_by(|a, b| a.2.total_cmp(&b.2).then(b.1.total_cmp(&a.1)));
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    for (w, v, _) in contenders {
        if peaks.iter().all(|p| angular_distance(p.0, w) > SAME_PEAK) {
            peaks.push((w, v));
        }
    }
    let (omega, value) = peaks
        .into_iter()
        .min_by(|a, b| a.0.abs().total_cmp(&b.0.abs()).then(b.1.total_cmp(&a.1)))
        .expect("grid candidate always present");
    Ok(UnitCircleMax {
        omega,
        value,
        degenerate: false,
        roots_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_ratio(rng: &mut ChaCha8Rng, num_deg: usize, den_deg: usize) -> TrigPolyRatio {
        let num: Vec<Complex64> = (0..=num_deg)
            .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        // g = |h|² + ε is positive by construction
        let h: Vec<Complex64> = (0..=den_deg)
            .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let mut den: Vec<Complex64> = (0..=den_deg)
            .map(|d| (0..=den_deg - d).map(|k| h[k + d] * h[k].conj()).sum())
            .collect();
        den[0] += c(0.05, 0.0);
        TrigPolyRatio::new(num, den).unwrap()
    }

    fn dense_max(r: &TrigPolyRatio, n: usize) -> f64 {
        (0..n)
            .map(|i| r.eval(-PI + 2.0 * PI * i as f64 / n as f64))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn one_plus_z() {
        let r = TrigPolyRatio::new(vec![c(1., 0.), c(1., 0.)], vec![]).unwrap();
        let m = max_unit_circle(&r).unwrap();
        assert!(m.omega.abs() < 1e-12);
        assert!((m.value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn one_plus_z_squared_tie_prefers_zero() {
        let r = TrigPolyRatio::new(vec![c(1., 0.), c(0., 0.), c(1., 0.)], vec![]).unwrap();
        let m = max_unit_circle(&r).unwrap();
        assert!((m.value - 4.0).abs() < 1e-12);
        assert!(m.omega.abs() < 1e-9, "omega {}", m.omega);
    }

    #[test]
    fn random_degree7_beats_dense_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let r = random_ratio(&mut rng, 7, 3);
            let m = max_unit_circle(&r).unwrap();
            let grid = dense_max(&r, 1_000_000);
            assert!(m.value >= grid - 1e-9, "{} < {}", m.value, grid);
            assert!((r.eval(m.omega) - m.value).abs() <= 1e-12 * m.value);
        }
    }

    #[test]
    fn zero_numerator_is_flagged() {
        let r = TrigPolyRatio::new(vec![c(0., 0.); 3], vec![]).unwrap();
        let m = max_unit_circle(&r).unwrap();
        assert!(m.degenerate);
        assert_eq!((m.omega, m.value), (0.0, 0.0));
    }

    #[test]
    fn rejects_nonpositive_denominator() {
        // g(ω) = 2cos ω changes sign
        let bad = TrigPolyRatio::new(vec![c(1., 0.)], vec![c(0., 0.), c(1., 0.)]);
        assert!(matches!(bad, Err(Error::InvalidRatio(_))));
    }

    #[test]
    fn linear_family_matches_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let basis = ComplexMatrix::from_fn(6, 4, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>()));
        let y: Vec<Complex64> = (0..6).map(|_| c(rng.random::<f64>(), rng.random::<f64>() - 0.5)).collect();
        let r = TrigPolyRatio::from_linear_family(&basis, &y).unwrap();
        for &w in &[-2.0, -0.3, 0.0, 1.1, 3.0] {
            let s = basis.apply(&crate::harmonic::vandermonde(w, 4)).unwrap();
            let inner: Complex64 = s.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
            let want = inner.norm_sqr() / crate::tensor::norm_sqr(&s);
            assert!((r.eval(w) - want).abs() < 1e-12 * want.max(1.0));
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let r = random_ratio(&mut rng, 6, 3);
            let w: f64 = rng.random_range(-PI..PI);
            let h = 1e-6;
            let fd = (r.eval(w + h) - r.eval(w - h)) / (2.0 * h);
            let scale = r.eval(w).max(1e-12);
            assert!((r.derivative_at(w) - fd).abs() < 1e-6 * scale, "{} vs {fd}", r.derivative_at(w));
        }
    }

    #[test]
    fn grid_evaluation_matches_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = random_ratio(&mut rng, 12, 2);
        let n = 40;
        let g = r.eval_grid(n);
        for (i, v) in g.iter().enumerate() {
            let w = grid_angle(i, n);
            assert!((r.eval(w) - v).abs() < 1e-10 * v.max(1.0));
        }
        // 8 < 13 coefficients: exercises folding
        let f = eval_on_grid(r.numerator(), 8);
        for (i, v) in f.iter().enumerate() {
            assert!((r.numerator_at(grid_angle(i, 8)) - v).norm() < 1e-12);
        }
    }
}
