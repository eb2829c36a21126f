use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::estimate::{jade_denominator, jade_slice, steering};
use crate::harmonic::{eval_on_grid, grid_angle, vandermonde, wrap_angle, Coordinate};
use crate::sim::{PathParams, PilotDigital, PilotHybrid};
use crate::tensor::{norm_sqr, ComplexMatrix, ComplexTensor};

/// Golden-section steps per frequency in the local refinement.
pub const GOLDEN_STEPS: usize = 20;

const REFINE_PASSES: usize = 2;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Observation and pilot of either front end.
#[derive(Clone, Copy, Debug)]
pub enum Observation<'a> {
    Digital {
        a: &'a ComplexTensor,
        pilot: &'a PilotDigital,
    },
    Hybrid {
        y: &'a ComplexTensor,
        pilot: &'a PilotHybrid,
    },
}

/// `(⟨s, t⟩, ‖s‖²)` for the separable steering `s = s1 ⊗ s2 ⊗ s3`.
fn correlate(t: &ComplexTensor, s1: &[Complex64], s2: &[Complex64], s3: &[Complex64]) -> (Complex64, f64) {
    let mut corr = ZERO;
    for (k, z3) in s3.iter().enumerate() {
        for (j, z2) in s2.iter().enumerate() {
            let w = (z2 * z3).conj();
            let inner: Complex64 = s1.iter().enumerate().map(|(i, z1)| z1.conj() * t.at3(i, j, k)).sum();
            corr += w * inner;
        }
    }
    (corr, norm_sqr(s1) * norm_sqr(s2) * norm_sqr(s3))
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0
}

/// Maximizes `f` on `[lo, hi]` by golden-section search.
fn golden(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, steps: usize) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..steps {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Objective over `[ω₁, ω₂, ψ, ς]` plus the matching gain.
struct Objective<'a> {
    eval: Box<dyn Fn(&[f64; 4]) -> (Complex64, f64) + 'a>,
}

impl Objective<'_> {
    fn value(&self, x: &[f64; 4]) -> f64 {
        let (corr, energy) = (self.eval)(x);
        if energy == 0.0 {
            0.0
        } else {
            corr.norm_sqr() / energy
        }
    }

    /// Cyclic golden-section refinement within one grid cell of every
    /// coordinate; a move is kept only if it raises the objective.
    fn refine(&self, mut x: [f64; 4], cell: f64) -> PathParams {
        let mut best = self.value(&x);
        for _ in 0..REFINE_PASSES {
            for d in 0..4 {
                let centre = x[d];
                let probe = |v: f64| {
                    let mut y = x;
                    y[d] = v;
                    self.value(&y)
                };
                let cand = golden(probe, centre - cell, centre + cell, GOLDEN_STEPS);
                let val = probe(cand);
                if val > best {
                    best = val;
                    x[d] = cand;
                }
            }
        }
        let (corr, energy) = (self.eval)(&x);
        PathParams {
            b: if energy == 0.0 { ZERO } else { corr / energy },
            omega1: wrap_angle(x[0]),
            omega2: wrap_angle(x[1]),
            psi: wrap_angle(x[2]),
            varsigma: wrap_angle(x[3]),
        }
    }
}

/// Best `(θ, ς)` grid point of the matched filter `|β(θ,ς)ᴴz|²/‖β‖²`.
fn jade_grid(m: &ComplexMatrix, z: &[Complex64], g: usize) -> Result<(f64, f64)> {
    let den = jade_denominator(m);
    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    for k in 0..g {
        let vs = grid_angle(k, g);
        let row = jade_slice(m, z, &den, Coordinate::A, vs)?.eval_grid(g);
        let i = argmax(&row);
        if row[i] > best.2 {
            best = (grid_angle(i, g), vs, row[i]);
        }
    }
    Ok((best.0, best.1))
}

fn check_grid(g: usize) -> Result<()> {
    if g < 4 {
        return Err(Error::Config(format!("oracle grid needs at least 4 points, got {g}")));
    }
    Ok(())
}

fn digital(a: &ComplexTensor, pilot: &PilotDigital, g: usize) -> Result<PathParams> {
    let d = a.dims();
    if d.len() != 3 || d[1] != pilot.p.rows() {
        return Err(Error::ShapeMismatch(format!("observation {d:?} does not match the digital pilot")));
    }
    let (n_c, n_s, n_r) = (d[0], d[1], d[2]);

    // (ω₁, ψ): energy over t of the 2-D periodogram of every (n, u) slice.
    let mut power = vec![0.0; g * g];
    for t in 0..n_s {
        let per_u: Vec<Vec<Complex64>> = (0..n_r)
            .map(|u| eval_on_grid(&(0..n_c).map(|n| a.at3(n, t, u).conj()).collect::<Vec<_>>(), g))
            .collect();
        for i in 0..g {
            let coeffs: Vec<Complex64> = per_u.iter().map(|f| f[i]).collect();
            for (k, z) in eval_on_grid(&coeffs, g).iter().enumerate() {
                power[i + g * k] += z.norm_sqr();
            }
        }
    }
    let best = argmax(&power);
    let (omega1, psi) = (grid_angle(best % g, g), grid_angle(best / g, g));

    // (ω₂, ς): joint matched filter on the (ω₁, ψ)-beamformed time series.
    let v1 = vandermonde(omega1, n_c);
    let v3 = vandermonde(psi, n_r);
    let z: Vec<Complex64> = (0..n_s)
        .map(|t| {
            let mut acc = ZERO;
            for (u, z3) in v3.iter().enumerate() {
                for (n, z1) in v1.iter().enumerate() {
                    acc += (z1 * z3).conj() * a.at3(n, t, u);
                }
            }
            acc
        })
        .collect();
    let (omega2, varsigma) = jade_grid(&pilot.p, &z, g)?;

    let obj = Objective {
        eval: Box::new(|x: &[f64; 4]| {
            correlate(a, &vandermonde(x[0], n_c), &steering(&pilot.p, x[1], x[3]), &vandermonde(x[2], n_r))
        }),
    };
    Ok(obj.refine([omega1, omega2, psi, varsigma], 2.0 * std::f64::consts::PI / g as f64))
}

fn hybrid(y: &ComplexTensor, pilot: &PilotHybrid, g: usize) -> Result<PathParams> {
    let d = y.dims();
    let x = pilot.transmitted();
    if d.len() != 3 || d[0] != x.rows() || d[2] != pilot.r.rows() {
        return Err(Error::ShapeMismatch(format!("observation {d:?} does not match the hybrid pilot")));
    }
    let (n_c, n_s, d_r) = (d[0], d[1], d[2]);
    let combined = |psi: f64| pilot.r.apply(&vandermonde(psi, pilot.r.cols())).expect("combiner width");

    // ω₂: periodogram along t summed over (n, m).
    let mut power = vec![0.0; g];
    for m in 0..d_r {
        for n in 0..n_c {
            let series: Vec<Complex64> = (0..n_s).map(|t| y.at3(n, t, m).conj()).collect();
            for (i, z) in eval_on_grid(&series, g).iter().enumerate() {
                power[i] += z.norm_sqr();
            }
        }
    }
    let omega2 = grid_angle(argmax(&power), g);

    // ψ: combiner-domain matched filter on the Doppler-compensated data.
    let v2 = vandermonde(omega2, n_s);
    let w = ComplexMatrix::from_fn(n_c, d_r, |n, m| (0..n_s).map(|t| v2[t].conj() * y.at3(n, t, m)).sum());
    let psi_power: Vec<f64> = (0..g)
        .map(|k| {
            let r = combined(grid_angle(k, g));
            let energy = norm_sqr(&r);
            if energy == 0.0 {
                return 0.0;
            }
            (0..n_c)
                .map(|n| (0..d_r).map(|m| r[m].conj() * w[(n, m)]).sum::<Complex64>().norm_sqr())
                .sum::<f64>()
                / energy
        })
        .collect();
    let psi = grid_angle(argmax(&psi_power), g);

    // (ω₁, ς): joint matched filter on the beamformed subcarrier series.
    let r = combined(psi);
    let z: Vec<Complex64> = (0..n_c).map(|n| (0..d_r).map(|m| r[m].conj() * w[(n, m)]).sum()).collect();
    let (omega1, varsigma) = jade_grid(&x, &z, g)?;

    let obj = Objective {
        eval: Box::new(|p: &[f64; 4]| correlate(y, &steering(&x, p[0], p[3]), &vandermonde(p[1], n_s), &combined(p[2]))),
    };
    Ok(obj.refine([omega1, omega2, psi, varsigma], 2.0 * std::f64::consts::PI / g as f64))
}

/// Brute-force single-path estimate: nested grid scans with
/// `grid_points_per_dim` points per frequency, each stage exact for one
/// noiseless path, then golden-section refinement of the full
/// four-frequency matched filter.
pub fn oracle_single_path(obs: Observation<'_>, grid_points_per_dim: usize) -> Result<PathParams> {
    check_grid(grid_points_per_dim)?;
    match obs {
        Observation::Digital { a, pilot } => digital(a, pilot, grid_points_per_dim),
        Observation::Hybrid { y, pilot } => hybrid(y, pilot, grid_points_per_dim),
    }
}
