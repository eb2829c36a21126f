use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::trig::{grid_angle, max_unit_circle, TrigPolyRatio};
use super::wrap_angle;
use crate::error::{Error, Result};

/// An exact line-search result is taken unless it lowers the objective by more
/// than this fraction; near a peak the objective is flat to rounding over a
/// range of about √ε, and the stationary point is the better estimate.
const ACCEPT_RTOL: f64 = 1e-13;

/// Newton iterations after the sweeps; coordinate steps crawl along a tilted
/// ridge once their gains drop below rounding.
const POLISH_STEPS: usize = 4;

/// Which of the two frequencies a slice varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coordinate {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AcdConfig {
    pub max_sweeps: usize,
    /// Stop when a full sweep improves the objective by less than this fraction.
    pub rel_tol: f64,
    pub starts: usize,
    /// Initialization grid points per dimension, as a multiple of the slice length.
    pub grid_oversample: usize,
    pub seed: u64,
}

impl Default for AcdConfig {
    fn default() -> Self {
        Self {
            max_sweeps: 50,
            rel_tol: 1e-10,
            starts: 1,
            grid_oversample: 8,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AcdResult {
    pub omega_a: f64,
    pub omega_b: f64,
    pub objective: f64,
    pub sweeps: usize,
    /// Objective after initialization and after every coordinate update of the
    /// winning start.
    pub trace: Vec<f64>,
}

fn slice_len(r: &TrigPolyRatio) -> usize {
    r.numerator().len().max(r.denominator().len()).max(1)
}

/// Local maxima of a periodic 2-D grid (row index = coordinate A), best first.
fn grid_peaks(values: &[f64], na: usize, nb: usize) -> Vec<(usize, usize, f64)> {
    let at = |i: usize, j: usize| values[i + na * j];
    let mut peaks = Vec::new();
    for j in 0..nb {
        for i in 0..na {
            let v = at(i, j);
            let is_peak = [(na - 1, 0), (1, 0), (0, nb - 1), (0, 1), (na - 1, nb - 1), (1, 1), (na - 1, 1), (1, nb - 1)]
                .iter()
                .all(|&(di, dj)| v >= at((i + di) % na, (j + dj) % nb));
            if is_peak {
                peaks.push((i, j, v));
            }
        }
    }
    peaks.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.1, a.0).cmp(&(b.1, b.0))));
    peaks
}

/// Maximizes a two-frequency objective by alternating exact line searches.
///
/// `build_slice(coord, fixed)` must return the exact one-dimensional slice of
/// the objective along `coord` with the other frequency held at `fixed`.
/// Initialization evaluates the objective on a grid of `grid_oversample ×`
/// slice-length points per dimension; extra starts come from the next-best
/// grid peaks (or seeded random grid points when peaks run out). Each sweep
/// searches the coordinate with the coarser grid first. An update is rejected
/// if it would lower the objective beyond rounding. A few Newton steps on the
/// exact gradient finish each start.
pub fn acd_2d<F>(build_slice: F, cfg: &AcdConfig) -> Result<AcdResult>
where
    F: Fn(Coordinate, f64) -> Result<TrigPolyRatio> + Sync,
{
    if cfg.max_sweeps == 0 || cfg.starts == 0 || cfg.grid_oversample == 0 || cfg.rel_tol.is_nan() {
        return Err(Error::Config("ACD parameters must be positive".into()));
    }
    let na = cfg.grid_oversample * slice_len(&build_slice(Coordinate::A, 0.0)?);
    let nb = cfg.grid_oversample * slice_len(&build_slice(Coordinate::B, 0.0)?);

    let rows: Vec<Vec<f64>> = (0..nb)
        .into_par_iter()
        .map(|j| Ok(build_slice(Coordinate::A, grid_angle(j, nb))?.eval_grid(na)))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = rows.into_iter().flatten().collect();

    let peaks = grid_peaks(&values, na, nb);
    let mut starts: Vec<(f64, f64)> = peaks
        .iter()
        .take(cfg.starts)
        .map(|&(i, j, _)| (grid_angle(i, na), grid_angle(j, nb)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while starts.len() < cfg.starts {
        let (i, j) = (rng.random_range(0..na), rng.random_range(0..nb));
        starts.push((grid_angle(i, na), grid_angle(j, nb)));
    }

    let runs: Vec<AcdResult> = starts
        .into_par_iter()
        .map(|start| ascend(&build_slice, start, nb <= na, cfg))
        .collect::<Result<_>>()?;
    Ok(runs
        .into_iter()
        .enumerate()
        .max_by(|(ia, x), (ib, y)| match x.objective.total_cmp(&y.objective) {
            Ordering::Equal => ib.cmp(ia),
            o => o,
        })
        .map(|(_, r)| r)
        .expect("at least one start"))
}

fn ascend<F>(build_slice: &F, start: (f64, f64), b_first: bool, cfg: &AcdConfig) -> Result<AcdResult>
where
    F: Fn(Coordinate, f64) -> Result<TrigPolyRatio>,
{
    let (mut a, mut b) = start;
    let mut value = build_slice(Coordinate::A, b)?.eval(a);
    let mut trace = vec![value];
    let order = if b_first {
        [Coordinate::B, Coordinate::A]
    } else {
        [Coordinate::A, Coordinate::B]
    };
    let mut sweeps = 0;
    while sweeps < cfg.max_sweeps {
        sweeps += 1;
        let before = value;
        for coord in order {
            let (slot, fixed) = match coord {
                Coordinate::A => (&mut a, b),
                Coordinate::B => (&mut b, a),
            };
            let m = max_unit_circle(&build_slice(coord, fixed)?)?;
            if m.value >= value - ACCEPT_RTOL * value.abs() {
                *slot = m.omega;
                value = m.value;
            }
            trace.push(value);
        }
        if value - before <= cfg.rel_tol * before.abs() {
            break;
        }
    }
    let h = 1e-3 / slice_len(&build_slice(Coordinate::A, b)?).max(slice_len(&build_slice(Coordinate::B, a)?)) as f64;
    for _ in 0..POLISH_STEPS {
        let Some((da, db)) = newton_step(build_slice, a, b, h)? else { break };
        let (na, nb) = (wrap_angle(a + da), wrap_angle(b + db));
        let v = build_slice(Coordinate::A, nb)?.eval(na);
        if v < value - ACCEPT_RTOL * value.abs() {
            break;
        }
        (a, b, value) = (na, nb, v);
        trace.push(value);
        if da.abs().max(db.abs()) < 1e-15 {
            break;
        }
    }
    Ok(AcdResult {
        omega_a: a,
        omega_b: b,
        objective: value,
        sweeps,
        trace,
    })
}

fn gradient<F>(build_slice: &F, a: f64, b: f64) -> Result<[f64; 2]>
where
    F: Fn(Coordinate, f64) -> Result<TrigPolyRatio>,
{
    Ok([
        build_slice(Coordinate::A, b)?.derivative_at(a),
        build_slice(Coordinate::B, a)?.derivative_at(b),
    ])
}

/// Newton step on the exact gradient with a differenced Hessian; `None` away
/// from a nondegenerate maximum or when the step leaves the local basin.
fn newton_step<F>(build_slice: &F, a: f64, b: f64, h: f64) -> Result<Option<(f64, f64)>>
where
    F: Fn(Coordinate, f64) -> Result<TrigPolyRatio>,
{
    let g = gradient(build_slice, a, b)?;
    let (ap, am) = (gradient(build_slice, a + h, b)?, gradient(build_slice, a - h, b)?);
    let (bp, bm) = (gradient(build_slice, a, b + h)?, gradient(build_slice, a, b - h)?);
    let haa = (ap[0] - am[0]) / (2.0 * h);
    let hbb = (bp[1] - bm[1]) / (2.0 * h);
    let hab = 0.5 * ((ap[1] - am[1]) + (bp[0] - bm[0])) / (2.0 * h);
    let det = haa * hbb - hab * hab;
    if !(haa < 0.0 && det > 0.0) {
        return Ok(None);
    }
    let da = -(hbb * g[0] - hab * g[1]) / det;
    let db = -(haa * g[1] - hab * g[0]) / det;
    if !(da.is_finite() && db.is_finite()) || da.abs().max(db.abs()) > 10.0 * h {
        return Ok(None);
    }
    Ok(Some((da, db)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::vandermonde;
    use num_complex::Complex64;

    /// |Σ_t c_t e^{jtω_a}|² · |Σ_v d_v e^{jvω_b}|² with peaks at (pa, pb).
    fn separable(pa: f64, pb: f64) -> impl Fn(Coordinate, f64) -> Result<TrigPolyRatio> + Sync {
        let c: Vec<Complex64> = vandermonde(-pa, 6);
        let d: Vec<Complex64> = vandermonde(-pb, 5);
        move |coord, fixed| {
            let (vary, other) = match coord {
                Coordinate::A => (&c, &d),
                Coordinate::B => (&d, &c),
            };
            let gain: Complex64 = other
                .iter()
                .enumerate()
                .map(|(k, x)| x * Complex64::from_polar(1.0, k as f64 * fixed))
                .sum();
            TrigPolyRatio::new(vary.iter().map(|x| x * gain).collect(), vec![])
        }
    }

    #[test]
    fn separable_peak_in_one_sweep() {
        let r = acd_2d(separable(0.5, -1.1), &AcdConfig::default()).unwrap();
        assert!((r.omega_a - 0.5).abs() < 1e-8, "{}", r.omega_a);
        assert!((r.omega_b + 1.1).abs() < 1e-8, "{}", r.omega_b);
        assert!(r.sweeps <= 2);
        assert!((r.objective - 900.0).abs() < 1e-8);
    }

    #[test]
    fn trace_is_monotone() {
        let r = acd_2d(separable(2.0, 3.0), &AcdConfig { starts: 3, ..Default::default() }).unwrap();
        for w in r.trace.windows(2) {
            assert!(w[1] >= w[0] * (1.0 - 1e-12));
        }
    }

    #[test]
    fn constant_objective_stays_put() {
        let r = acd_2d(
            |_, _| TrigPolyRatio::new(vec![Complex64::new(2.0, 0.0)], vec![]),
            &AcdConfig::default(),
        )
        .unwrap();
        assert_eq!(r.sweeps, 1);
        assert_eq!((r.omega_a, r.omega_b), (0.0, 0.0));
        assert!((r.objective - 4.0).abs() < 1e-15);
    }

    #[test]
    fn callback_errors_propagate() {
        let r = acd_2d(
            |_, _| Err(Error::PilotDesign("nope".into())),
            &AcdConfig::default(),
        );
        assert!(matches!(r, Err(Error::PilotDesign(_))));
    }
}
