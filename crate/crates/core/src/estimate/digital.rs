use std::time::Instant;

use num_complex::Complex64;

use super::{assemble, elapsed_ms, fit_mode, front, jade, per_path, EstimationResult, EstimatorConfig, JadeFit, PathFit};
use crate::cp::CpFactors;
use crate::error::{Error, Result};
use crate::harmonic::{esprit_tone, vandermonde, AcdConfig};
use crate::sim::{ChannelParamSet, PathParams, PilotDigital, SystemDims};
use crate::tensor::ComplexTensor;

/// Least-squares Doppler/AoD factor of one rank-1 component given the
/// rebuilt ToF and AoA steering vectors.
pub fn refine_a2(component: &ComplexTensor, a1_hat: &[Complex64], a3_hat: &[Complex64]) -> Result<Vec<Complex64>> {
    fit_mode(component, 1, a1_hat, a3_hat)
}

/// Joint Doppler/AoD search on the refined time factor; `omega` of the
/// result is ω₂.
pub fn jade_digital(a2_hat: &[Complex64], pilot: &PilotDigital, cfg: &AcdConfig) -> Result<JadeFit> {
    jade(&pilot.p, a2_hat, cfg)
}

fn branch(f: &CpFactors, l: usize, pilot: &PilotDigital, cfg: &EstimatorConfig) -> Result<PathFit> {
    let (a1, a2, a3) = (f.a1.column(l), f.a2.column(l), f.a3.column(l));
    let omega1 = esprit_tone(a1)?;
    let psi = esprit_tone(a3)?;
    let v1 = vandermonde(omega1, a1.len());
    let v3 = vandermonde(psi, a3.len());
    let a2_hat = if cfg.refine {
        refine_a2(&f.component(l)?, &v1, &v3)?
    } else {
        // Rebuilt steering vectors start at 1, so matching the leading
        // entries moves the CP scale into a2.
        let s = a1[0] * a3[0];
        a2.iter().map(|z| z * s).collect()
    };
    let fit = jade_digital(&a2_hat, pilot, &cfg.acd)?;
    Ok(PathFit {
        params: PathParams {
            b: fit.b,
            omega1,
            omega2: fit.omega,
            psi,
            varsigma: fit.varsigma,
        },
        objective: fit.objective,
        sweeps: fit.sweeps,
    })
}

/// Path parameters from a given CP model of the digital observation,
/// sorted by descending `|b|`.
pub fn estimate_digital_paths(f: &CpFactors, pilot: &PilotDigital, cfg: &EstimatorConfig) -> Result<ChannelParamSet> {
    let mut fits = per_path(f.rank(), cfg.parallel, |l| branch(f, l, pilot, cfg))?;
    fits.sort_by(|x, y| y.params.b.norm().total_cmp(&x.params.b.norm()));
    Ok(ChannelParamSet::new(fits.into_iter().map(|f| f.params).collect()))
}

/// Full single-stream pipeline on the pilot-compensated observation `a`
/// (`n_c × n_s × n_r`).
pub fn estimate_digital(a: &ComplexTensor, pilot: &PilotDigital, cfg: &EstimatorConfig) -> Result<EstimationResult> {
    let started = Instant::now();
    let d = a.dims();
    if d.len() != 3 || d[0] != pilot.s.rows() || d[1] != pilot.s.cols() || pilot.p.rows() != d[1] {
        return Err(Error::ShapeMismatch(format!(
            "observation {d:?} does not match digital pilot ({}×{} grid, {}×{} precoder)",
            pilot.s.rows(),
            pilot.s.cols(),
            pilot.p.rows(),
            pilot.p.cols()
        )));
    }
    let dims = SystemDims::digital(d[0], d[1], d[2], pilot.p.cols());
    let fr = front(a, &cfg.cp)?;
    let clock = Instant::now();
    let fits = match &fr.factors {
        Some(f) => per_path(f.rank(), cfg.parallel, |l| branch(f, l, pilot, cfg))?,
        None => Vec::new(),
    };
    let per_path_ms = elapsed_ms(clock);
    Ok(assemble(fr, fits, &dims, per_path_ms, started))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::{jade_objective, relative_error};
    use crate::harmonic::angular_distance;
    use crate::sim::{
        channel_tensor, complex_noise, make_pilot_digital, receive_digital, snr_to_n0, ChannelGenConfig,
    };
    use crate::sim::draw_channel;
    use crate::tensor::{rank1_compose, ComplexMatrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        (0..n)
            .map(|_| c(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect()
    }

    #[test]
    fn refine_a2_recovers_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a1 = vandermonde(0.3, 5);
        let a3 = vandermonde(-1.2, 4);
        let a2 = gaussian(6, &mut rng);
        let t = rank1_compose(&[&a1, &a2, &a3]).unwrap();
        let got = refine_a2(&t, &a1, &a3).unwrap();
        for (x, y) in got.iter().zip(&a2) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn refine_a2_with_impulse_steering_selects_slice() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = ComplexTensor::new(vec![3, 4, 2], gaussian(24, &mut rng)).unwrap();
        let e3 = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let e2 = [c(1.0, 0.0), c(0.0, 0.0)];
        let got = refine_a2(&t, &e3, &e2).unwrap();
        for (tt, g) in got.iter().enumerate() {
            assert_eq!(*g, t.at3(0, tt, 0));
        }
    }

    #[test]
    fn jade_digital_noiseless_synthesis() {
        let d = SystemDims::digital(4, 16, 4, 4);
        let pilot = make_pilot_digital(&d, 0);
        let (w2, vs, b) = (1.1, -2.3, c(0.4, -0.9));
        let a2 = crate::estimate::steering(&pilot.p, w2, vs)
            .into_iter()
            .map(|z| z * b)
            .collect::<Vec<_>>();
        let fit = jade_digital(&a2, &pilot, &AcdConfig::default()).unwrap();
        assert!(angular_distance(fit.omega, w2) < 1e-6);
        assert!(angular_distance(fit.varsigma, vs) < 1e-6);
        assert!((fit.b - b).norm() < 1e-6 * b.norm());
    }

    #[test]
    fn jade_digital_near_bin_aod_with_extra_starts() {
        // ς close to a DFT bin leaves energy on every 4th symbol only, so the
        // objective nearly repeats every π/2 in ω₂.
        let d = SystemDims::digital(4, 16, 4, 4);
        let pilot = make_pilot_digital(&d, 0);
        let (w2, vs, b) = (-2.4385, -0.0572, c(1.6, -3.3));
        let a2: Vec<Complex64> = crate::estimate::steering(&pilot.p, w2, vs)
            .into_iter()
            .map(|z| z * b)
            .collect();
        let cfg = AcdConfig {
            starts: 4,
            ..Default::default()
        };
        let fit = jade_digital(&a2, &pilot, &cfg).unwrap();
        assert!(angular_distance(fit.omega, w2) < 1e-8, "{}", fit.omega);
        assert!(angular_distance(fit.varsigma, vs) < 1e-8, "{}", fit.varsigma);
        let alias = jade_objective(&pilot.p, &a2, w2 + std::f64::consts::PI, vs);
        assert!(alias > 0.95 * fit.objective && alias < fit.objective);
    }

    #[test]
    fn jade_digital_flat_pilot_at_origin() {
        let p = ComplexMatrix::from_fn(6, 3, |_, _| c(1.0, 0.0));
        let pilot = PilotDigital {
            p,
            s: ComplexMatrix::from_fn(2, 6, |_, _| c(1.0, 0.0)),
        };
        // α_t(ω₂, ς) = e^{jtω₂}·D(ς) with D(ς) = Σ_v e^{jvς}: ς drops out of the
        // objective and only b·D(ς) is identifiable.
        let alpha = crate::estimate::steering(&pilot.p, 0.0, 0.0);
        assert!(alpha.iter().all(|z| (z - 3.0).norm() < 1e-15));
        let a2 = vec![c(6.0, 3.0); 6];
        let fit = jade_digital(&a2, &pilot, &AcdConfig::default()).unwrap();
        assert!(fit.omega.abs() < 1e-8);
        let mean = a2.iter().sum::<Complex64>() / 6.0;
        let gain: Complex64 = vandermonde(fit.varsigma, 3).iter().sum();
        assert!((fit.b * gain - mean).norm() < 1e-9);
    }

    #[test]
    fn jade_digital_dominates_truth_under_noise() {
        let d = SystemDims::digital(4, 16, 4, 4);
        let pilot = make_pilot_digital(&d, 1);
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (w2, vs) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let noise = complex_noise(16, 0.5, seed + 100);
            let a2: Vec<Complex64> = crate::estimate::steering(&pilot.p, w2, vs)
                .into_iter()
                .zip(noise)
                .map(|(z, e)| z + e)
                .collect();
            let fit = jade_digital(&a2, &pilot, &AcdConfig::default()).unwrap();
            let at_truth = jade_objective(&pilot.p, &a2, w2, vs);
            assert!(fit.objective >= at_truth * (1.0 - 1e-12), "seed {seed}");
        }
    }
    use rand::Rng;

    fn single_path() -> ChannelParamSet {
        ChannelParamSet::new(vec![PathParams {
            b: c(0.8, -0.5),
            omega1: 0.9,
            omega2: -0.4,
            psi: 2.1,
            varsigma: -1.3,
        }])
    }

    #[test]
    fn single_path_noiseless_recovery() {
        let d = SystemDims::digital(16, 16, 16, 4);
        let truth = single_path();
        let h = channel_tensor(&truth, &d);
        let pilot = make_pilot_digital(&d, 7);
        let (_, a) = receive_digital(&h, &pilot, 0.0, 0).unwrap();
        let est = estimate_digital(&a, &pilot, &EstimatorConfig::default()).unwrap();
        assert_eq!(est.l_hat, 1);
        let (p, q) = (&est.params.paths[0], &truth.paths[0]);
        for (x, y) in p.frequencies().iter().zip(q.frequencies()) {
            assert!(angular_distance(*x, y) < 1e-6);
        }
        assert!((p.b - q.b).norm() < 1e-6 * q.b.norm());
        assert!(relative_error(&h, &est.h_hat).unwrap() < 1e-8);
    }

    #[test]
    fn three_paths_noiseless() {
        let d = SystemDims::digital(16, 16, 16, 4);
        let truth = draw_channel(&ChannelGenConfig {
            l: 3,
            min_separation: 0.5,
            seed: 5,
            ..Default::default()
        })
        .unwrap();
        let h = channel_tensor(&truth, &d);
        let pilot = make_pilot_digital(&d, 1);
        let (_, a) = receive_digital(&h, &pilot, 0.0, 0).unwrap();
        let est = estimate_digital(&a, &pilot, &EstimatorConfig::default()).unwrap();
        assert_eq!(est.l_hat, 3);
        assert!(relative_error(&h, &est.h_hat).unwrap() < 1e-4);
    }

    #[test]
    fn zero_observation_gives_empty_result() {
        let d = SystemDims::digital(4, 4, 4, 2);
        let pilot = make_pilot_digital(&d, 0);
        let est = estimate_digital(&ComplexTensor::zeros(&[4, 4, 4]), &pilot, &EstimatorConfig::default()).unwrap();
        assert_eq!(est.l_hat, 0);
        assert!(est.params.is_empty());
        assert_eq!(est.h_hat.frobenius(), 0.0);
        assert_eq!(est.h_hat.dims(), &[4, 4, 4, 2]);
    }

    #[test]
    fn result_is_schedule_independent() {
        let d = SystemDims::digital(12, 12, 8, 4);
        let truth = draw_channel(&ChannelGenConfig { l: 3, seed: 9, ..Default::default() }).unwrap();
        let h = channel_tensor(&truth, &d);
        let pilot = make_pilot_digital(&d, 0);
        let n0 = snr_to_n0(&h, &pilot, 20.0).unwrap();
        let (_, a) = receive_digital(&h, &pilot, n0, 1).unwrap();
        let par = estimate_digital(&a, &pilot, &EstimatorConfig::default()).unwrap();
        let seq = estimate_digital(&a, &pilot, &EstimatorConfig { parallel: false, ..Default::default() }).unwrap();
        assert_eq!(par.params, seq.params);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let pilot = make_pilot_digital(&SystemDims::digital(4, 4, 4, 2), 0);
        let r = estimate_digital(&ComplexTensor::zeros(&[4, 5, 4]), &pilot, &EstimatorConfig::default());
        assert!(matches!(r, Err(Error::ShapeMismatch(_))));
    }
}
