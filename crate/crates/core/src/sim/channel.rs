use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{ChannelParamSet, PathParams, SystemDims};
use crate::error::{Error, Result};
use crate::harmonic::{angular_distance, vandermonde, wrap_angle};
use crate::tensor::ComplexTensor;

pub const MAX_SEPARATION_ATTEMPTS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelGenConfig {
    pub l: usize,
    /// Rician ν of the path-gain magnitude.
    pub rician_noncentrality: f64,
    /// Rician σ of the path-gain magnitude.
    pub rician_scale: f64,
    /// Extra gain on the strongest path, in dB.
    pub los_boost_db: f64,
    /// Minimum wrapped distance between any two paths in every angular
    /// dimension; 0 disables the check.
    pub min_separation: f64,
    pub seed: u64,
}

impl Default for ChannelGenConfig {
    fn default() -> Self {
        Self {
            l: 10,
            rician_noncentrality: 1e-6,
            rician_scale: 5e-6,
            los_boost_db: 10.0,
            min_separation: 0.0,
            seed: 0,
        }
    }
}

fn rician(rng: &mut ChaCha8Rng, nu: f64, sigma: f64) -> f64 {
    let x: f64 = StandardNormal.sample(rng);
    let y: f64 = StandardNormal.sample(rng);
    (nu + sigma * x).hypot(sigma * y)
}

fn uniform_angle(rng: &mut ChaCha8Rng) -> f64 {
    wrap_angle(rng.random_range(-PI..PI))
}

/// Draws `cfg.l` paths: frequencies i.i.d. uniform, Rician magnitudes, uniform
/// phases, and the strongest path boosted by `cfg.los_boost_db`.
pub fn draw_channel(cfg: &ChannelGenConfig) -> Result<ChannelParamSet> {
    if !(cfg.rician_scale > 0.0 && cfg.rician_noncentrality >= 0.0 && cfg.min_separation >= 0.0) {
        return Err(Error::Config(format!("invalid channel generator settings: {cfg:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut freqs: Vec<[f64; 4]> = Vec::with_capacity(cfg.l);
    let mut attempts = 0;
    while freqs.len() < cfg.l {
        let cand = [
            uniform_angle(&mut rng),
            uniform_angle(&mut rng),
            uniform_angle(&mut rng),
            uniform_angle(&mut rng),
        ];
        let separated = cfg.min_separation == 0.0
            || freqs.iter().all(|f| {
                f.iter()
                    .zip(&cand)
                    .all(|(a, b)| angular_distance(*a, *b) >= cfg.min_separation)
            });
        if separated {
            freqs.push(cand);
        } else {
            attempts += 1;
            if attempts >= MAX_SEPARATION_ATTEMPTS {
                return Err(Error::SeparationInfeasible(attempts));
            }
        }
    }
    let mut paths: Vec<PathParams> = freqs
        .into_iter()
        .map(|[omega1, omega2, psi, varsigma]| {
            let mag = rician(&mut rng, cfg.rician_noncentrality, cfg.rician_scale);
            let phase = uniform_angle(&mut rng);
            PathParams {
                b: Complex64::from_polar(mag, phase),
                omega1,
                omega2,
                psi,
                varsigma,
            }
        })
        .collect();
    if let Some(strongest) = paths
        .iter_mut()
        .max_by(|x, y| x.b.norm().total_cmp(&y.b.norm()))
    {
        strongest.b *= 10f64.powf(cfg.los_boost_db / 20.0);
    }
    Ok(ChannelParamSet::new(paths))
}

/// Order-4 channel tensor `h[n,t,u,v] = Σ_ℓ b_ℓ e^{j(nω₁ + tω₂ + uψ + vς)}`.
pub fn channel_tensor(p: &ChannelParamSet, d: &SystemDims) -> ComplexTensor {
    let dims = d.channel_dims();
    let mut h = ComplexTensor::zeros(&dims);
    for path in &p.paths {
        let f1: Vec<Complex64> = vandermonde(path.omega1, d.n_c)
            .into_iter()
            .map(|z| z * path.b)
            .collect();
        let f2 = vandermonde(path.omega2, d.n_s);
        let f3 = vandermonde(path.psi, d.n_r);
        let f4 = vandermonde(path.varsigma, d.n_t);
        let data = h.data_mut();
        let mut lin = 0;
        for z4 in &f4 {
            for z3 in &f3 {
                let w34 = z3 * z4;
                for z2 in &f2 {
                    let w = z2 * w34;
                    for z1 in &f1 {
                        data[lin] += z1 * w;
                        lin += 1;
                    }
                }
            }
        }
    }
    h
}
