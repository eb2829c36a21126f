use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Pilot, PilotDigital, PilotHybrid};
use crate::error::{Error, Result};
use crate::tensor::ComplexTensor;

/// `len` i.i.d. circular complex Gaussian samples of variance `n0`.
pub fn complex_noise(len: usize, n0: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = (n0 / 2.0).sqrt();
    (0..len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im) * scale
        })
        .collect()
}

fn add_noise(y: &mut ComplexTensor, n0: f64, seed: u64) -> Result<()> {
    if !(n0 >= 0.0 && n0.is_finite()) {
        return Err(Error::Config(format!("noise variance must be finite and nonnegative, got {n0}")));
    }
    if n0 > 0.0 {
        let w = complex_noise(y.len(), n0, seed);
        for (z, e) in y.data_mut().iter_mut().zip(w) {
            *z += e;
        }
    }
    Ok(())
}

/// Noisy digital reception. Returns `(y, a)` where `a[n,t,u] = y[n,t,u] / s[n,t]`.
pub fn receive_digital(
    h: &ComplexTensor,
    pilot: &PilotDigital,
    n0: f64,
    seed: u64,
) -> Result<(ComplexTensor, ComplexTensor)> {
    let mut y = pilot.noiseless(h)?;
    add_noise(&mut y, n0, seed)?;
    let mut a = y.clone();
    let [n_c, n_s, n_r] = [y.dims()[0], y.dims()[1], y.dims()[2]];
    for u in 0..n_r {
        for t in 0..n_s {
            for n in 0..n_c {
                let s = pilot.s[(n, t)];
                if s.norm_sqr() == 0.0 {
                    return Err(Error::PilotDesign(format!("zero pilot symbol at ({n}, {t})")));
                }
                a.set(&[n, t, u], y.at3(n, t, u) / s);
            }
        }
    }
    Ok((y, a))
}

/// Noisy hybrid reception, an `n_c × n_s × d_r` tensor.
pub fn receive_hybrid(h: &ComplexTensor, pilot: &PilotHybrid, n0: f64, seed: u64) -> Result<ComplexTensor> {
    let mut y = pilot.noiseless(h)?;
    add_noise(&mut y, n0, seed)?;
    Ok(y)
}

/// Noise variance that puts the mean noiseless received power `snr_db` above it.
pub fn snr_to_n0(h: &ComplexTensor, pilot: &dyn Pilot, snr_db: f64) -> Result<f64> {
    if snr_db.is_nan() {
        return Err(Error::Config("SNR is NaN".into()));
    }
    let y = pilot.noiseless(h)?;
    let power = y.frobenius().powi(2) / y.len() as f64;
    if power == 0.0 {
        return Err(Error::ZeroSignal);
    }
    Ok(power / 10f64.powf(snr_db / 10.0))
}
