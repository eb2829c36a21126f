use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SystemDims;
use crate::error::{Error, Result};
use crate::tensor::{ComplexMatrix, ComplexTensor};

/// A pilot/receiver pair that maps a channel tensor to a noiseless reception.
pub trait Pilot {
    fn noiseless(&self, h: &ComplexTensor) -> Result<ComplexTensor>;
}

/// Single-stream pilot `x[n,t,v] = p[t,v] · s[n,t]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PilotDigital {
    /// Time-varying precoder, `n_s × n_t`.
    pub p: ComplexMatrix,
    /// Unit-modulus resource grid, `n_c × n_s`.
    pub s: ComplexMatrix,
}

/// Multi-stream pilot with a t-constant precoder and subpanel combiner.
#[derive(Clone, Debug, PartialEq)]
pub struct PilotHybrid {
    /// Precoder, `n_t × d_t`; column `d` lives on Tx subpanel `d`.
    pub p: ComplexMatrix,
    /// Stream symbols, `n_c × d_t`; mutually orthogonal columns.
    pub s: ComplexMatrix,
    /// Combiner, `d_r × n_r`; row `m` lives on Rx subpanel `m`.
    pub r: ComplexMatrix,
}

fn unitary_dft(n: usize, row: usize, col: usize) -> Complex64 {
    Complex64::from_polar(
        1.0 / (n as f64).sqrt(),
        -2.0 * PI * ((row * col) % n) as f64 / n as f64,
    )
}

/// Seeded QPSK grid with a DFT precoder cycled over the frame: symbol `t`
/// uses row `t mod n_t` of the unitary `n_t`-point DFT.
pub fn make_pilot_digital(d: &SystemDims, seed: u64) -> PilotDigital {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = ComplexMatrix::from_fn(d.n_c, d.n_s, |_, _| {
        let k = rng.random_range(0..4u8);
        Complex64::from_polar(1.0, FRAC_PI_4 + f64::from(k) * FRAC_PI_2)
    });
    let p = ComplexMatrix::from_fn(d.n_s, d.n_t, |t, v| unitary_dft(d.n_t, t % d.n_t, v));
    PilotDigital { p, s }
}

/// DFT-subpanel hybrid pilot whose streams occupy `d_t` distinct, seeded,
/// randomly chosen columns of the `n_c`-point DFT.
pub fn make_pilot_hybrid(d: &SystemDims, seed: u64) -> Result<PilotHybrid> {
    d.validate_hybrid()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bins = sample(&mut rng, d.n_c, d.d_t).into_vec();
    bins.sort_unstable();
    make_pilot_hybrid_with_bins(d, &bins)
}

/// Hybrid pilot with explicit DFT bins for the stream symbols.
///
/// Combiner row `m` applies DFT beam `m mod n_a_r` on Rx subpanel `m`;
/// precoder column `d` applies DFT beam `d mod n_a_t` on Tx subpanel `d`.
pub fn make_pilot_hybrid_with_bins(d: &SystemDims, bins: &[usize]) -> Result<PilotHybrid> {
    d.validate_hybrid()?;
    if bins.len() != d.d_t || bins.iter().any(|&b| b >= d.n_c) {
        return Err(Error::ShapeMismatch(format!(
            "need {} stream bins below {}, got {bins:?}",
            d.d_t, d.n_c
        )));
    }
    let mut sorted = bins.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != bins.len() {
        return Err(Error::ShapeMismatch(format!("stream bins must be distinct: {bins:?}")));
    }

    let r = ComplexMatrix::from_fn(d.d_r, d.n_r, |m, u| {
        let (panel, i) = (u / d.n_a_r, u % d.n_a_r);
        if panel == m {
            unitary_dft(d.n_a_r, m % d.n_a_r, i)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let p = ComplexMatrix::from_fn(d.n_t, d.d_t, |v, col| {
        let (panel, i) = (v / d.n_a_t, v % d.n_a_t);
        if panel == col {
            unitary_dft(d.n_a_t, col % d.n_a_t, i)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let s = ComplexMatrix::from_fn(d.n_c, d.d_t, |n, col| {
        Complex64::from_polar(1.0, -2.0 * PI * ((n * bins[col]) % d.n_c) as f64 / d.n_c as f64)
    });
    Ok(PilotHybrid { p, s, r })
}

impl PilotHybrid {
    /// Transmitted samples `x[n,v] = Σ_d p[v,d] s[n,d]`, as an `n_c × n_t` matrix.
    pub fn transmitted(&self) -> ComplexMatrix {
        self.s
            .matmul(&self.p.transpose())
            .expect("pilot shapes are consistent by construction")
    }
}

impl Pilot for PilotDigital {
    fn noiseless(&self, h: &ComplexTensor) -> Result<ComplexTensor> {
        let (n_c, n_s) = (self.s.rows(), self.s.cols());
        let n_t = self.p.cols();
        let hd = h.dims();
        if hd.len() != 4 || hd[0] != n_c || hd[1] != n_s || hd[3] != n_t || self.p.rows() != n_s {
            return Err(Error::ShapeMismatch(format!(
                "channel {hd:?} does not match digital pilot ({n_c}×{n_s}, {n_t} antennas)"
            )));
        }
        let n_r = hd[2];
        let mut y = ComplexTensor::zeros(&[n_c, n_s, n_r]);
        for u in 0..n_r {
            for t in 0..n_s {
                for n in 0..n_c {
                    let acc: Complex64 = (0..n_t).map(|v| h.get(&[n, t, u, v]) * self.p[(t, v)]).sum();
                    y.set(&[n, t, u], acc * self.s[(n, t)]);
                }
            }
        }
        Ok(y)
    }
}

impl Pilot for PilotHybrid {
    fn noiseless(&self, h: &ComplexTensor) -> Result<ComplexTensor> {
        let x = self.transmitted();
        let (n_c, n_t) = (x.rows(), x.cols());
        let (d_r, n_r) = (self.r.rows(), self.r.cols());
        let hd = h.dims();
        if hd.len() != 4 || hd[0] != n_c || hd[2] != n_r || hd[3] != n_t {
            return Err(Error::ShapeMismatch(format!(
                "channel {hd:?} does not match hybrid pilot ({n_c} subcarriers, {n_r}×{n_t} arrays)"
            )));
        }
        let n_s = hd[1];
        let mut y = ComplexTensor::zeros(&[n_c, n_s, d_r]);
        let mut hx = vec![Complex64::new(0.0, 0.0); n_r];
        for t in 0..n_s {
            for n in 0..n_c {
                for (u, slot) in hx.iter_mut().enumerate() {
                    *slot = (0..n_t).map(|v| h.get(&[n, t, u, v]) * x[(n, v)]).sum();
                }
                for m in 0..d_r {
                    let acc: Complex64 = hx.iter().enumerate().map(|(u, z)| self.r[(m, u)] * z).sum();
                    y.set(&[n, t, m], acc);
                }
            }
        }
        Ok(y)
    }
}
