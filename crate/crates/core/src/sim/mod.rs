//! Synthetic channels, pilots, combiners, and received tensors for the fully
//! digital and hybrid receiver front ends.

mod channel;
mod pilot;
mod receive;

pub use channel::{channel_tensor, draw_channel, ChannelGenConfig, MAX_SEPARATION_ATTEMPTS};
pub use pilot::{make_pilot_digital, make_pilot_hybrid, make_pilot_hybrid_with_bins, Pilot, PilotDigital, PilotHybrid};
pub use receive::{complex_noise, receive_digital, receive_hybrid, snr_to_n0};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Frame and array dimensions.
///
/// `d_t`/`d_r` are transmit streams and receive RF chains; `n_a_t`/`n_a_r`
/// are the Tx/Rx subpanel sizes used by the hybrid front end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemDims {
    pub n_c: usize,
    pub n_s: usize,
    pub n_r: usize,
    pub n_t: usize,
    pub d_t: usize,
    pub d_r: usize,
    pub n_a_t: usize,
    pub n_a_r: usize,
}

impl Default for SystemDims {
    fn default() -> Self {
        Self::hybrid(31, 64, 16, 16, 4, 4)
    }
}

impl SystemDims {
    /// Fully digital receiver with a single-stream pilot.
    pub fn digital(n_c: usize, n_s: usize, n_r: usize, n_t: usize) -> Self {
        Self {
            n_c,
            n_s,
            n_r,
            n_t,
            d_t: 1,
            d_r: n_r,
            n_a_t: n_t,
            n_a_r: 1,
        }
    }

    /// Hybrid front end with `d_t` Tx and `d_r` Rx subpanels of equal size.
    pub fn hybrid(n_c: usize, n_s: usize, n_r: usize, n_t: usize, d_t: usize, d_r: usize) -> Self {
        Self {
            n_c,
            n_s,
            n_r,
            n_t,
            d_t,
            d_r,
            n_a_t: if d_t == 0 { 0 } else { n_t / d_t },
            n_a_r: if d_r == 0 { 0 } else { n_r / d_r },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.n_c, self.n_s, self.n_r, self.n_t, self.d_t, self.d_r, self.n_a_t, self.n_a_r,
        ];
        if all.contains(&0) {
            return Err(Error::Config(format!("all dimensions must be positive: {self:?}")));
        }
        Ok(())
    }

    pub fn validate_hybrid(&self) -> Result<()> {
        self.validate()?;
        if self.n_t != self.d_t * self.n_a_t || self.n_r != self.d_r * self.n_a_r {
            return Err(Error::ShapeMismatch(format!(
                "hybrid layout needs n_t = d_t·n_a_t and n_r = d_r·n_a_r, got {self:?}"
            )));
        }
        if self.d_t > self.n_c {
            return Err(Error::ShapeMismatch(format!(
                "{} orthogonal streams need at least as many subcarriers (n_c = {})",
                self.d_t, self.n_c
            )));
        }
        Ok(())
    }

    pub fn channel_dims(&self) -> [usize; 4] {
        [self.n_c, self.n_s, self.n_r, self.n_t]
    }
}

/// One specular path: gain plus ToF, Doppler, AoA, and AoD angular frequencies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathParams {
    pub b: Complex64,
    pub omega1: f64,
    pub omega2: f64,
    pub psi: f64,
    pub varsigma: f64,
}

impl PathParams {
    pub fn frequencies(&self) -> [f64; 4] {
        [self.omega1, self.omega2, self.psi, self.varsigma]
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChannelParamSet {
    pub paths: Vec<PathParams>,
}

impl ChannelParamSet {
    pub fn new(paths: Vec<PathParams>) -> Self {
        Self { paths }
    }

    pub fn l(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Sorts paths by descending `|b|`.
    pub fn sort_by_gain(&mut self) {
        self.paths.sort_by(|x, y| y.b.norm().total_cmp(&x.b.norm()));
    }
}
