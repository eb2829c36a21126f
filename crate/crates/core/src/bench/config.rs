use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cp::CpSolveConfig;
use crate::error::{Error, Result};
use crate::estimate::EstimatorConfig;
use crate::harmonic::AcdConfig;
use crate::sim::{make_pilot_digital, make_pilot_hybrid, ChannelGenConfig, PilotDigital, PilotHybrid, SystemDims};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Digital,
    #[default]
    Hybrid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub mode: Mode,
    pub n_c: usize,
    pub n_s: usize,
    pub n_r: usize,
    pub n_t: usize,
    /// Tx subpanels / streams (hybrid only).
    pub d_t: usize,
    /// Rx subpanels / RF chains (hybrid only).
    pub d_r: usize,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self {
            mode: Mode::Hybrid,
            n_c: 31,
            n_s: 64,
            n_r: 16,
            n_t: 16,
            d_t: 4,
            d_r: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub l: usize,
    pub rician_noncentrality: f64,
    pub rician_scale: f64,
    pub los_boost_db: f64,
    pub min_separation: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        let g = ChannelGenConfig::default();
        Self {
            l: g.l,
            rician_noncentrality: g.rician_noncentrality,
            rician_scale: g.rician_scale,
            los_boost_db: g.los_boost_db,
            min_separation: g.min_separation,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PilotSection {
    /// Seed of the pilot grid (digital) or stream bins (hybrid); fixed across runs.
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub snr_db: Vec<f64>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            snr_db: vec![0.0, 10.0, 20.0, 30.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorSection {
    pub cp_max_iters: usize,
    pub cp_rel_tol: f64,
    pub cp_restarts: usize,
    pub acd_max_sweeps: usize,
    pub acd_rel_tol: f64,
    pub acd_starts: usize,
    pub acd_grid_oversample: usize,
    pub refine: bool,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        let cp = CpSolveConfig::default();
        let acd = AcdConfig::default();
        Self {
            cp_max_iters: cp.max_iters,
            cp_rel_tol: cp.rel_tol,
            cp_restarts: cp.restarts,
            acd_max_sweeps: acd.max_sweeps,
            acd_rel_tol: acd.rel_tol,
            acd_starts: acd.starts,
            acd_grid_oversample: acd.grid_oversample,
            refine: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    pub runs: usize,
    /// Run `i` uses seed `seed + i` for its channel, CP restarts and ACD starts.
    pub seed: u64,
    /// Run realizations on the rayon pool.
    pub parallel: bool,
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            runs: 128,
            seed: 0,
            parallel: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub csv: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            csv: PathBuf::from("campaign.csv"),
        }
    }
}

/// Campaign description, read from a TOML file with one table per section.
/// Every key is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub system: SystemSection,
    pub channel: ChannelSection,
    pub pilot: PilotSection,
    pub noise: NoiseSection,
    pub estimator: EstimatorSection,
    pub mc: McSection,
    pub output: OutputSection,
}

/// The pilot of either front end.
#[derive(Clone, Debug, PartialEq)]
pub enum PilotKind {
    Digital(PilotDigital),
    Hybrid(PilotHybrid),
}

impl CampaignConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("campaign config is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        if self.mc.runs == 0 {
            return Err(Error::Config("mc.runs must be at least 1".into()));
        }
        if self.noise.snr_db.is_empty() || self.noise.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("noise.snr_db must be a nonempty list of finite values".into()));
        }
        if self.channel.l == 0 {
            return Err(Error::Config("channel.l must be at least 1".into()));
        }
        let e = &self.estimator;
        if e.cp_restarts == 0 || e.cp_max_iters == 0 || e.acd_max_sweeps == 0 || e.acd_starts == 0 {
            return Err(Error::Config("estimator iteration counts must be positive".into()));
        }
        let d = self.dims();
        match self.system.mode {
            Mode::Digital => d.validate(),
            Mode::Hybrid => d.validate_hybrid(),
        }
        .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn dims(&self) -> SystemDims {
        let s = &self.system;
        match s.mode {
            Mode::Digital => SystemDims::digital(s.n_c, s.n_s, s.n_r, s.n_t),
            Mode::Hybrid => SystemDims::hybrid(s.n_c, s.n_s, s.n_r, s.n_t, s.d_t, s.d_r),
        }
    }

    pub fn channel_config(&self, seed: u64) -> ChannelGenConfig {
        let c = &self.channel;
        ChannelGenConfig {
            l: c.l,
            rician_noncentrality: c.rician_noncentrality,
            rician_scale: c.rician_scale,
            los_boost_db: c.los_boost_db,
            min_separation: c.min_separation,
            seed,
        }
    }

    pub fn pilot(&self) -> Result<PilotKind> {
        let d = self.dims();
        Ok(match self.system.mode {
            Mode::Digital => PilotKind::Digital(make_pilot_digital(&d, self.pilot.seed)),
            Mode::Hybrid => PilotKind::Hybrid(make_pilot_hybrid(&d, self.pilot.seed)?),
        })
    }

    /// Estimator settings for a run; `seed` drives CP restarts and ACD starts.
    pub fn estimator_config(&self, seed: u64) -> EstimatorConfig {
        let e = &self.estimator;
        EstimatorConfig {
            cp: CpSolveConfig {
                rank: 1,
                max_iters: e.cp_max_iters,
                rel_tol: e.cp_rel_tol,
                restarts: e.cp_restarts,
                seed,
            },
            acd: AcdConfig {
                max_sweeps: e.acd_max_sweeps,
                rel_tol: e.acd_rel_tol,
                starts: e.acd_starts,
                grid_oversample: e.acd_grid_oversample,
                seed,
            },
            refine: e.refine,
            parallel: true,
        }
    }
}
