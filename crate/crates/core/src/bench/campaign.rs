use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{CampaignConfig, PilotKind};
use crate::error::{Error, Result};
use crate::estimate::{estimate_digital, estimate_hybrid, relative_error, EstimationResult, EstimatorConfig};
use crate::sim::{
    channel_tensor, draw_channel, receive_digital, receive_hybrid, snr_to_n0, ChannelParamSet, SystemDims,
};
use crate::tensor::ComplexTensor;

/// One CSV row. Timings are wall-clock milliseconds; `error` is empty on
/// success and holds a short tag when the estimator failed (then `rel_err`
/// is the sentinel 1.0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: usize,
    pub snr_db: f64,
    pub l_true: usize,
    pub l_hat: usize,
    pub rel_err: f64,
    pub time_total_ms: f64,
    pub time_cp_ms: f64,
    pub time_mdl_ms: f64,
    pub time_paths_ms: f64,
    pub seed: u64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnrSummary {
    pub snr_db: f64,
    pub runs: usize,
    pub failures: usize,
    pub mean_rel_err: f64,
    pub median_rel_err: f64,
    pub l_hat_histogram: BTreeMap<usize, usize>,
    pub mean_time_total_ms: f64,
    pub mean_time_cp_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignSummary {
    pub per_snr: Vec<SnrSummary>,
    /// Soft checks that did not hold.
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct CampaignOutput {
    /// Sorted by `(snr_db, run_id)`.
    pub records: Vec<RunRecord>,
    pub summary: CampaignSummary,
}

/// One realization: ground truth, pilot, and the noisy observation.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub dims: SystemDims,
    pub truth: ChannelParamSet,
    pub h: ComplexTensor,
    pub pilot: PilotKind,
    /// `a` for the digital front end, `y` for the hybrid one.
    pub observation: ComplexTensor,
    pub n0: f64,
    pub seed: u64,
}

/// Median of a sample; the mean of the two middle values for even sizes.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn noise_seed(run_seed: u64, snr_index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    rng.set_stream(snr_index as u64 + 1);
    rng.next_u64()
}

impl CampaignConfig {
    /// Realization `run_id` at the `snr_index`-th SNR of the list. The
    /// channel depends only on the run; the noise on both.
    pub fn scenario(&self, run_id: usize, snr_index: usize) -> Result<Scenario> {
        let snr_db = *self
            .noise
            .snr_db
            .get(snr_index)
            .ok_or_else(|| Error::Config(format!("SNR index {snr_index} out of range")))?;
        let seed = self.mc.seed.wrapping_add(run_id as u64);
        let dims = self.dims();
        let truth = draw_channel(&self.channel_config(seed))?;
        let h = channel_tensor(&truth, &dims);
        let pilot = self.pilot()?;
        let nseed = noise_seed(seed, snr_index);
        let (observation, n0) = match &pilot {
            PilotKind::Digital(p) => {
                let n0 = snr_to_n0(&h, p, snr_db)?;
                (receive_digital(&h, p, n0, nseed)?.1, n0)
            }
            PilotKind::Hybrid(p) => {
                let n0 = snr_to_n0(&h, p, snr_db)?;
                (receive_hybrid(&h, p, n0, nseed)?, n0)
            }
        };
        Ok(Scenario {
            dims,
            truth,
            h,
            pilot,
            observation,
            n0,
            seed,
        })
    }
}

/// Runs the estimator that matches the pilot.
pub fn estimate_observation(obs: &ComplexTensor, pilot: &PilotKind, cfg: &EstimatorConfig) -> Result<EstimationResult> {
    match pilot {
        PilotKind::Digital(p) => estimate_digital(obs, p, cfg),
        PilotKind::Hybrid(p) => estimate_hybrid(obs, p, cfg),
    }
}

fn run_one(cfg: &CampaignConfig, run_id: usize, snr_index: usize) -> RunRecord {
    let snr_db = cfg.noise.snr_db[snr_index];
    let seed = cfg.mc.seed.wrapping_add(run_id as u64);
    let mut rec = RunRecord {
        run_id,
        snr_db,
        l_true: cfg.channel.l,
        l_hat: 0,
        rel_err: 1.0,
        time_total_ms: 0.0,
        time_cp_ms: 0.0,
        time_mdl_ms: 0.0,
        time_paths_ms: 0.0,
        seed,
        error: String::new(),
    };
    let outcome = cfg.scenario(run_id, snr_index).and_then(|scn| {
        let est = estimate_observation(&scn.observation, &scn.pilot, &cfg.estimator_config(seed))?;
        let err = relative_error(&scn.h, &est.h_hat)?;
        Ok((est, err))
    });
    match outcome {
        Ok((est, err)) => {
            rec.l_hat = est.l_hat;
            rec.rel_err = err;
            rec.time_total_ms = est.timings.total_ms;
            rec.time_cp_ms = est.timings.cp_ms;
            rec.time_mdl_ms = est.timings.model_order_ms;
            rec.time_paths_ms = est.timings.per_path_ms;
        }
        Err(e) => rec.error = e.tag().to_string(),
    }
    rec
}

/// Per-SNR statistics of a set of records.
pub fn summarize(records: &[RunRecord]) -> CampaignSummary {
    let mut snrs: Vec<f64> = records.iter().map(|r| r.snr_db).collect();
    snrs.sort_by(f64::total_cmp);
    snrs.dedup();
    let per_snr: Vec<SnrSummary> = snrs
        .iter()
        .map(|&snr| {
            let rs: Vec<&RunRecord> = records.iter().filter(|r| r.snr_db == snr).collect();
            let errs: Vec<f64> = rs.iter().map(|r| r.rel_err).collect();
            let n = rs.len() as f64;
            let mut hist = BTreeMap::new();
            for r in &rs {
                *hist.entry(r.l_hat).or_insert(0) += 1;
            }
            SnrSummary {
                snr_db: snr,
                runs: rs.len(),
                failures: rs.iter().filter(|r| !r.error.is_empty()).count(),
                mean_rel_err: errs.iter().sum::<f64>() / n,
                median_rel_err: median(&errs),
                l_hat_histogram: hist,
                mean_time_total_ms: rs.iter().map(|r| r.time_total_ms).sum::<f64>() / n,
                mean_time_cp_ms: rs.iter().map(|r| r.time_cp_ms).sum::<f64>() / n,
            }
        })
        .collect();
    let mut warnings = Vec::new();
    let total: f64 = records.iter().map(|r| r.time_total_ms).sum();
    let cp: f64 = records.iter().map(|r| r.time_cp_ms).sum();
    if total > 0.0 && cp / total <= 0.5 {
        warnings.push(format!(
            "CP stage took {:.0}% of estimator wall-clock (expected the majority at full-scale dims)",
            100.0 * cp / total
        ));
    }
    CampaignSummary { per_snr, warnings }
}

/// Every SNR × run realization of the campaign. Estimator failures are
/// recorded per run and never abort the campaign.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignOutput> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.noise.snr_db.len())
        .flat_map(|s| (0..cfg.mc.runs).map(move |r| (r, s)))
        .collect();
    let mut records: Vec<RunRecord> = if cfg.mc.parallel {
        jobs.par_iter().map(|&(r, s)| run_one(cfg, r, s)).collect()
    } else {
        jobs.iter().map(|&(r, s)| run_one(cfg, r, s)).collect()
    };
    records.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db).then(a.run_id.cmp(&b.run_id)));
    let summary = summarize(&records);
    Ok(CampaignOutput { records, summary })
}

/// Writes records as CSV with a header row.
pub fn write_csv<W: Write>(w: W, records: &[RunRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in records {
        out.serialize(r).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

impl RunRecord {
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
        let mut rdr = csv::Reader::from_path(path).map_err(csv_error)?;
        rdr.deserialize().map(|r| r.map_err(csv_error)).collect()
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format(format!("{other:?}")),
    }
}
