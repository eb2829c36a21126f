//! Monte Carlo campaigns, a brute-force single-path oracle, and path matching.

mod campaign;
mod config;
mod matching;
mod oracle;

pub use campaign::{
    estimate_observation, median, run_campaign, summarize, write_csv, CampaignOutput, CampaignSummary, RunRecord,
    Scenario, SnrSummary,
};
pub use config::{
    CampaignConfig, ChannelSection, EstimatorSection, McSection, Mode, NoiseSection, OutputSection, PilotKind,
    PilotSection, SystemSection,
};
pub use matching::{match_paths, PathMatch};
pub use oracle::{oracle_single_path, Observation, GOLDEN_STEPS};
