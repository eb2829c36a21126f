//! Small Monte Carlo campaign; pass a TOML file to override the built-in one.

use pce::bench::{run_campaign, write_csv, CampaignConfig};

const SMALL: &str = r#"
[system]
mode = "digital"
n_c = 16
n_s = 16
n_r = 8
n_t = 8

[channel]
l = 3
min_separation = 0.5

[noise]
snr_db = [0.0, 10.0, 20.0]

[mc]
runs = 8
"#;

fn main() -> pce::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(path) => CampaignConfig::load(path)?,
        None => CampaignConfig::from_toml_str(SMALL)?,
    };
    let out = run_campaign(&cfg)?;
    for s in &out.summary.per_snr {
        println!(
            "SNR {:>5.1} dB: median rel_err {:.3e}, l_hat {:?}, {} failures",
            s.snr_db, s.median_rel_err, s.l_hat_histogram, s.failures
        );
    }
    for w in &out.summary.warnings {
        println!("warning: {w}");
    }
    write_csv(std::io::stdout().lock(), &out.records[..3.min(out.records.len())])?;
    Ok(())
}
