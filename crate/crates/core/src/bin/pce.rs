use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pce::bench::{estimate_observation, oracle_single_path, run_campaign, write_csv, CampaignConfig, Observation, PilotKind};
use pce::estimate::relative_error;
use pce::io::{load_cpt1, save_cpt1, save_params};
use pce::sim::ChannelParamSet;
use pce::{Error, Result};

#[derive(Parser)]
#[command(name = "pce", version, about = "Parametric MIMO-OFDM channel estimation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one realization and write observation, channel, and true paths.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        run: usize,
        #[arg(long, default_value_t = 0)]
        snr_index: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Estimate paths from a stored observation.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        obs: PathBuf,
        /// Estimated path list.
        #[arg(long)]
        out: PathBuf,
        /// True channel tensor; prints the relative error when given.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Monte Carlo campaign over the configured SNRs.
    Campaign {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force single-path estimate of a stored observation.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        obs: PathBuf,
        #[arg(long, default_value_t = 256)]
        grid: usize,
    },
}

fn print_paths(set: &ChannelParamSet) {
    println!("{:>4} {:>12} {:>10} {:>10} {:>10} {:>10}", "path", "|b|", "omega1", "omega2", "psi", "varsigma");
    for (i, p) in set.paths.iter().enumerate() {
        println!(
            "{i:>4} {:>12.4e} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            p.b.norm(),
            p.omega1,
            p.omega2,
            p.psi,
            p.varsigma
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            run,
            snr_index,
            out_dir,
        } => {
            let cfg = CampaignConfig::load(config)?;
            let scn = cfg.scenario(run, snr_index)?;
            fs::create_dir_all(&out_dir)?;
            save_cpt1(out_dir.join("obs.cpt1"), &scn.observation)?;
            save_cpt1(out_dir.join("h.cpt1"), &scn.h)?;
            save_params(out_dir.join("truth.txt"), &scn.truth)?;
            println!("seed {} n0 {:.6e} paths {}", scn.seed, scn.n0, scn.truth.l());
        }
        Command::Estimate { config, obs, out, truth } => {
            let cfg = CampaignConfig::load(config)?;
            let y = load_cpt1(obs)?;
            let est = estimate_observation(&y, &cfg.pilot()?, &cfg.estimator_config(cfg.mc.seed))?;
            save_params(out, &est.params)?;
            println!("l_hat {} (per mode {:?})", est.l_hat, est.diagnostics.mdl_per_mode);
            print_paths(&est.params);
            let t = &est.timings;
            println!(
                "time_ms total {:.1} mdl {:.1} cp {:.1} paths {:.1}",
                t.total_ms, t.model_order_ms, t.cp_ms, t.per_path_ms
            );
            if let Some(path) = truth {
                println!("rel_err {:.6e}", relative_error(&load_cpt1(path)?, &est.h_hat)?);
            }
        }
        Command::Campaign { config, out } => {
            let cfg = CampaignConfig::load(config)?;
            let result = run_campaign(&cfg)?;
            let path = out.unwrap_or_else(|| cfg.output.csv.clone());
            write_csv(BufWriter::new(File::create(&path)?), &result.records)?;
            println!(
                "{:>8} {:>5} {:>5} {:>12} {:>12} {:>10}  l_hat",
                "snr_db", "runs", "fail", "median_err", "mean_err", "ms/run"
            );
            for s in &result.summary.per_snr {
                println!(
                    "{:>8.1} {:>5} {:>5} {:>12.4e} {:>12.4e} {:>10.1}  {:?}",
                    s.snr_db, s.runs, s.failures, s.median_rel_err, s.mean_rel_err, s.mean_time_total_ms, s.l_hat_histogram
                );
            }
            for w in &result.summary.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {}", path.display());
        }
        Command::Oracle { config, obs, grid } => {
            let cfg = CampaignConfig::load(config)?;
            let y = load_cpt1(obs)?;
            let pilot = cfg.pilot()?;
            let view = match &pilot {
                PilotKind::Digital(p) => Observation::Digital { a: &y, pilot: p },
                PilotKind::Hybrid(p) => Observation::Hybrid { y: &y, pilot: p },
            };
            let path = oracle_single_path(view, grid)?;
            print_paths(&ChannelParamSet::new(vec![path]));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => 2,
                Error::Io(_) | Error::Format(_) => 3,
                _ => 1,
            })
        }
    }
}
