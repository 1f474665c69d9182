use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use damtcc::config::{parse_config, AlgorithmChoice, ExperimentConfig};
use damtcc::experiment::{run_snr_sweep, run_stability_probe, run_tracking, write_stability_csv};

#[derive(Parser)]
#[command(
    name = "damtcc",
    version,
    about = "Distributed widely-linear grid frequency estimation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-iteration, per-node frequency estimates.
    Tracking(Common),
    /// Steady-state bias and variance over a list of SNRs.
    SnrSweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated SNRs in dB; overrides `sweep.snr_db`.
        #[arg(long, value_delimiter = ',')]
        snr: Option<Vec<f64>>,
    },
    /// Peak weight norm at multiples of the step-size bound.
    Stability {
        #[command(flatten)]
        common: Common,
        /// Comma-separated multipliers of μ_max; overrides `stability.multipliers`.
        #[arg(long, value_delimiter = ',')]
        multipliers: Option<Vec<f64>>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration. Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path; falls back to the config's `output`, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Algorithm selection; overrides the config.
    #[arg(long)]
    algo: Option<AlgorithmChoice>,
}

impl Common {
    fn load(&self) -> Result<(ExperimentConfig, Box<dyn Write>), String> {
        let text = match &self.config {
            Some(path) => std::fs::read_to_string(path)
                .map_err(|e| format!("reading {}: {e}", path.display()))?,
            None => String::new(),
        };
        let mut cfg = parse_config(&text).map_err(|e| format!("invalid configuration: {e}"))?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(algo) = self.algo {
            cfg.algorithm = algo;
        }
        let target = self
            .out
            .clone()
            .or_else(|| cfg.output.as_ref().map(PathBuf::from));
        let out: Box<dyn Write> = match target {
            Some(path) => Box::new(BufWriter::new(
                File::create(&path).map_err(|e| format!("creating {}: {e}", path.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok((cfg, out))
    }
}

fn execute(cli: Cli) -> Result<(), String> {
    let fail = |e: damtcc::Error| e.to_string();
    match cli.command {
        Command::Tracking(common) => {
            let (cfg, out) = common.load()?;
            run_tracking(&cfg, out).map_err(fail)
        }
        Command::SnrSweep { common, snr } => {
            let (cfg, out) = common.load()?;
            let list = snr.unwrap_or_else(|| cfg.sweep_snr_db.clone());
            run_snr_sweep(&cfg, &list, out).map_err(fail)
        }
        Command::Stability {
            common,
            multipliers,
        } => {
            let (cfg, out) = common.load()?;
            let list = multipliers.unwrap_or_else(|| cfg.stability_multipliers.clone());
            let report = run_stability_probe(&cfg, &list).map_err(fail)?;
            write_stability_csv(&report, out).map_err(fail)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("damtcc: error: {msg}");
            ExitCode::FAILURE
        }
    }
}
