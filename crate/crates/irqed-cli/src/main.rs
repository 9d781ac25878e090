//! Batch driver for the infrared-electron laboratory.
//!
//! `irqed <subcommand> --config run.toml` parses one TOML run configuration,
//! drives the corresponding library pipeline and writes a CSV or JSON
//! artifact atomically. All physics parameters live in the config file (see
//! the schema in [`config`]); the process is fully deterministic, so a rerun
//! with an identical config produces a byte-identical artifact.
//!
//! Exit codes: `0` success, `2` configuration error, `3` eigensolver or
//! linear-solve non-convergence, `4` genuinely divergent request, `1`
//! filesystem failure. The worker pool size can be pinned with the
//! `IRQED_WORKERS` environment variable (defaults to the machine's cores).

mod commands;
mod config;
mod errors;
mod output;

use clap::{Args, Parser, Subcommand};
use commands::Ctx;
use config::RunConfig;
use errors::{CliError, CliResult};
use sha2::{Digest, Sha256};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "irqed",
    version,
    about = "Infrared photon clouds around a dressed electron: batch experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Path to the TOML run configuration.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Ground energy, dispersion gradient and curvature at each cutoff.
    Spectrum(RunArgs),
    /// Photon-number expectation vs cutoff with the infrared log fit.
    PhotonNumberScan(RunArgs),
    /// Closed-form cloud norms over a cutoff sequence.
    KernelNorm(RunArgs),
    /// Square-integrability verdict for the infrared cloud.
    Equivalence(RunArgs),
    /// Mode-wise residuals of the discrete pull-through identity.
    PullThroughCheck(RunArgs),
    /// Cell decompositions, cutoff schedule and overlap statistics.
    ScatteringCells(RunArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::PhotonNumberScan(_) => "photon-number-scan",
            Command::KernelNorm(_) => "kernel-norm",
            Command::Equivalence(_) => "equivalence",
            Command::PullThroughCheck(_) => "pull-through-check",
            Command::ScatteringCells(_) => "scattering-cells",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Spectrum(a)
            | Command::PhotonNumberScan(a)
            | Command::KernelNorm(a)
            | Command::Equivalence(a)
            | Command::PullThroughCheck(a)
            | Command::ScatteringCells(a) => a,
        }
    }
}

fn init_workers() -> CliResult<()> {
    match std::env::var("IRQED_WORKERS") {
        Err(_) => Ok(()),
        Ok(raw) => match raw.parse::<usize>() {
            Ok(n) if n >= 1 => {
                // A second initialization (e.g. under a test harness) keeps
                // the existing pool; that is fine for a worker-count hint.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
                Ok(())
            }
            _ => Err(CliError::Config(format!(
                "environment variable IRQED_WORKERS = \"{raw}\" is not a positive integer"
            ))),
        },
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    init_workers()?;
    let args = cli.command.args();
    let bytes = std::fs::read(&args.config).map_err(|e| {
        CliError::Config(format!("reading {}: {e}", args.config.display()))
    })?;
    let config_sha = format!("{:x}", Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|_| {
        CliError::Config(format!("{} is not valid UTF-8", args.config.display()))
    })?;
    let cfg: RunConfig = toml::from_str(&text).map_err(|e| {
        CliError::Config(format!("parsing {}: {e}", args.config.display()))
    })?;
    cfg.check_command(cli.command.name())?;

    let ctx = Ctx {
        cfg: &cfg,
        config_sha,
    };
    match &cli.command {
        Command::Spectrum(_) => commands::spectrum(&ctx),
        Command::PhotonNumberScan(_) => commands::photon_scan(&ctx),
        Command::KernelNorm(_) => commands::kernel_norm(&ctx),
        Command::Equivalence(_) => commands::equivalence(&ctx),
        Command::PullThroughCheck(_) => commands::pull_through_check(&ctx),
        Command::ScatteringCells(_) => commands::scattering_cells(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
