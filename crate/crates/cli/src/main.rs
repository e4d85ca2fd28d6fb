//! `revheston` command-line front-end.
//!
//! Every command reads a JSON config, writes CSV/JSON outputs into `--out`
//! and a `manifest.json` describing the run.
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure,
//! 4 calibration did not converge.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "revheston", version, about = "Reversionary Heston pricing, convergence, calibration and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Random seed for commands that sample.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads, 0 = all cores; falls back to REVHESTON_THREADS.
    #[arg(long, env = "REVHESTON_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Call prices and implied vols for a list of maturities and strikes.
    Price(Common),
    /// Characteristic-function error against the eps -> 0 limit, per regime.
    Converge(Common),
    /// Implied-vol surface on a maturity by log-moneyness grid.
    Smile(Common),
    /// At-the-money skew term structure.
    Skew(Common),
    /// Fit (eps, H) to a target surface.
    Calibrate(Common),
    /// Euler paths of the reversionary model and their empirical cf.
    Simulate(Common),
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    NotConverged(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::NotConverged(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
            CliError::NotConverged(m) => write!(f, "calibration did not converge: {m}"),
        }
    }
}

impl From<revheston::Error> for CliError {
    fn from(e: revheston::Error) -> Self {
        use revheston::Error as E;
        match e {
            E::Config(m) => CliError::Config(m),
            E::InvalidParameter { .. }
            | E::Precondition(_)
            | E::NonIntegrableKernel { .. }
            | E::UnsupportedCorrelation { .. }
            | E::GridMismatch(_)
            | E::EmptySamples => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = match &cli.command {
        Command::Price(c) => ("price", c),
        Command::Converge(c) => ("converge", c),
        Command::Smile(c) => ("smile", c),
        Command::Skew(c) => ("skew", c),
        Command::Calibrate(c) => ("calibrate", c),
        Command::Simulate(c) => ("simulate", c),
    };
    match commands::run(name, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("revheston {name}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
