//! `mcmc`: deterministic CSV emission for every analysis and design surface
//! of the mobile molecular communication toolkit.
//!
//! One subcommand per workflow; configuration comes from a TOML file whose
//! keys carry explicit units. Outputs are CSV tables plus a JSON run
//! manifest, written only after the whole computation succeeds.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mcmc_core::Error as CoreError;

#[derive(Parser)]
#[command(name = "mcmc", version, about = "Mobile molecular communication analysis and design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Problem size preset. `desk` shrinks the heavy loop counts so a run
/// finishes on a laptop in seconds; `paper` uses the config values as given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Desk,
    Paper,
}

#[derive(Args)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Random seed for stochastic commands.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Scale::Paper)]
    scale: Scale,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic impulse-response moments and distribution tables.
    ChannelStats(CommonArgs),
    /// Brownian Monte Carlo reference statistics.
    Simulate(CommonArgs),
    /// Minimum-dose release schedule design.
    DrugDesign(CommonArgs),
    /// Moments and target-exceedance probability of a release schedule.
    DrugEval(CommonArgs),
    /// Detection threshold for uniform release counts.
    McThreshold(CommonArgs),
    /// Error-balanced per-bit release counts.
    McRelease(CommonArgs),
    /// Longest frame meeting the efficiency confidence constraint.
    McFrame(CommonArgs),
}

/// Failure classes mapped onto process exit codes.
#[derive(Debug)]
pub enum AppError {
    /// Unreadable, unparsable, or invalid configuration (exit 2).
    Config(String),
    /// The requested design has no solution (exit 3).
    Infeasible(String),
    /// A numerical routine failed to converge (exit 4).
    Numerical(String),
    /// Output could not be written (exit 4).
    Io(String),
}

impl AppError {
    fn code(&self) -> u8 {
        match self {
            AppError::Config(_) => 2,
            AppError::Infeasible(_) => 3,
            AppError::Numerical(_) | AppError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Config(m)
            | AppError::Infeasible(m)
            | AppError::Numerical(m)
            | AppError::Io(m) => m,
        }
    }
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        match e {
            // domain violations surface from bad configuration values
            CoreError::Domain(m) => AppError::Config(m),
            CoreError::Infeasible => AppError::Infeasible("design constraints infeasible".into()),
            other => AppError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e.to_string())
    }
}

fn init_threads() {
    if let Ok(v) = std::env::var("MCMC_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                // ignore failure: the global pool may already exist in tests
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::ChannelStats(a) => ("channel-stats", a),
        Command::Simulate(a) => ("simulate", a),
        Command::DrugDesign(a) => ("drug-design", a),
        Command::DrugEval(a) => ("drug-eval", a),
        Command::McThreshold(a) => ("mc-threshold", a),
        Command::McRelease(a) => ("mc-release", a),
        Command::McFrame(a) => ("mc-frame", a),
    };
    let result = commands::run(name, args);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mcmc {name}: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
