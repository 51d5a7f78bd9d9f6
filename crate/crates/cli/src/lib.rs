//! Config-driven experiment runner for `rbmlab-core`.
//!
//! Every subcommand reads one JSON config, writes its CSV and JSON artifacts
//! into an output directory and finishes with a `manifest.json` that ties the
//! artifacts to the experiment name, the seeds and a hash of the config.

pub mod config;
pub mod experiments;
pub mod output;

use std::path::PathBuf;

use clap::Parser;
use thiserror::Error;

pub use config::Config;
pub use experiments::Experiment;

#[derive(Debug, Error)]
pub enum CliError {
    /// The config is malformed or asks for something the models reject.
    #[error("invalid config: {0}")]
    Schema(String),
    /// A solver ran and failed.
    #[error("solver failure: {0}")]
    Solver(rbmlab_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<rbmlab_core::Error> for CliError {
    fn from(e: rbmlab_core::Error) -> Self {
        use rbmlab_core::Error as E;
        match e {
            E::InvalidArgument(_) | E::OffGrid { .. } => CliError::Schema(e.to_string()),
            E::Io(io) => CliError::Io(io),
            other => CliError::Solver(other),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rbmlab", version, about = "Experiments on reflected Brownian particle systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Experiment,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `out_dir` from the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads. Changes speed only, never the output.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub verbose: bool,
}

/// Runs one invocation and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("rbmlab: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Schema("--config <path> is required".into()))?;
    let config = Config::load(path)?;
    if let Some(name) = &config.experiment {
        if name != cli.command.name() {
            return Err(CliError::Schema(format!(
                "config is for experiment `{name}` but `{}` was requested",
                cli.command.name()
            )));
        }
    }
    let out_dir = cli
        .out
        .clone()
        .or_else(|| config.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let threads = match cli.threads {
        Some(0) => return Err(CliError::Schema("--threads must be at least 1".into())),
        Some(k) => k,
        None => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Schema(format!("cannot start worker pool: {e}")))?;
    pool.install(|| experiments::run(cli.command, &config, &out_dir, cli.verbose))
}
