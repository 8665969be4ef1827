//! Command-line driver: single simulations, seeded ensembles, kernel probes,
//! bound reports and oracle comparisons. Outputs are CSV or JSON files.

pub mod config;
pub mod ensemble;
pub mod error;
pub mod output;
pub mod probe;
pub mod reports;
pub mod simulate;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::Value;

pub use config::RunConfig;
pub use disloc_core;
pub use ensemble::{run_ensemble, EnsembleSummary};
pub use error::{CliError, CliResult};
pub use output::Format;
pub use simulate::ring_runs;

#[derive(Debug, Parser)]
#[command(name = "disloc", version, about = "Screw dislocation dynamics in planar domains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for batch runs; all cores by default.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Table format for CSV-shaped outputs.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one configuration, or a ring of starts.
    Simulate,
    /// Seeded Monte Carlo runs in a sampled configuration class.
    Ensemble {
        /// Number of runs, overriding `ensemble_size`.
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Evaluate k, h and grad h on points or a grid.
    KernelProbe,
    /// Collision-time bound report.
    Bounds,
    /// Exact solution, optionally compared with the integrator.
    Oracle {
        #[arg(long)]
        compare: bool,
    },
}

/// Settings resolved from flags and config.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub out: PathBuf,
    pub seed: u64,
    pub workers: Option<usize>,
    pub format: Format,
    pub compare: bool,
}

impl RunOptions {
    pub fn from_config(config: &RunConfig) -> Self {
        RunOptions {
            out: config.output_dir.clone(),
            seed: config.seed,
            workers: None,
            format: Format::Csv,
            compare: false,
        }
    }
}

/// Runs `f` on a pool of `workers` threads, or the global pool.
pub fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| CliError::Config(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Parses the config, applies flag overrides and dispatches.
pub fn run(cli: &Cli) -> CliResult<Value> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    if let Command::Ensemble { runs: Some(n) } = cli.command {
        config.ensemble_size = n;
    }
    config.validate()?;
    let opts = RunOptions {
        workers: cli.workers,
        format: cli.format,
        compare: matches!(cli.command, Command::Oracle { compare: true }),
        ..RunOptions::from_config(&config)
    };
    match cli.command {
        Command::Simulate => simulate::cmd_simulate(&config, &opts),
        Command::Ensemble { .. } => ensemble::cmd_ensemble(&config, &opts),
        Command::KernelProbe => probe::cmd_kernel_probe(&config, &opts),
        Command::Bounds => reports::cmd_bounds(&config, &opts),
        Command::Oracle { .. } => reports::cmd_oracle(&config, &opts),
    }
}
