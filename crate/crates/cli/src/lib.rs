//! Command-line front end for the prosociality model toolkit.
//!
//! Subcommands: `beliefs`, `figure1`, `sweep`, `costs`, `calibrate`,
//! `experiment`. Every run is a pure function of (config, seed); outputs are
//! written atomically and reruns are byte-identical.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 solver or
//! calibration failure, 4 statistical degeneracy.

pub mod commands;
pub mod config;
pub mod output;

use clap::{Parser, Subcommand};
use config::{OutputFormat, RunConfig};
use normsim_core::equilibrium::CalibrationError;
use normsim_core::model::ModelError;
use normsim_core::popsim::SimError;
use normsim_core::stats::StatsError;
use normsim_core::synthsurvey::SurveyError;
use serde_json::Value;
use std::path::PathBuf;
use thiserror::Error;

/// Environment variable overriding the output directory (lower precedence
/// than `--out`, higher than the config file).
pub const OUT_DIR_ENV: &str = "NORMSIM_OUT";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("statistical degeneracy: {0}")]
    Degenerate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Degenerate(_) => 4,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SurveyError> for CliError {
    fn from(e: SurveyError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<CalibrationError> for CliError {
    fn from(e: CalibrationError) -> Self {
        CliError::Solver(e.to_string())
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        CliError::Degenerate(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "normsim",
    about = "Norm-weighted prosociality model: beliefs, equilibria, sweeps, synthetic surveys",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON config file (strict: unknown keys are rejected).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Seed override; required (here or in the config) for stochastic
    /// subcommands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory (overrides NORMSIM_OUT and the config file).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format for all tables.
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Analytic belief table with Monte Carlo cross-check over a threshold grid.
    Beliefs,
    /// Norm-by-cost decision panels plus a threshold summary.
    Figure1,
    /// Parameter sweep: analytic vs empirical participation rates.
    Sweep,
    /// Incentive-induced reputation cost curves over a cost grid.
    Costs,
    /// Solve the extrinsic norm matching a target participation rate.
    Calibrate,
    /// Synthetic multi-country survey plus pooled logistic regression.
    Experiment,
}

/// Loads config (typed and raw), resolves seed/out/format precedence, and
/// dispatches the subcommand.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let (config, raw_config) = match &cli.config {
        Some(path) => {
            let typed = RunConfig::load(path)?;
            let raw: Value = serde_json::from_str(
                &std::fs::read_to_string(path).map_err(|e| CliError::Io(e.to_string()))?,
            )?;
            (typed, raw)
        }
        None => (RunConfig::default(), Value::Object(Default::default())),
    };
    let out_dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let ctx = commands::RunContext {
        out_dir,
        format: cli.format.or(config.format).unwrap_or(OutputFormat::Csv),
        seed: cli.seed.or(config.seed),
        raw_config,
    };
    match cli.command {
        Command::Beliefs => {
            commands::cmd_beliefs(&config.beliefs.unwrap_or_default(), &ctx)?;
        }
        Command::Figure1 => {
            commands::cmd_figure1(&config.figure1.unwrap_or_default(), &ctx)?;
        }
        Command::Sweep => {
            commands::cmd_sweep(&config.sweep.unwrap_or_default(), &ctx)?;
        }
        Command::Costs => {
            commands::cmd_costs(&config.costs.unwrap_or_default(), &ctx)?;
        }
        Command::Calibrate => {
            let cfg = config.calibrate.ok_or_else(|| {
                CliError::Config(
                    "`calibrate` needs a config file with a `calibrate` section".into(),
                )
            })?;
            commands::cmd_calibrate(&cfg, &ctx)?;
        }
        Command::Experiment => {
            commands::cmd_experiment(&config.experiment.unwrap_or_default(), &ctx)?;
        }
    }
    Ok(())
}
