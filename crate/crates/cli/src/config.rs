//! Strict configuration parsing. The config file is JSON (key/value with
//! nesting); unknown keys are rejected everywhere so a typo in a parameter
//! name like `s_vv` fails loudly instead of silently using a default.
//!
//! Keys use the model's published parameter notation (`c`, `r`, `vis`,
//! `pref_va`, `pref_vv`, `s_va`, `s_vv`) on the wire, mapped onto the core
//! crate's role-named types at the boundary.

use crate::CliError;
use normsim_core::equilibrium::BeliefMode;
use normsim_core::synthsurvey::{CountrySettings, IncentiveKind, LinkSettings};
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// Bumped whenever any output schema changes shape.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Rational,
    Naive,
}

impl From<ModeName> for BeliefMode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Rational => BeliefMode::Rational,
            ModeName::Naive => BeliefMode::Naive,
        }
    }
}

/// Inclusive arithmetic grid `start, start+step, ..., stop`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        // `is_nan` guards keep NaN inputs on the error path.
        if self.step.is_nan()
            || self.step <= 0.0
            || !self.start.is_finite()
            || self.stop < self.start
        {
            return Err(CliError::Config(format!(
                "invalid grid: start {}, stop {}, step {}",
                self.start, self.stop, self.step
            )));
        }
        let count = ((self.stop - self.start) / self.step + 0.5).floor() as usize + 1;
        Ok((0..count)
            .map(|i| self.start + i as f64 * self.step)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeliefsConfig {
    #[serde(default = "default_belief_grid")]
    pub thresholds: GridSpec,
    #[serde(default = "default_oracle_samples")]
    pub oracle_samples: u64,
}

fn default_belief_grid() -> GridSpec {
    GridSpec {
        start: 0.0,
        stop: 1.9,
        step: 0.1,
    }
}

fn default_oracle_samples() -> u64 {
    1_000_000
}

impl Default for BeliefsConfig {
    fn default() -> Self {
        Self {
            thresholds: default_belief_grid(),
            oracle_samples: default_oracle_samples(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Figure1Config {
    /// Extrinsic-norm value per panel row.
    #[serde(default = "default_norm_rows")]
    pub s_vv_rows: Vec<f64>,
    /// Cost value per panel column.
    #[serde(default = "default_cost_cols")]
    pub c_cols: Vec<f64>,
    /// Agents per panel = lattice side squared (jittered lattice scatter).
    #[serde(default = "default_lattice")]
    pub lattice: usize,
    #[serde(default = "default_mode")]
    pub mode: ModeName,
    #[serde(default = "default_one")]
    pub vis: f64,
    #[serde(default = "default_one")]
    pub pref_va: f64,
    #[serde(default = "default_one")]
    pub pref_vv: f64,
    #[serde(default)]
    pub s_va: f64,
}

fn default_norm_rows() -> Vec<f64> {
    vec![-1.0, 0.0, 1.0]
}

fn default_cost_cols() -> Vec<f64> {
    vec![0.2, 0.4, 0.6, 0.8]
}

fn default_lattice() -> usize {
    200
}

fn default_mode() -> ModeName {
    ModeName::Rational
}

fn default_one() -> f64 {
    1.0
}

impl Default for Figure1Config {
    fn default() -> Self {
        Self {
            s_vv_rows: default_norm_rows(),
            c_cols: default_cost_cols(),
            lattice: default_lattice(),
            mode: default_mode(),
            vis: 1.0,
            pref_va: 1.0,
            pref_vv: 1.0,
            s_va: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_sweep_costs")]
    pub c: Vec<f64>,
    #[serde(default = "default_zero_axis")]
    pub s_vv: Vec<f64>,
    #[serde(default = "default_zero_axis")]
    pub s_va: Vec<f64>,
    /// Incentive axis, each entry 0 or 1.
    #[serde(default = "default_incentive_axis")]
    pub r: Vec<u8>,
    #[serde(default = "default_one_axis")]
    pub vis: Vec<f64>,
    #[serde(default = "default_one_axis")]
    pub pref_va: Vec<f64>,
    #[serde(default = "default_one_axis")]
    pub pref_vv: Vec<f64>,
    #[serde(default = "default_population")]
    pub population: usize,
    #[serde(default = "default_mode")]
    pub mode: ModeName,
    #[serde(default = "default_max_cells")]
    pub max_cells: usize,
}

fn default_sweep_costs() -> Vec<f64> {
    vec![0.2, 0.4, 0.6, 0.8]
}

fn default_zero_axis() -> Vec<f64> {
    vec![0.0]
}

fn default_incentive_axis() -> Vec<u8> {
    vec![0, 1]
}

fn default_one_axis() -> Vec<f64> {
    vec![1.0]
}

fn default_population() -> usize {
    10_000
}

fn default_max_cells() -> usize {
    100_000
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            c: default_sweep_costs(),
            s_vv: default_zero_axis(),
            s_va: default_zero_axis(),
            r: default_incentive_axis(),
            vis: default_one_axis(),
            pref_va: default_one_axis(),
            pref_vv: default_one_axis(),
            population: default_population(),
            mode: default_mode(),
            max_cells: default_max_cells(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostsConfig {
    #[serde(default = "default_cost_grid")]
    pub grid: GridSpec,
}

fn default_cost_grid() -> GridSpec {
    GridSpec {
        start: 0.05,
        stop: 0.95,
        step: 0.05,
    }
}

impl Default for CostsConfig {
    fn default() -> Self {
        Self {
            grid: default_cost_grid(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateConfig {
    pub target_rate: f64,
    #[serde(default = "default_cost")]
    pub c: f64,
    #[serde(default = "default_incentive_on")]
    pub r: u8,
    #[serde(default = "default_one")]
    pub vis: f64,
    #[serde(default = "default_one")]
    pub pref_va: f64,
    #[serde(default = "default_one")]
    pub pref_vv: f64,
    #[serde(default)]
    pub s_va: f64,
    #[serde(default = "default_mode")]
    pub mode: ModeName,
}

fn default_cost() -> f64 {
    0.5
}

fn default_incentive_on() -> u8 {
    1
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_countries")]
    pub n_countries: usize,
    #[serde(default = "default_rows")]
    pub rows_per_country: usize,
    #[serde(default = "default_kind")]
    pub incentive_kind: KindName,
    #[serde(default = "default_one")]
    pub vis: f64,
    #[serde(default = "default_true")]
    pub attenuate_partial: bool,
    #[serde(default = "default_intrinsic_share")]
    pub intrinsic_flag_share: f64,
    #[serde(default = "default_extrinsic_share")]
    pub extrinsic_flag_share: f64,
    #[serde(default = "default_mode")]
    pub mode: ModeName,
    /// Latent motivation columns included in the microdata export.
    #[serde(default = "default_true")]
    pub export_latent: bool,
    #[serde(default)]
    pub countries: CountryConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindName {
    Financial,
    Time,
}

impl From<KindName> for IncentiveKind {
    fn from(k: KindName) -> Self {
        match k {
            KindName::Financial => IncentiveKind::Financial,
            KindName::Time => IncentiveKind::Time,
        }
    }
}

fn default_countries() -> usize {
    28
}

fn default_rows() -> usize {
    1_000
}

fn default_kind() -> KindName {
    KindName::Time
}

fn default_true() -> bool {
    true
}

fn default_intrinsic_share() -> f64 {
    0.63
}

fn default_extrinsic_share() -> f64 {
    0.06
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_countries: default_countries(),
            rows_per_country: default_rows(),
            incentive_kind: default_kind(),
            vis: 1.0,
            attenuate_partial: true,
            intrinsic_flag_share: default_intrinsic_share(),
            extrinsic_flag_share: default_extrinsic_share(),
            mode: default_mode(),
            export_latent: true,
            countries: CountryConfig::default(),
        }
    }
}

/// Country-distribution block; defaults mirror the source survey's
/// descriptive statistics.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountryConfig {
    #[serde(default = "default_fin_norms")]
    pub financial_norm_range: (f64, f64),
    #[serde(default = "default_time_norms")]
    pub time_norm_range: (f64, f64),
    #[serde(default = "default_fin_full")]
    pub financial_full_share: f64,
    #[serde(default = "default_fin_partial")]
    pub financial_partial_share: f64,
    #[serde(default = "default_time_full")]
    pub time_full_share: f64,
    #[serde(default = "default_time_partial")]
    pub time_partial_share: f64,
    #[serde(default = "default_cost_range")]
    pub cost_range: (f64, f64),
}

fn default_fin_norms() -> (f64, f64) {
    (0.02, 0.39)
}

fn default_time_norms() -> (f64, f64) {
    (0.12, 0.70)
}

fn default_fin_full() -> f64 {
    0.14
}

fn default_fin_partial() -> f64 {
    0.04
}

fn default_time_full() -> f64 {
    0.29
}

fn default_time_partial() -> f64 {
    0.25
}

fn default_cost_range() -> (f64, f64) {
    (0.4, 0.4)
}

impl Default for CountryConfig {
    fn default() -> Self {
        Self {
            financial_norm_range: default_fin_norms(),
            time_norm_range: default_time_norms(),
            financial_full_share: default_fin_full(),
            financial_partial_share: default_fin_partial(),
            time_full_share: default_time_full(),
            time_partial_share: default_time_partial(),
            cost_range: default_cost_range(),
        }
    }
}

impl From<&CountryConfig> for CountrySettings {
    fn from(c: &CountryConfig) -> Self {
        CountrySettings {
            financial_norm_range: c.financial_norm_range,
            time_norm_range: c.time_norm_range,
            financial_full_share: c.financial_full_share,
            financial_partial_share: c.financial_partial_share,
            time_full_share: c.time_full_share,
            time_partial_share: c.time_partial_share,
            cost_range: c.cost_range,
        }
    }
}

impl ExperimentConfig {
    pub fn link_settings(&self) -> LinkSettings {
        LinkSettings {
            kind: self.incentive_kind.into(),
            visibility: self.vis,
            attenuate_partial: self.attenuate_partial,
            intrinsic_flag_share: self.intrinsic_flag_share,
            extrinsic_flag_share: self.extrinsic_flag_share,
            mode: self.mode.into(),
        }
    }
}

/// Top-level configuration; every section is optional and falls back to its
/// documented defaults (except `calibrate`, whose target has no default).
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub beliefs: Option<BeliefsConfig>,
    pub figure1: Option<Figure1Config>,
    pub sweep: Option<SweepConfig>,
    pub costs: Option<CostsConfig>,
    pub calibrate: Option<CalibrateConfig>,
    pub experiment: Option<ExperimentConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Converts the config's 0/1 incentive coding to the model's flag.
pub fn incentive_flag(r: u8) -> Result<bool, CliError> {
    match r {
        0 => Ok(false),
        1 => Ok(true),
        other => Err(CliError::Config(format!(
            "incentive indicator must be 0 or 1, got {other}"
        ))),
    }
}
