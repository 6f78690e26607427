//! Simulation and numerical-equilibrium toolkit for a norm-weighted
//! signaling model of prosocial participation.
//!
//! Agents with uniform intrinsic/extrinsic motivation draws decide whether
//! to act by weighing direct benefits against reputational ones, where
//! social-norm weights turn observer inferences about motivation into
//! reputational benefit or cost. The crate provides:
//!
//! - [`model`]: domain types and the per-agent utility and decision rule;
//! - [`beliefs`]: analytic observer expectations over the unit square plus
//!   a seeded Monte Carlo oracle for cross-checking them;
//! - [`equilibrium`]: self-consistent participation thresholds, the
//!   incentive-induced reputation-cost curves, and norm calibration;
//! - [`popsim`]: seeded populations, panel simulation, deterministic
//!   parameter sweeps;
//! - [`synthsurvey`]: synthetic multi-country survey microdata generation;
//! - [`stats`]: chi-square, Mann-Whitney U, IRLS logistic regression and
//!   predictive margins, self-contained.

pub mod beliefs;
pub mod equilibrium;
pub mod model;
pub mod popsim;
pub mod stats;
pub mod synthsurvey;

pub use beliefs::{
    belief_profile, expected_motivation, mc_oracle, participation_mass, BeliefProfile, McTally,
    Motivation, ParticipationRule,
};
pub use equilibrium::{
    belief_gap, calibrate_norm, reputational_cost_curve, solve_threshold, BeliefMode, Calibration,
    CalibrationError, EquilibriumResult, ReputationCostPoint,
};
pub use model::{
    decide, direct_benefit, reputational_benefit, Agent, Decision, ModelError, ModelParams,
};
pub use popsim::{
    derive_seed, lattice_population, sample_population, simulate_grid, sweep, GridSimulation,
    Population, SimError, SweepCell, SweepSpec,
};
pub use stats::{
    chi_square_independence, logistic_fit, mann_whitney_u, predictive_margin, ContingencyTable,
    FitOptions, RegressionFit, StatsError, TestResult,
};
pub use synthsurvey::{
    generate_countries, generate_microdata, CountrySettings, CountrySpec, IncentiveKind,
    IncentiveLevel, LinkSettings, SurveyError, SurveyRow,
};
