//! Population sampling, decision simulation, and deterministic parameter
//! sweeps.
//!
//! Sweep cells evaluate concurrently but results are keyed by cell index,
//! never by completion order, and every cell draws its population from a
//! sub-seed derived from the sweep seed and the cell index, so output is
//! bit-identical regardless of thread count.

use crate::equilibrium::{solve_threshold, BeliefMode, EquilibriumResult};
use crate::model::{decide, Agent, Decision, ModelError, ModelParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("population size must be at least 1")]
    EmptyPopulation,
    #[error("sweep axis `{0}` is empty")]
    EmptyAxis(&'static str),
    #[error("sweep would evaluate {cells} cells, above the configured maximum {max}")]
    TooManyCells { cells: usize, max: usize },
    #[error(transparent)]
    Param(#[from] ModelError),
}

/// Avalanche mixer used for sub-seed derivation (splitmix64 finalizer).
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the sub-seed for stream `stream` (cell index, country index, ...)
/// from a master seed: `splitmix64(master XOR splitmix64(stream + 1))`.
/// Streams are independent yet reproducible from the master seed alone.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(stream.wrapping_add(1)))
}

/// A sampled agent population; regeneration from `(seed, n)` is
/// bit-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub agents: Vec<Agent>,
    pub seed: u64,
    pub n: usize,
}

/// Draws `n` agents with independent uniform motivation coordinates
/// (intrinsic drawn before extrinsic for each agent).
pub fn sample_population(n: usize, seed: u64) -> Result<Population, SimError> {
    if n == 0 {
        return Err(SimError::EmptyPopulation);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let agents = (0..n)
        .map(|_| {
            let intrinsic: f64 = rng.gen();
            let extrinsic: f64 = rng.gen();
            Agent {
                intrinsic,
                extrinsic,
                cost: None,
            }
        })
        .collect();
    Ok(Population { agents, seed, n })
}

/// Jittered `side x side` lattice: one agent per cell, uniform within the
/// cell, so the marginal distribution stays uniform while scatter plots get
/// even coverage. Used for panel figures.
pub fn lattice_population(side: usize, seed: u64) -> Result<Population, SimError> {
    if side == 0 {
        return Err(SimError::EmptyPopulation);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = 1.0 / side as f64;
    let mut agents = Vec::with_capacity(side * side);
    for i in 0..side {
        for j in 0..side {
            let u: f64 = rng.gen();
            let w: f64 = rng.gen();
            agents.push(Agent {
                intrinsic: (i as f64 + u) * step,
                extrinsic: (j as f64 + w) * step,
                cost: None,
            });
        }
    }
    Ok(Population {
        agents,
        seed,
        n: side * side,
    })
}

/// A simulated panel: the solved equilibrium plus every agent's decision,
/// in population order. Non-convergence is carried on the equilibrium
/// diagnostics; decisions still use the best available threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSimulation {
    pub params: ModelParams,
    pub mode: BeliefMode,
    pub equilibrium: EquilibriumResult,
    pub decisions: Vec<(Agent, Decision)>,
}

impl GridSimulation {
    pub fn acting_fraction(&self) -> f64 {
        let acted = self.decisions.iter().filter(|(_, d)| d.acts).count();
        acted as f64 / self.decisions.len() as f64
    }

    /// Boundary intercept on the intrinsic-motivation axis fitted from the
    /// simulated decisions: the smallest rule statistic among actors
    /// (`v_a` without an incentive, `v_a + v_v` with one). `None` when
    /// nobody acts.
    pub fn fitted_boundary_intercept(&self) -> Option<f64> {
        self.decisions
            .iter()
            .filter(|(_, d)| d.acts)
            .map(|(a, _)| {
                if self.params.incentive {
                    a.intrinsic + a.extrinsic
                } else {
                    a.intrinsic
                }
            })
            .min_by(|x, y| x.partial_cmp(y).expect("finite rule statistics"))
    }
}

/// Solves beliefs once for `(params, mode)` and maps the decision rule over
/// the population, preserving agent order.
pub fn simulate_grid(
    params: &ModelParams,
    population: &Population,
    mode: BeliefMode,
) -> GridSimulation {
    let equilibrium = solve_threshold(params, mode);
    let decisions = population
        .agents
        .iter()
        .map(|agent| (*agent, decide(agent, params, &equilibrium.beliefs)))
        .collect();
    GridSimulation {
        params: *params,
        mode,
        equilibrium,
        decisions,
    }
}

/// Cartesian sweep over any subset of the model parameters.
///
/// Axes iterate with `cost` outermost and `pref_extrinsic` innermost; the
/// cell index encodes the tuple in that mixed-radix order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub cost: Vec<f64>,
    pub norm_extrinsic: Vec<f64>,
    pub norm_intrinsic: Vec<f64>,
    pub incentive: Vec<bool>,
    pub visibility: Vec<f64>,
    pub pref_intrinsic: Vec<f64>,
    pub pref_extrinsic: Vec<f64>,
    pub population_per_cell: usize,
    pub seed: u64,
    pub mode: BeliefMode,
    pub max_cells: usize,
}

impl SweepSpec {
    /// Singleton axes at the figure baseline; callers replace the axes they
    /// sweep.
    pub fn singleton(seed: u64, mode: BeliefMode) -> Self {
        Self {
            cost: vec![0.5],
            norm_extrinsic: vec![0.0],
            norm_intrinsic: vec![0.0],
            incentive: vec![true],
            visibility: vec![1.0],
            pref_intrinsic: vec![1.0],
            pref_extrinsic: vec![1.0],
            population_per_cell: 10_000,
            seed,
            mode,
            max_cells: 100_000,
        }
    }

    fn axis_lens(&self) -> [usize; 7] {
        [
            self.cost.len(),
            self.norm_extrinsic.len(),
            self.norm_intrinsic.len(),
            self.incentive.len(),
            self.visibility.len(),
            self.pref_intrinsic.len(),
            self.pref_extrinsic.len(),
        ]
    }

    /// Total number of cells in the cross product.
    pub fn cells(&self) -> usize {
        self.axis_lens().iter().product()
    }

    fn validate(&self) -> Result<(), SimError> {
        const NAMES: [&str; 7] = [
            "cost",
            "norm_extrinsic",
            "norm_intrinsic",
            "incentive",
            "visibility",
            "pref_intrinsic",
            "pref_extrinsic",
        ];
        for (len, name) in self.axis_lens().iter().zip(NAMES) {
            if *len == 0 {
                return Err(SimError::EmptyAxis(name));
            }
        }
        if self.population_per_cell == 0 {
            return Err(SimError::EmptyPopulation);
        }
        let cells = self.cells();
        if cells > self.max_cells {
            return Err(SimError::TooManyCells {
                cells,
                max: self.max_cells,
            });
        }
        Ok(())
    }

    fn params_at(&self, index: usize) -> Result<ModelParams, ModelError> {
        let lens = self.axis_lens();
        let mut rem = index;
        let mut coords = [0usize; 7];
        for k in (0..7).rev() {
            coords[k] = rem % lens[k];
            rem /= lens[k];
        }
        ModelParams::new(
            self.cost[coords[0]],
            self.incentive[coords[3]],
            self.visibility[coords[4]],
            self.pref_intrinsic[coords[5]],
            self.pref_extrinsic[coords[6]],
            self.norm_intrinsic[coords[2]],
            self.norm_extrinsic[coords[1]],
        )
    }
}

/// One evaluated sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub index: usize,
    pub params: ModelParams,
    pub t_star: f64,
    pub rate_analytic: f64,
    pub rate_empirical: f64,
    pub converged: bool,
}

/// Evaluates every cell of the sweep: solve the threshold, compute the
/// analytic participation rate, and measure the empirical acting fraction on
/// a fresh sub-seeded population. The cross product is validated (and its
/// size bounded) before any work starts.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepCell>, SimError> {
    spec.validate()?;
    // Validate every parameter point up front so no cell work happens on a
    // spec that is partially out of range.
    let all_params: Vec<ModelParams> = (0..spec.cells())
        .map(|i| spec.params_at(i))
        .collect::<Result<_, _>>()?;
    let cells = all_params
        .into_par_iter()
        .enumerate()
        .map(|(index, params)| {
            let population = sample_population(
                spec.population_per_cell,
                derive_seed(spec.seed, index as u64),
            )
            .expect("population_per_cell validated nonzero");
            let sim = simulate_grid(&params, &population, spec.mode);
            SweepCell {
                index,
                params,
                t_star: sim.equilibrium.t_star,
                rate_analytic: sim.equilibrium.participation_rate,
                rate_empirical: sim.acting_fraction(),
                converged: sim.equilibrium.converged,
            }
        })
        .collect();
    Ok(cells)
}
