//! Shared input builders for the benchmark targets.

use normsim_core::model::ModelParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Baseline incentive-regime parameters at the given cost and norm.
pub fn params(cost: f64, norm_extrinsic: f64) -> ModelParams {
    ModelParams::baseline(cost, true, norm_extrinsic).expect("baseline params in range")
}

/// Synthetic logistic-regression problem with an interaction column.
pub fn regression_problem(n: usize, seed: u64) -> (Vec<String>, Vec<Vec<f64>>, Vec<bool>) {
    let names = vec![
        "intercept".to_string(),
        "norm".to_string(),
        "incentive".to_string(),
        "norm:incentive".to_string(),
        "age".to_string(),
        "gender".to_string(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut outcomes = Vec::with_capacity(n);
    for _ in 0..n {
        let norm: f64 = rng.gen();
        let incentive = f64::from(u8::from(rng.gen::<f64>() < 0.5));
        let age = f64::from(rng.gen_range(18..=80u32));
        let gender = f64::from(rng.gen_range(0..=1u8));
        let eta = -0.6 + 0.3 * norm - 0.2 * incentive + 1.2 * norm * incentive;
        rows.push(vec![1.0, norm, incentive, norm * incentive, age, gender]);
        outcomes.push(rng.gen::<f64>() < 1.0 / (1.0 + (-eta).exp()));
    }
    (names, rows, outcomes)
}

/// Two moderately overlapping samples for the rank test.
pub fn rank_samples(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = (0..n).map(|_| rng.gen::<f64>()).collect();
    let y = (0..n).map(|_| rng.gen::<f64>() + 0.1).collect();
    (x, y)
}
