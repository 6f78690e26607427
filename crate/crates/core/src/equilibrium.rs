//! Self-consistent participation thresholds.
//!
//! Observers infer motivation from who acts; agents weigh those inferences
//! when deciding to act. The equilibrium threshold solves
//!
//! `t = cost - visibility * (norm_a * pref_a * gap_a(t) + norm_v * pref_v * gap_v(t))`
//!
//! where `gap_x(t) = E(x | act) - E(x | abstain)` under the rule with
//! threshold `t`. Two belief modes are shipped: `Rational` solves the fixed
//! point (damped iteration with a bisection fallback on the defect
//! `t - rhs(t)`); `Naive` evaluates beliefs once at the reputation-free
//! threshold `t = cost` and returns the implied best-response threshold
//! without iterating. The modes coincide when both norm weights are zero.
//!
//! Off the informative threshold range the solver extends the belief gaps by
//! their boundary limits: impossible abstention (`t <= 0`) is attributed to
//! the lowest motivation type and impossible participation to the highest,
//! so `gap` tends to `1/2` at both ends and the defect is continuous. Under
//! the prior-mean degenerate convention instead, strong positive norms with
//! low cost would admit no fixed point at all (the defect jumps over zero at
//! `t = 0`). The belief profile attached to a result uses the same
//! extension, which keeps per-agent decisions consistent with the returned
//! threshold even in corner equilibria where everyone acts; degenerate-region
//! flags are still set.

use crate::beliefs::{
    belief_profile, expected_motivation, participation_mass, BeliefProfile, Motivation,
    ParticipationRule, PRIOR_MEAN,
};
use crate::model::ModelParams;
use thiserror::Error;

/// Residual tolerance below which a fixed point counts as converged.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Iteration budget for the damped fixed-point loop.
const MAX_ITERATIONS: u32 = 10_000;

/// Damping factor of the fixed-point update `t <- (1-l)*t + l*rhs(t)`.
const DAMPING: f64 = 0.5;

/// Subintervals scanned for sign changes in the bisection fallback.
const SCAN_POINTS: usize = 512;

/// How observers' beliefs are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeliefMode {
    /// Beliefs self-consistent with the threshold they induce.
    Rational,
    /// Beliefs frozen at the reputation-free threshold `t = cost`.
    Naive,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error("target rate {0} must lie strictly inside (0, 1)")]
    InvalidTarget(f64),
    #[error("target rate {target} outside attainable interval [{lo}, {hi}]")]
    UnattainableTarget { target: f64, lo: f64, hi: f64 },
}

/// Solved threshold with its supporting beliefs and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub t_star: f64,
    /// Belief profile agents best-respond to (at `t_star` in rational mode,
    /// at the reputation-free threshold in naive mode), with degenerate
    /// regions filled by boundary-limit expectations.
    pub beliefs: BeliefProfile,
    pub participation_rate: f64,
    /// Absolute defect `|t_star - rhs(t_star)|` of the mode's defining
    /// equation (zero by construction in naive mode).
    pub residual: f64,
    pub iterations: u32,
    pub converged: bool,
    pub mode: BeliefMode,
    /// All fixed points found when the fallback scan detects several;
    /// `t_star` is the one nearest the cost.
    pub roots: Vec<f64>,
    /// Best bracketing interval from the bisection path, when it ran.
    pub bracket: Option<(f64, f64)>,
}

/// One point of the incentive-induced reputation cost curves, evaluated at
/// the reputation-free threshold `t = cost` for both regimes.
///
/// Both fields are non-negative penalty magnitudes: `intrinsic_cost` is how
/// much smaller the intrinsic-signal gap is with an incentive than without,
/// `extrinsic_cost` is the extrinsic-signal gap opened by the incentive.
/// The signed differences `E(x|R=1,B=0) - E(x|R=1,B=1)` are their negations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReputationCostPoint {
    pub cost: f64,
    pub intrinsic_cost: f64,
    pub extrinsic_cost: f64,
}

/// Belief gap `E(x | act) - E(x | abstain)` with the boundary-limit
/// extension outside the informative threshold range.
///
/// Without an incentive the intrinsic gap is exactly `1/2` for every
/// threshold (uniform-tail identity `(1+t)/2 - t/2 = 1/2`, extended by its
/// limits), and the rule carries no extrinsic information at all. With an
/// incentive the two coordinates share one gap by symmetry of the rule.
pub fn belief_gap(incentive: bool, which: Motivation, threshold: f64) -> f64 {
    if !incentive {
        return match which {
            Motivation::Intrinsic => 0.5,
            Motivation::Extrinsic => 0.0,
        };
    }
    let t = threshold.clamp(0.0, 2.0);
    if t <= 0.0 || t >= 2.0 {
        return 0.5;
    }
    let rule = ParticipationRule::new(true, t);
    expected_motivation(&rule, which, true) - expected_motivation(&rule, which, false)
}

/// Belief profile with degenerate regions filled by their boundary-limit
/// expectations (lowest type for impossible abstention, highest type for
/// impossible participation). Interior thresholds reproduce
/// [`belief_profile`] exactly.
pub fn extended_profile(rule: &ParticipationRule) -> BeliefProfile {
    let mut p = belief_profile(rule);
    if p.abstain_degenerate {
        p.intrinsic_given_abstain = 0.0;
        p.extrinsic_given_abstain = if rule.incentive { 0.0 } else { PRIOR_MEAN };
    }
    if p.act_degenerate {
        p.intrinsic_given_act = 1.0;
        p.extrinsic_given_act = if rule.incentive { 1.0 } else { PRIOR_MEAN };
    }
    p
}

fn reputation_gain(params: &ModelParams, t: f64) -> f64 {
    params.visibility
        * (params.norm_intrinsic
            * params.pref_intrinsic
            * belief_gap(params.incentive, Motivation::Intrinsic, t)
            + params.norm_extrinsic
                * params.pref_extrinsic
                * belief_gap(params.incentive, Motivation::Extrinsic, t))
}

fn best_response(params: &ModelParams, t: f64) -> f64 {
    params.cost - reputation_gain(params, t)
}

fn finish(
    params: &ModelParams,
    mode: BeliefMode,
    t_star: f64,
    iterations: u32,
) -> EquilibriumResult {
    let beliefs_at = match mode {
        BeliefMode::Rational => t_star,
        BeliefMode::Naive => params.cost,
    };
    let residual = match mode {
        BeliefMode::Rational => (t_star - best_response(params, t_star)).abs(),
        // Naive mode returns the best response to cost-threshold beliefs
        // directly; its defining equation holds by construction.
        BeliefMode::Naive => 0.0,
    };
    let rule = ParticipationRule::new(params.incentive, t_star);
    EquilibriumResult {
        t_star,
        beliefs: extended_profile(&ParticipationRule::new(params.incentive, beliefs_at)),
        participation_rate: participation_mass(&rule),
        residual,
        iterations,
        converged: residual <= RESIDUAL_TOLERANCE,
        mode,
        roots: vec![t_star],
        bracket: None,
    }
}

/// Collapses a sign-change bracket of `f` to width `2^-60` of its span.
fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    debug_assert!(f(lo) <= 0.0 && f(hi) >= 0.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    (lo, hi)
}

/// Scans the defect for sign changes and bisects every bracket found.
fn defect_scan_roots(params: &ModelParams) -> (Vec<f64>, Option<(f64, f64)>) {
    let defect = |t: f64| t - best_response(params, t);
    let lo = (params.cost - 2.0).min(0.0);
    let hi = (params.cost + 2.0).max(2.0);
    let step = (hi - lo) / SCAN_POINTS as f64;
    let mut roots = Vec::new();
    let mut last_bracket = None;
    let mut prev_t = lo;
    let mut prev_f = defect(lo);
    for i in 1..=SCAN_POINTS {
        let t = lo + step * i as f64;
        let f = defect(t);
        if prev_f == 0.0 {
            roots.push(prev_t);
        } else if prev_f < 0.0 && f >= 0.0 {
            let (blo, bhi) = bisect(&defect, prev_t, t);
            roots.push(0.5 * (blo + bhi));
            last_bracket = Some((blo, bhi));
        } else if prev_f > 0.0 && f <= 0.0 {
            // Defect crossing downward: bisect the reflected function.
            let neg = |t: f64| -defect(t);
            let (blo, bhi) = bisect(&neg, prev_t, t);
            roots.push(0.5 * (blo + bhi));
            last_bracket = Some((blo, bhi));
        }
        prev_t = t;
        prev_f = f;
    }
    (roots, last_bracket)
}

/// Solves for the participation threshold under the requested belief mode.
///
/// Rational mode runs the damped fixed-point iteration from `t = cost`
/// (damping 1/2, budget 10 000 iterations, residual tolerance `1e-10`) and
/// falls back to a 512-point defect scan plus bisection when the iteration
/// stalls or oscillates. If the scan finds several fixed points, all are
/// reported and the one nearest the cost is designated `t_star`. A result
/// that misses the tolerance is returned with `converged = false` and the
/// best bracket, never silently as converged.
pub fn solve_threshold(params: &ModelParams, mode: BeliefMode) -> EquilibriumResult {
    if mode == BeliefMode::Naive {
        return finish(params, mode, best_response(params, params.cost), 0);
    }

    let mut t = params.cost;
    let mut checkpoint_defect = f64::INFINITY;
    for iteration in 0..MAX_ITERATIONS {
        let rhs = best_response(params, t);
        let defect = t - rhs;
        if defect.abs() <= RESIDUAL_TOLERANCE {
            return finish(params, mode, t, iteration);
        }
        // Stall / oscillation watchdog: the damped map is contractive on
        // this model, so any 32-step window must shrink the defect.
        if iteration % 32 == 0 {
            if defect.abs() > 0.9 * checkpoint_defect {
                break;
            }
            checkpoint_defect = defect.abs();
        }
        t = (1.0 - DAMPING) * t + DAMPING * rhs;
    }

    // Bisection fallback on the defect function.
    let (roots, bracket) = defect_scan_roots(params);
    let t_star = roots
        .iter()
        .copied()
        .min_by(|a, b| {
            let da = (a - params.cost).abs();
            let db = (b - params.cost).abs();
            da.partial_cmp(&db).expect("finite root distances")
        })
        .unwrap_or(t);
    let mut result = finish(params, mode, t_star, MAX_ITERATIONS);
    result.roots = if roots.is_empty() {
        vec![t_star]
    } else {
        roots
    };
    result.bracket = bracket;
    result
}

/// Incentive-induced reputation cost curves over a cost grid, at
/// reputation-free thresholds (`t = cost` in both regimes).
///
/// Panics if a grid value leaves `[0, 1]` (caller contract).
pub fn reputational_cost_curve(cost_grid: &[f64]) -> Vec<ReputationCostPoint> {
    cost_grid
        .iter()
        .map(|&c| {
            assert!(
                (0.0..=1.0).contains(&c),
                "cost grid value {c} outside [0, 1]"
            );
            let diagonal_gap = belief_gap(true, Motivation::Extrinsic, c);
            ReputationCostPoint {
                cost: c,
                intrinsic_cost: belief_gap(false, Motivation::Intrinsic, c) - diagonal_gap,
                extrinsic_cost: diagonal_gap,
            }
        })
        .collect()
}

/// Result of inverting the participation rate for the extrinsic norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub norm_extrinsic: f64,
    pub achieved_rate: f64,
    pub target_rate: f64,
    pub iterations: u32,
}

/// Finds the extrinsic norm in `[-1, 1]` whose equilibrium participation
/// rate matches `target_rate`, by monotone bisection (the rate is
/// non-decreasing in the norm). Targets outside the attainable interval, or
/// inside a flat response, are reported as errors carrying the interval.
pub fn calibrate_norm(
    target_rate: f64,
    params: &ModelParams,
    mode: BeliefMode,
) -> Result<Calibration, CalibrationError> {
    if !(target_rate > 0.0 && target_rate < 1.0) {
        return Err(CalibrationError::InvalidTarget(target_rate));
    }
    let rate_at = |norm: f64| {
        let p = ModelParams {
            norm_extrinsic: norm,
            ..*params
        };
        solve_threshold(&p, mode).participation_rate
    };
    let rate_lo = rate_at(-1.0);
    let rate_hi = rate_at(1.0);
    let slack = 1e-9;
    if target_rate < rate_lo - slack || target_rate > rate_hi + slack {
        return Err(CalibrationError::UnattainableTarget {
            target: target_rate,
            lo: rate_lo,
            hi: rate_hi,
        });
    }
    let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
    let mut iterations = 0;
    while hi - lo > 1e-12 && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if rate_at(mid) < target_rate {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let norm = 0.5 * (lo + hi);
    let achieved = rate_at(norm);
    if (achieved - target_rate).abs() > 1e-6 {
        // Flat spot in the response: the bisection collapsed without
        // matching the target.
        return Err(CalibrationError::UnattainableTarget {
            target: target_rate,
            lo: rate_lo,
            hi: rate_hi,
        });
    }
    Ok(Calibration {
        norm_extrinsic: norm,
        achieved_rate: achieved,
        target_rate,
        iterations,
    })
}
