//! Observer beliefs: conditional expectations of the motivation coordinates
//! over the unit square, given a threshold participation rule.
//!
//! Motivations `(v_a, v_v)` are independent uniform on `[0,1]^2`. Without an
//! incentive the rule is `v_a >= t`; with an incentive it is `v_a + v_v >= t`.
//! Both regions are closed (the decision rule acts on ties), which changes
//! nothing for the expectations since the boundary has measure zero.
//!
//! Closed forms come from unit-square geometry. For `v_a >= t` the acting
//! region is a uniform tail, so `E(v_a | act) = (1+t)/2` and
//! `E(v_a | abstain) = t/2`. For `v_a + v_v >= t` the abstaining region is
//! the triangle below the diagonal: for `t` in `(0,1]`,
//! `E(v | act) = (1/2 - t^3/6) / (1 - t^2/2)` and `E(v | abstain) = t/3`; for
//! `t` in `[1,2)` the acting region is the upper triangle with centroid
//! coordinate `(t+1)/3`, and the abstaining mean follows from the law of
//! total expectation. Every formula is cross-checked against [`mc_oracle`].
//!
//! Convention for degenerate regions: when the acting or abstaining region
//! has zero measure, its conditional expectation is reported as the prior
//! mean `0.5` and the corresponding `*_degenerate` flag is set. The rule says
//! nothing about `v_v` when there is no incentive, so both `v_v`
//! expectations are the prior mean in that regime.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Threshold rule deciding who participates.
///
/// Without an incentive the meaningful threshold range is `[0,1]`, with one
/// it is `[0,2]`; values outside simply saturate the rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticipationRule {
    pub incentive: bool,
    pub threshold: f64,
}

impl ParticipationRule {
    /// Panics on a non-finite threshold (programming error).
    pub fn new(incentive: bool, threshold: f64) -> Self {
        assert!(threshold.is_finite(), "rule threshold must be finite");
        Self {
            incentive,
            threshold,
        }
    }

    /// Closed-region membership test.
    pub fn acts(&self, intrinsic: f64, extrinsic: f64) -> bool {
        if self.incentive {
            intrinsic + extrinsic >= self.threshold
        } else {
            intrinsic >= self.threshold
        }
    }

    /// Upper end of the threshold range over which the rule can change.
    pub fn saturation_point(&self) -> f64 {
        if self.incentive {
            2.0
        } else {
            1.0
        }
    }
}

/// Which motivation coordinate an expectation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Motivation {
    Intrinsic,
    Extrinsic,
}

/// The four conditional expectations induced by a participation rule, plus
/// the acting mass and degenerate-region flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeliefProfile {
    pub incentive: bool,
    pub intrinsic_given_act: f64,
    pub intrinsic_given_abstain: f64,
    pub extrinsic_given_act: f64,
    pub extrinsic_given_abstain: f64,
    pub mass_act: f64,
    /// Acting region has zero measure (for the Monte Carlo estimator: zero
    /// samples); the acting expectations are the prior-mean convention.
    pub act_degenerate: bool,
    /// Same for the abstaining region.
    pub abstain_degenerate: bool,
}

/// Prior mean of a uniform coordinate, also the degenerate-region convention.
pub const PRIOR_MEAN: f64 = 0.5;

/// Lebesgue measure of the acting region in the unit square.
pub fn participation_mass(rule: &ParticipationRule) -> f64 {
    let t = rule.threshold;
    if rule.incentive {
        if t <= 0.0 {
            1.0
        } else if t <= 1.0 {
            1.0 - t * t / 2.0
        } else if t < 2.0 {
            (2.0 - t) * (2.0 - t) / 2.0
        } else {
            0.0
        }
    } else {
        (1.0 - t).clamp(0.0, 1.0)
    }
}

/// Mean of one motivation coordinate over the acting (`acted = true`) or
/// abstaining region, with the degenerate-region and uninformative-coordinate
/// conventions applied.
pub fn expected_motivation(rule: &ParticipationRule, which: Motivation, acted: bool) -> f64 {
    let t = rule.threshold;
    if !rule.incentive {
        // The rule never constrains v_v in this regime.
        if which == Motivation::Extrinsic {
            return PRIOR_MEAN;
        }
        return match (acted, t) {
            (true, t) if t <= 0.0 => PRIOR_MEAN,
            (true, t) if t < 1.0 => 0.5 + 0.5 * t,
            (true, _) => PRIOR_MEAN,              // empty acting region
            (false, t) if t <= 0.0 => PRIOR_MEAN, // empty abstaining region
            (false, t) if t < 1.0 => 0.5 * t,
            (false, _) => PRIOR_MEAN, // whole square abstains
        };
    }
    // Incentive regime: the rule is symmetric in the two coordinates, so the
    // same expression serves both.
    let _ = which;
    if acted {
        if t <= 0.0 {
            PRIOR_MEAN
        } else if t <= 1.0 {
            (0.5 - t * t * t / 6.0) / (1.0 - t * t / 2.0)
        } else if t < 2.0 {
            (t + 1.0) / 3.0
        } else {
            PRIOR_MEAN // empty acting region
        }
    } else if t <= 0.0 {
        PRIOR_MEAN // empty abstaining region
    } else if t <= 1.0 {
        t / 3.0
    } else if t < 2.0 {
        let mass = (2.0 - t) * (2.0 - t) / 2.0;
        (0.5 - mass * (t + 1.0) / 3.0) / (1.0 - mass)
    } else {
        PRIOR_MEAN
    }
}

/// Assembles the full analytic profile for a rule.
pub fn belief_profile(rule: &ParticipationRule) -> BeliefProfile {
    let mass_act = participation_mass(rule);
    BeliefProfile {
        incentive: rule.incentive,
        intrinsic_given_act: expected_motivation(rule, Motivation::Intrinsic, true),
        intrinsic_given_abstain: expected_motivation(rule, Motivation::Intrinsic, false),
        extrinsic_given_act: expected_motivation(rule, Motivation::Extrinsic, true),
        extrinsic_given_abstain: expected_motivation(rule, Motivation::Extrinsic, false),
        mass_act,
        act_degenerate: mass_act == 0.0,
        abstain_degenerate: mass_act == 1.0,
    }
}

/// Per-region sample tallies from the Monte Carlo estimator, sufficient to
/// reconstruct means and their standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McTally {
    pub n_samples: u64,
    pub n_act: u64,
    pub sum_intrinsic_act: f64,
    pub sum_extrinsic_act: f64,
    pub sum_sq_intrinsic_act: f64,
    pub sum_sq_extrinsic_act: f64,
    pub sum_intrinsic_abstain: f64,
    pub sum_extrinsic_abstain: f64,
    pub sum_sq_intrinsic_abstain: f64,
    pub sum_sq_extrinsic_abstain: f64,
}

impl McTally {
    pub fn mass_act(&self) -> f64 {
        self.n_act as f64 / self.n_samples as f64
    }

    fn mean(sum: f64, count: u64) -> f64 {
        if count == 0 {
            PRIOR_MEAN
        } else {
            sum / count as f64
        }
    }

    /// Standard error of a conditional sample mean; zero when fewer than two
    /// samples landed in the region.
    pub fn mean_std_err(sum: f64, sum_sq: f64, count: u64) -> f64 {
        if count < 2 {
            return 0.0;
        }
        let m = count as f64;
        let mean = sum / m;
        let var = ((sum_sq / m - mean * mean) * m / (m - 1.0)).max(0.0);
        (var / m).sqrt()
    }

    /// Binomial standard error of the acting-mass estimate.
    pub fn mass_std_err(&self) -> f64 {
        let p = self.mass_act();
        (p * (1.0 - p) / self.n_samples as f64).sqrt()
    }
}

/// Draws `n_samples` uniform motivation pairs with a seeded generator and
/// tallies both regions. Identical `(seed, n_samples)` reproduce identical
/// tallies bit for bit.
pub fn mc_tally(rule: &ParticipationRule, n_samples: u64, seed: u64) -> McTally {
    assert!(n_samples >= 1, "mc_tally requires at least one sample");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = McTally {
        n_samples,
        n_act: 0,
        sum_intrinsic_act: 0.0,
        sum_extrinsic_act: 0.0,
        sum_sq_intrinsic_act: 0.0,
        sum_sq_extrinsic_act: 0.0,
        sum_intrinsic_abstain: 0.0,
        sum_extrinsic_abstain: 0.0,
        sum_sq_intrinsic_abstain: 0.0,
        sum_sq_extrinsic_abstain: 0.0,
    };
    for _ in 0..n_samples {
        let va: f64 = rng.gen();
        let vv: f64 = rng.gen();
        if rule.acts(va, vv) {
            tally.n_act += 1;
            tally.sum_intrinsic_act += va;
            tally.sum_extrinsic_act += vv;
            tally.sum_sq_intrinsic_act += va * va;
            tally.sum_sq_extrinsic_act += vv * vv;
        } else {
            tally.sum_intrinsic_abstain += va;
            tally.sum_extrinsic_abstain += vv;
            tally.sum_sq_intrinsic_abstain += va * va;
            tally.sum_sq_extrinsic_abstain += vv * vv;
        }
    }
    tally
}

/// Monte Carlo estimate of the belief profile.
///
/// A region that received no samples is reported with the prior-mean
/// convention and its degenerate flag set, distinguishing "empty region"
/// from "estimated zero".
pub fn mc_oracle(rule: &ParticipationRule, n_samples: u64, seed: u64) -> BeliefProfile {
    let tally = mc_tally(rule, n_samples, seed);
    let n_abstain = tally.n_samples - tally.n_act;
    BeliefProfile {
        incentive: rule.incentive,
        intrinsic_given_act: McTally::mean(tally.sum_intrinsic_act, tally.n_act),
        intrinsic_given_abstain: McTally::mean(tally.sum_intrinsic_abstain, n_abstain),
        extrinsic_given_act: McTally::mean(tally.sum_extrinsic_act, tally.n_act),
        extrinsic_given_abstain: McTally::mean(tally.sum_extrinsic_abstain, n_abstain),
        mass_act: tally.mass_act(),
        act_degenerate: tally.n_act == 0,
        abstain_degenerate: n_abstain == 0,
    }
}
