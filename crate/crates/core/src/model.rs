//! Domain types and per-agent utility/decision functions.
//!
//! An agent characterized by intrinsic motivation `v_a` and extrinsic
//! motivation `v_v` (both uniform on the unit interval) chooses whether to
//! perform a prosocial act. The payoff of acting is a direct benefit
//! (motivation minus cost, with the extrinsic term active only under an
//! incentive) plus a reputational benefit: the visibility-weighted,
//! norm-weighted observer expectation of the agent's motivations given the
//! action. Ties resolve toward acting, so participation regions are closed.

use crate::beliefs::BeliefProfile;
use thiserror::Error;

/// Validation failures for model-level inputs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parameter `{name}` = {value} outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("belief profile incentive flag ({beliefs}) does not match params ({params})")]
    IncentiveMismatch { params: bool, beliefs: bool },
}

fn check_range(name: &'static str, value: f64, min: f64, max: f64) -> Result<f64, ModelError> {
    if value.is_finite() && value >= min && value <= max {
        Ok(value)
    } else {
        Err(ModelError::OutOfRange {
            name,
            value,
            min,
            max,
        })
    }
}

/// Population-level model constants.
///
/// `cost` is the common cost of acting (agents may carry an individual
/// override), `incentive` switches the extrinsic reward on, `visibility`
/// scales the whole reputational term, and the two `norm_*` weights translate
/// perceived motivation into reputational benefit (positive norm) or cost
/// (negative norm). The `pref_*` weights are the agent's own taste for being
/// seen as intrinsically / extrinsically motivated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub cost: f64,
    pub incentive: bool,
    pub visibility: f64,
    pub pref_intrinsic: f64,
    pub pref_extrinsic: f64,
    pub norm_intrinsic: f64,
    pub norm_extrinsic: f64,
}

impl ModelParams {
    /// Validates every field against its admissible range.
    ///
    /// Costs, visibility and preference weights live in `[0, 1]`; norm
    /// weights live in `[-1, 1]`.
    pub fn new(
        cost: f64,
        incentive: bool,
        visibility: f64,
        pref_intrinsic: f64,
        pref_extrinsic: f64,
        norm_intrinsic: f64,
        norm_extrinsic: f64,
    ) -> Result<Self, ModelError> {
        Ok(Self {
            cost: check_range("cost", cost, 0.0, 1.0)?,
            incentive,
            visibility: check_range("visibility", visibility, 0.0, 1.0)?,
            pref_intrinsic: check_range("pref_intrinsic", pref_intrinsic, 0.0, 1.0)?,
            pref_extrinsic: check_range("pref_extrinsic", pref_extrinsic, 0.0, 1.0)?,
            norm_intrinsic: check_range("norm_intrinsic", norm_intrinsic, -1.0, 1.0)?,
            norm_extrinsic: check_range("norm_extrinsic", norm_extrinsic, -1.0, 1.0)?,
        })
    }

    /// Figure-style baseline: full visibility, unit preference weights,
    /// neutral intrinsic norm.
    pub fn baseline(cost: f64, incentive: bool, norm_extrinsic: f64) -> Result<Self, ModelError> {
        Self::new(cost, incentive, 1.0, 1.0, 1.0, 0.0, norm_extrinsic)
    }
}

/// One individual's motivation draw, plus an optional private cost that
/// overrides the population cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agent {
    pub intrinsic: f64,
    pub extrinsic: f64,
    pub cost: Option<f64>,
}

impl Agent {
    pub fn new(intrinsic: f64, extrinsic: f64) -> Result<Self, ModelError> {
        Ok(Self {
            intrinsic: check_range("intrinsic", intrinsic, 0.0, 1.0)?,
            extrinsic: check_range("extrinsic", extrinsic, 0.0, 1.0)?,
            cost: None,
        })
    }

    pub fn with_cost(intrinsic: f64, extrinsic: f64, cost: f64) -> Result<Self, ModelError> {
        Ok(Self {
            cost: Some(check_range("agent cost", cost, 0.0, 1.0)?),
            ..Self::new(intrinsic, extrinsic)?
        })
    }

    /// The cost this agent actually faces.
    pub fn effective_cost(&self, params: &ModelParams) -> f64 {
        self.cost.unwrap_or(params.cost)
    }
}

/// Outcome of the binary participation choice, with both candidate utilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub acts: bool,
    pub utility_act: f64,
    pub utility_abstain: f64,
}

/// Direct benefit of choosing `acts`: motivation payoff net of cost, zero on
/// abstention. The extrinsic term only pays out when an incentive is offered.
pub fn direct_benefit(agent: &Agent, params: &ModelParams, acts: bool) -> f64 {
    if !acts {
        return 0.0;
    }
    let reward = if params.incentive {
        agent.extrinsic
    } else {
        0.0
    };
    agent.intrinsic + reward - agent.effective_cost(params)
}

/// Reputational benefit of choosing `acts` under the observers' beliefs:
/// visibility times the norm- and preference-weighted conditional
/// expectations of the agent's motivations given the action.
///
/// The profile must have been computed for the same incentive regime as
/// `params`; a mismatch is a contract violation and is reported as an error.
pub fn reputational_benefit(
    params: &ModelParams,
    beliefs: &BeliefProfile,
    acts: bool,
) -> Result<f64, ModelError> {
    if beliefs.incentive != params.incentive {
        return Err(ModelError::IncentiveMismatch {
            params: params.incentive,
            beliefs: beliefs.incentive,
        });
    }
    let (e_intr, e_extr) = if acts {
        (beliefs.intrinsic_given_act, beliefs.extrinsic_given_act)
    } else {
        (
            beliefs.intrinsic_given_abstain,
            beliefs.extrinsic_given_abstain,
        )
    };
    Ok(params.visibility
        * (params.norm_intrinsic * params.pref_intrinsic * e_intr
            + params.norm_extrinsic * params.pref_extrinsic * e_extr))
}

/// Chooses the action with the larger total benefit; indifference resolves
/// toward acting.
///
/// The belief profile must match `params.incentive` (checked, panics on
/// violation: passing inconsistent beliefs is a programming error).
pub fn decide(agent: &Agent, params: &ModelParams, beliefs: &BeliefProfile) -> Decision {
    let utility_act = direct_benefit(agent, params, true)
        + reputational_benefit(params, beliefs, true).expect("belief profile incentive mismatch");
    let utility_abstain = direct_benefit(agent, params, false)
        + reputational_benefit(params, beliefs, false).expect("belief profile incentive mismatch");
    Decision {
        acts: utility_act >= utility_abstain,
        utility_act,
        utility_abstain,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beliefs::{belief_profile, ParticipationRule};

    fn flat_beliefs(incentive: bool) -> BeliefProfile {
        // A rule nobody refuses: beliefs carry no action information beyond
        // the degenerate-region convention.
        belief_profile(&ParticipationRule::new(incentive, -1.0))
    }

    #[test]
    fn params_reject_out_of_range() {
        assert!(ModelParams::new(1.2, false, 1.0, 1.0, 1.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(0.5, false, 1.0, 1.0, 1.0, 0.0, -1.5).is_err());
        assert!(ModelParams::new(0.5, false, f64::NAN, 1.0, 1.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(0.0, true, 0.0, 0.0, 0.0, -1.0, 1.0).is_ok());
    }

    #[test]
    fn agent_rejects_out_of_range() {
        assert!(Agent::new(-0.1, 0.5).is_err());
        assert!(Agent::new(0.5, 1.1).is_err());
        assert!(Agent::with_cost(0.5, 0.5, 1.5).is_err());
    }

    #[test]
    fn direct_benefit_substitution() {
        let params = ModelParams::baseline(0.4, false, 0.0).unwrap();
        let agent = Agent::new(0.7, 0.3).unwrap();
        let b = direct_benefit(&agent, &params, true);
        assert!((b - 0.3).abs() < 1e-15);
    }

    #[test]
    fn direct_benefit_zero_on_abstain() {
        let params = ModelParams::baseline(0.9, true, -1.0).unwrap();
        let agent = Agent::new(0.2, 0.8).unwrap();
        assert_eq!(direct_benefit(&agent, &params, false), 0.0);
    }

    #[test]
    fn direct_benefit_with_incentive() {
        let params = ModelParams::baseline(0.4, true, 0.0).unwrap();
        let agent = Agent::new(0.7, 0.3).unwrap();
        let b = direct_benefit(&agent, &params, true);
        assert!((b - 0.6).abs() < 1e-15);
    }

    #[test]
    fn per_agent_cost_overrides_population_cost() {
        let params = ModelParams::baseline(0.4, false, 0.0).unwrap();
        let agent = Agent::with_cost(0.7, 0.0, 0.1).unwrap();
        assert!((direct_benefit(&agent, &params, true) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn decision_rule_on_dense_motivation_cost_grid() {
        // Neutral norms: acts iff v_a >= c_i without an incentive, and iff
        // v_a + v_v >= c_i with one, including per-agent cost overrides.
        for incentive in [false, true] {
            let params = ModelParams::baseline(0.5, incentive, 0.0).unwrap();
            let beliefs = belief_profile(&ParticipationRule::new(incentive, 0.5));
            for vi in 0..=20 {
                for ci in 0..=20 {
                    let va = vi as f64 / 20.0;
                    let cost = ci as f64 / 20.0;
                    let agent = Agent::with_cost(va, 0.3, cost).unwrap();
                    let statistic = if incentive { va + 0.3 } else { va };
                    assert_eq!(
                        decide(&agent, &params, &beliefs).acts,
                        statistic >= cost,
                        "incentive={incentive} va={va} c={cost}"
                    );
                }
            }
        }
    }

    #[test]
    fn reputation_vanishes_without_visibility() {
        let mut params = ModelParams::baseline(0.4, true, 1.0).unwrap();
        params.visibility = 0.0;
        let beliefs = belief_profile(&ParticipationRule::new(true, 1.0));
        assert_eq!(reputational_benefit(&params, &beliefs, true).unwrap(), 0.0);
        assert_eq!(reputational_benefit(&params, &beliefs, false).unwrap(), 0.0);
    }

    #[test]
    fn reputation_vanishes_without_norms() {
        let params = ModelParams::baseline(0.4, true, 0.0).unwrap();
        let beliefs = belief_profile(&ParticipationRule::new(true, 0.7));
        assert_eq!(reputational_benefit(&params, &beliefs, true).unwrap(), 0.0);
    }

    #[test]
    fn reputation_reads_acting_expectation() {
        // Norm weight only on the extrinsic coordinate; rule `v_a + v_v >= 1`
        // puts the acting mean at the triangle centroid 2/3.
        let params = ModelParams::baseline(0.4, true, 1.0).unwrap();
        let beliefs = belief_profile(&ParticipationRule::new(true, 1.0));
        let r = reputational_benefit(&params, &beliefs, true).unwrap();
        assert!((r - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn reputation_rejects_incentive_mismatch() {
        let params = ModelParams::baseline(0.4, true, 1.0).unwrap();
        let beliefs = belief_profile(&ParticipationRule::new(false, 0.4));
        assert_eq!(
            reputational_benefit(&params, &beliefs, true),
            Err(ModelError::IncentiveMismatch {
                params: true,
                beliefs: false
            })
        );
    }

    #[test]
    fn decide_threshold_without_norms_no_incentive() {
        // With neutral norms the cutoff is v_a >= c.
        let params = ModelParams::baseline(0.4, false, 0.0).unwrap();
        let beliefs = flat_beliefs(false);
        assert!(decide(&Agent::new(0.5, 0.0).unwrap(), &params, &beliefs).acts);
        assert!(!decide(&Agent::new(0.39, 0.9).unwrap(), &params, &beliefs).acts);
    }

    #[test]
    fn decide_threshold_without_norms_with_incentive() {
        let params = ModelParams::baseline(0.6, true, 0.0).unwrap();
        let beliefs = flat_beliefs(true);
        assert!(decide(&Agent::new(0.3, 0.5).unwrap(), &params, &beliefs).acts);
        assert!(!decide(&Agent::new(0.3, 0.2).unwrap(), &params, &beliefs).acts);
    }

    #[test]
    fn decide_acts_on_exact_tie() {
        let params = ModelParams::baseline(0.4, false, 0.0).unwrap();
        let beliefs = flat_beliefs(false);
        let d = decide(&Agent::new(0.4, 0.0).unwrap(), &params, &beliefs);
        assert_eq!(d.utility_act, d.utility_abstain);
        assert!(d.acts);
    }

    #[test]
    fn utility_difference_affine_in_motivations() {
        // d(utility gap)/d v_a = 1 and d/d v_v = R, with beliefs held fixed.
        let beliefs = belief_profile(&ParticipationRule::new(true, 0.8));
        let params = ModelParams::new(0.5, true, 1.0, 0.9, 0.7, 0.3, -0.6).unwrap();
        let gap = |va: f64, vv: f64| {
            let d = decide(&Agent::new(va, vv).unwrap(), &params, &beliefs);
            d.utility_act - d.utility_abstain
        };
        let base = gap(0.2, 0.3);
        assert!((gap(0.45, 0.3) - base - 0.25).abs() < 1e-12);
        assert!((gap(0.2, 0.8) - base - 0.5).abs() < 1e-12);

        let params0 = ModelParams::new(0.5, false, 1.0, 0.9, 0.7, 0.3, -0.6).unwrap();
        let beliefs0 = belief_profile(&ParticipationRule::new(false, 0.5));
        let gap0 = |va: f64, vv: f64| {
            let d = decide(&Agent::new(va, vv).unwrap(), &params0, &beliefs0);
            d.utility_act - d.utility_abstain
        };
        assert!((gap0(0.2, 0.9) - gap0(0.2, 0.1)).abs() < 1e-15);
    }
}
