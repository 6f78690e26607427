//! Synthetic multi-country survey microdata.
//!
//! Countries carry survey-scale norms (share of respondents finding an
//! incentive acceptable, in `[0,1]`) and a three-level incentive regime
//! (none / partial / full). Individuals draw uniform motivations, inherit
//! the country's cost, and decide through the equilibrium model; the
//! recorded donation indicator is that decision. Socio-demographic
//! covariates are drawn independently of everything else: they are noise
//! carriers for the downstream regression, not model inputs.
//!
//! Scale conventions (survey scale is implicit in the source design, the
//! model scale is ours):
//! - norms: model weight `S = 2 * norm - 1`, so 50% acceptability is the
//!   neutral norm;
//! - incentives: the binary model incentive is "coding > 0"; the partial
//!   level can optionally attenuate visibility by half to mimic partial
//!   availability;
//! - motivation flags: reported as set when the latent coordinate exceeds
//!   the `1 - share` quantile, so the flag prevalence matches the configured
//!   population share.

use crate::equilibrium::{solve_threshold, BeliefMode};
use crate::model::{decide, Agent, ModelParams};
use crate::popsim::derive_seed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurveyError {
    #[error("need at least 2 countries, got {0}")]
    TooFewCountries(usize),
    #[error("rows per country must be at least 1")]
    EmptyCountrySample,
    #[error("degenerate or out-of-range setting `{0}`")]
    BadSetting(&'static str),
}

/// Three-level incentive regime coding (none / partial / full availability).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncentiveLevel {
    None,
    Partial,
    Full,
}

impl IncentiveLevel {
    /// Numeric coding used by the regression design: 0, 0.5, 1.
    pub fn coding(self) -> f64 {
        match self {
            IncentiveLevel::None => 0.0,
            IncentiveLevel::Partial => 0.5,
            IncentiveLevel::Full => 1.0,
        }
    }
}

/// Which incentive type drives the model link for a given experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncentiveKind {
    Financial,
    Time,
}

/// Country-level variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountrySpec {
    pub country_id: u32,
    /// Share finding financial incentives acceptable, in `[0,1]`.
    pub norm_financial: f64,
    /// Share finding time incentives acceptable, in `[0,1]`.
    pub norm_time: f64,
    pub incentive_financial: IncentiveLevel,
    pub incentive_time: IncentiveLevel,
    pub cost_mean: f64,
}

impl CountrySpec {
    pub fn norm(&self, kind: IncentiveKind) -> f64 {
        match kind {
            IncentiveKind::Financial => self.norm_financial,
            IncentiveKind::Time => self.norm_time,
        }
    }

    pub fn incentive(&self, kind: IncentiveKind) -> IncentiveLevel {
        match kind {
            IncentiveKind::Financial => self.incentive_financial,
            IncentiveKind::Time => self.incentive_time,
        }
    }
}

/// Distribution settings for country generation. Defaults reproduce the
/// source survey's descriptive ranges: financial norms span 0.02-0.39 and
/// time norms 0.12-0.70; 14% of countries offer financial incentives at all
/// operators and 4% at some, while time incentives split 29% full / 25%
/// employer-dependent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountrySettings {
    pub financial_norm_range: (f64, f64),
    pub time_norm_range: (f64, f64),
    pub financial_full_share: f64,
    pub financial_partial_share: f64,
    pub time_full_share: f64,
    pub time_partial_share: f64,
    pub cost_range: (f64, f64),
}

impl Default for CountrySettings {
    fn default() -> Self {
        Self {
            financial_norm_range: (0.02, 0.39),
            time_norm_range: (0.12, 0.70),
            financial_full_share: 0.14,
            financial_partial_share: 0.04,
            time_full_share: 0.29,
            time_partial_share: 0.25,
            cost_range: (0.4, 0.4),
        }
    }
}

impl CountrySettings {
    fn validate(&self) -> Result<(), SurveyError> {
        let range_ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo <= hi;
        let unit_range_ok = |r: (f64, f64)| range_ok(r) && r.0 >= 0.0 && r.1 <= 1.0;
        if !unit_range_ok(self.financial_norm_range) {
            return Err(SurveyError::BadSetting("financial_norm_range"));
        }
        if !unit_range_ok(self.time_norm_range) {
            return Err(SurveyError::BadSetting("time_norm_range"));
        }
        if !unit_range_ok(self.cost_range) {
            return Err(SurveyError::BadSetting("cost_range"));
        }
        for (full, partial, name) in [
            (
                self.financial_full_share,
                self.financial_partial_share,
                "financial incentive shares",
            ),
            (
                self.time_full_share,
                self.time_partial_share,
                "time incentive shares",
            ),
        ] {
            if !(0.0..=1.0).contains(&full)
                || !(0.0..=1.0).contains(&partial)
                || full + partial > 1.0 + 1e-12
            {
                return Err(SurveyError::BadSetting(match name {
                    "financial incentive shares" => "financial incentive shares",
                    _ => "time incentive shares",
                }));
            }
        }
        Ok(())
    }
}

fn draw_level(rng: &mut ChaCha8Rng, full_share: f64, partial_share: f64) -> IncentiveLevel {
    let u: f64 = rng.gen();
    if u < full_share {
        IncentiveLevel::Full
    } else if u < full_share + partial_share {
        IncentiveLevel::Partial
    } else {
        IncentiveLevel::None
    }
}

/// Draws `n_countries` country specifications (norms uniform in the
/// configured ranges, incentive regimes with the configured shares).
pub fn generate_countries(
    n_countries: usize,
    settings: &CountrySettings,
    seed: u64,
) -> Result<Vec<CountrySpec>, SurveyError> {
    if n_countries < 2 {
        return Err(SurveyError::TooFewCountries(n_countries));
    }
    settings.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uniform_in = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| {
        let u: f64 = rng.gen();
        lo + u * (hi - lo)
    };
    Ok((0..n_countries)
        .map(|i| CountrySpec {
            country_id: i as u32,
            norm_financial: uniform_in(&mut rng, settings.financial_norm_range),
            norm_time: uniform_in(&mut rng, settings.time_norm_range),
            incentive_financial: draw_level(
                &mut rng,
                settings.financial_full_share,
                settings.financial_partial_share,
            ),
            incentive_time: draw_level(
                &mut rng,
                settings.time_full_share,
                settings.time_partial_share,
            ),
            cost_mean: uniform_in(&mut rng, settings.cost_range),
        })
        .collect())
}

/// How country variables map into model parameters and how latent
/// motivations are reported as survey flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSettings {
    /// Which incentive type drives this experiment.
    pub kind: IncentiveKind,
    /// Base visibility; set to zero to switch the reputation channel off.
    pub visibility: f64,
    /// Halve visibility for the partial incentive level.
    pub attenuate_partial: bool,
    /// Target prevalence of the intrinsic-motivation flag.
    pub intrinsic_flag_share: f64,
    /// Target prevalence of the extrinsic-motivation flag.
    pub extrinsic_flag_share: f64,
    pub mode: BeliefMode,
}

impl Default for LinkSettings {
    fn default() -> Self {
        Self {
            kind: IncentiveKind::Time,
            visibility: 1.0,
            attenuate_partial: true,
            intrinsic_flag_share: 0.63,
            extrinsic_flag_share: 0.06,
            mode: BeliefMode::Rational,
        }
    }
}

impl LinkSettings {
    fn validate(&self) -> Result<(), SurveyError> {
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(SurveyError::BadSetting("visibility"));
        }
        if !(0.0..=1.0).contains(&self.intrinsic_flag_share) {
            return Err(SurveyError::BadSetting("intrinsic_flag_share"));
        }
        if !(0.0..=1.0).contains(&self.extrinsic_flag_share) {
            return Err(SurveyError::BadSetting("extrinsic_flag_share"));
        }
        Ok(())
    }

    /// Model parameters for one country under this link.
    pub fn params_for(&self, country: &CountrySpec) -> ModelParams {
        let level = country.incentive(self.kind);
        let visibility = if level == IncentiveLevel::Partial && self.attenuate_partial {
            self.visibility * 0.5
        } else {
            self.visibility
        };
        ModelParams::new(
            country.cost_mean,
            level.coding() > 0.0,
            visibility,
            1.0,
            1.0,
            0.0,
            2.0 * country.norm(self.kind) - 1.0,
        )
        .expect("country settings validated to model ranges")
    }
}

/// One synthetic respondent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurveyRow {
    pub country_id: u32,
    pub donated: bool,
    /// Latent motivation draws (exported for diagnostics).
    pub intrinsic: f64,
    pub extrinsic: f64,
    pub intrinsic_flag: bool,
    pub extrinsic_flag: bool,
    pub age: u32,
    pub gender: u8,
    pub cohabiting: u8,
    pub education: u8,
    pub employed: u8,
    pub community: u8,
    pub children: u8,
}

/// Generates `n_per_country` rows per country. Country blocks generate
/// independently under sub-seeds derived from `seed` and the country index;
/// output is ordered by (country index, row index) and reproducible
/// regardless of parallel scheduling.
pub fn generate_microdata(
    countries: &[CountrySpec],
    n_per_country: usize,
    link: &LinkSettings,
    seed: u64,
) -> Result<Vec<SurveyRow>, SurveyError> {
    if countries.len() < 2 {
        return Err(SurveyError::TooFewCountries(countries.len()));
    }
    if n_per_country == 0 {
        return Err(SurveyError::EmptyCountrySample);
    }
    link.validate()?;
    let intrinsic_cutoff = 1.0 - link.intrinsic_flag_share;
    let extrinsic_cutoff = 1.0 - link.extrinsic_flag_share;
    let blocks: Vec<Vec<SurveyRow>> = countries
        .par_iter()
        .enumerate()
        .map(|(idx, country)| {
            let params = link.params_for(country);
            let equilibrium = solve_threshold(&params, link.mode);
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, idx as u64));
            (0..n_per_country)
                .map(|_| {
                    let intrinsic: f64 = rng.gen();
                    let extrinsic: f64 = rng.gen();
                    let agent = Agent {
                        intrinsic,
                        extrinsic,
                        cost: None,
                    };
                    let donated = decide(&agent, &params, &equilibrium.beliefs).acts;
                    SurveyRow {
                        country_id: country.country_id,
                        donated,
                        intrinsic,
                        extrinsic,
                        intrinsic_flag: intrinsic > intrinsic_cutoff,
                        extrinsic_flag: extrinsic > extrinsic_cutoff,
                        age: rng.gen_range(18..=80),
                        gender: rng.gen_range(0..=1),
                        cohabiting: u8::from(rng.gen::<f64>() < 0.6),
                        education: rng.gen_range(0..=3),
                        employed: u8::from(rng.gen::<f64>() < 0.55),
                        community: rng.gen_range(0..=2),
                        children: rng.gen_range(0..=3),
                    }
                })
                .collect()
        })
        .collect();
    Ok(blocks.into_iter().flatten().collect())
}
