//! Subcommand implementations. Every command is a pure function of
//! (config, seed): file contents depend on nothing else, so reruns are
//! byte-identical.

use crate::config::{
    incentive_flag, BeliefsConfig, CalibrateConfig, CostsConfig, ExperimentConfig, Figure1Config,
    OutputFormat, SweepConfig, SCHEMA_VERSION,
};
use crate::output::{fnv1a_hex, parse_float, write_atomic, Cell, Table};
use crate::CliError;
use normsim_core::beliefs::{belief_profile, mc_oracle, ParticipationRule};
use normsim_core::equilibrium::{calibrate_norm, reputational_cost_curve, Calibration};
use normsim_core::model::ModelParams;
use normsim_core::popsim::{
    derive_seed, lattice_population, simulate_grid, sweep, SweepCell, SweepSpec,
};
use normsim_core::stats::special::normal_two_sided_p;
use normsim_core::stats::{logistic_fit, predictive_margin, FitOptions, RegressionFit, INTERCEPT};
use normsim_core::synthsurvey::{
    generate_countries, generate_microdata, CountrySpec, IncentiveLevel, SurveyRow,
};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

/// Resolved run environment shared by all commands.
pub struct RunContext {
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    pub seed: Option<u64>,
    /// Raw config document, fingerprinted into manifests.
    pub raw_config: Value,
}

impl RunContext {
    fn require_seed(&self, command: &str) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| {
            CliError::Config(format!(
                "`{command}` is stochastic: provide a seed via --seed or the config file"
            ))
        })
    }
}

fn announce(path: &Path) {
    println!("wrote {}", path.display());
}

/// Belief table over a threshold grid: analytic profile, Monte Carlo
/// estimates, and their absolute gaps, one row per (r, t).
pub fn cmd_beliefs(cfg: &BeliefsConfig, ctx: &RunContext) -> Result<PathBuf, CliError> {
    let seed = ctx.require_seed("beliefs")?;
    if cfg.oracle_samples == 0 {
        return Err(CliError::Config("oracle_samples must be positive".into()));
    }
    let thresholds = cfg.thresholds.values()?;
    let mut table = Table::new(vec![
        "r",
        "t",
        "mass",
        "e_va_act",
        "e_va_abstain",
        "e_vv_act",
        "e_vv_abstain",
        "act_degenerate",
        "abstain_degenerate",
        "mc_mass",
        "mc_e_va_act",
        "mc_e_va_abstain",
        "mc_e_vv_act",
        "mc_e_vv_abstain",
        "gap_mass",
        "gap_e_va_act",
        "gap_e_va_abstain",
        "gap_e_vv_act",
        "gap_e_vv_abstain",
    ]);
    let mut stream = 0u64;
    for incentive in [false, true] {
        for &t in &thresholds {
            let rule = ParticipationRule::new(incentive, t);
            let analytic = belief_profile(&rule);
            let mc = mc_oracle(&rule, cfg.oracle_samples, derive_seed(seed, stream));
            stream += 1;
            table.push(vec![
                Cell::UInt(u64::from(incentive)),
                Cell::Float(t),
                Cell::Float(analytic.mass_act),
                Cell::Float(analytic.intrinsic_given_act),
                Cell::Float(analytic.intrinsic_given_abstain),
                Cell::Float(analytic.extrinsic_given_act),
                Cell::Float(analytic.extrinsic_given_abstain),
                Cell::Bool(analytic.act_degenerate),
                Cell::Bool(analytic.abstain_degenerate),
                Cell::Float(mc.mass_act),
                Cell::Float(mc.intrinsic_given_act),
                Cell::Float(mc.intrinsic_given_abstain),
                Cell::Float(mc.extrinsic_given_act),
                Cell::Float(mc.extrinsic_given_abstain),
                Cell::Float((analytic.mass_act - mc.mass_act).abs()),
                Cell::Float((analytic.intrinsic_given_act - mc.intrinsic_given_act).abs()),
                Cell::Float((analytic.intrinsic_given_abstain - mc.intrinsic_given_abstain).abs()),
                Cell::Float((analytic.extrinsic_given_act - mc.extrinsic_given_act).abs()),
                Cell::Float((analytic.extrinsic_given_abstain - mc.extrinsic_given_abstain).abs()),
            ]);
        }
    }
    let path = table.write(&ctx.out_dir, "beliefs", ctx.format)?;
    announce(&path);
    Ok(path)
}

/// One solved panel of the norm-by-cost figure.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelSummary {
    pub row: usize,
    pub col: usize,
    pub norm_extrinsic: f64,
    pub cost: f64,
    pub t_star: f64,
    pub participation_rate: f64,
    pub acting_fraction: f64,
    pub boundary_intercept: Option<f64>,
    pub converged: bool,
}

/// Per-panel agent decision files plus a threshold summary. A panel that
/// fails to converge is still written and flagged, and the command exits
/// with the solver-failure status.
pub fn cmd_figure1(cfg: &Figure1Config, ctx: &RunContext) -> Result<Vec<PanelSummary>, CliError> {
    let seed = ctx.require_seed("figure1")?;
    if cfg.lattice == 0 {
        return Err(CliError::Config("lattice side must be positive".into()));
    }
    if cfg.s_vv_rows.is_empty() || cfg.c_cols.is_empty() {
        return Err(CliError::Config(
            "figure1 needs at least one row and column".into(),
        ));
    }
    let mut summaries = Vec::new();
    let mut summary_table = Table::new(vec![
        "row",
        "col",
        "s_vv",
        "c",
        "t_star",
        "participation_rate",
        "acting_fraction",
        "boundary_intercept",
        "converged",
    ]);
    for (i, &norm) in cfg.s_vv_rows.iter().enumerate() {
        for (j, &cost) in cfg.c_cols.iter().enumerate() {
            let params = ModelParams::new(
                cost,
                true,
                cfg.vis,
                cfg.pref_va,
                cfg.pref_vv,
                cfg.s_va,
                norm,
            )?;
            let panel_index = (i * cfg.c_cols.len() + j) as u64;
            let population = lattice_population(cfg.lattice, derive_seed(seed, panel_index))?;
            let sim = simulate_grid(&params, &population, cfg.mode.into());
            let mut panel = Table::new(vec!["v_a", "v_v", "b"]);
            for (agent, decision) in &sim.decisions {
                panel.push(vec![
                    Cell::Float(agent.intrinsic),
                    Cell::Float(agent.extrinsic),
                    Cell::Bool(decision.acts),
                ]);
            }
            let path = panel.write(
                &ctx.out_dir,
                &format!("figure1_panel_r{i}_c{j}"),
                ctx.format,
            )?;
            announce(&path);
            let summary = PanelSummary {
                row: i,
                col: j,
                norm_extrinsic: norm,
                cost,
                t_star: sim.equilibrium.t_star,
                participation_rate: sim.equilibrium.participation_rate,
                acting_fraction: sim.acting_fraction(),
                boundary_intercept: sim.fitted_boundary_intercept(),
                converged: sim.equilibrium.converged,
            };
            summary_table.push(vec![
                Cell::UInt(summary.row as u64),
                Cell::UInt(summary.col as u64),
                Cell::Float(summary.norm_extrinsic),
                Cell::Float(summary.cost),
                Cell::Float(summary.t_star),
                Cell::Float(summary.participation_rate),
                Cell::Float(summary.acting_fraction),
                Cell::Float(summary.boundary_intercept.unwrap_or(f64::NAN)),
                Cell::Bool(summary.converged),
            ]);
            summaries.push(summary);
        }
    }
    let path = summary_table.write(&ctx.out_dir, "figure1_summary", ctx.format)?;
    announce(&path);
    if summaries.iter().any(|s| !s.converged) {
        return Err(CliError::Solver(
            "one or more panels did not converge; see figure1_summary".into(),
        ));
    }
    Ok(summaries)
}

/// Parameter sweep: analytic vs empirical participation per cell.
pub fn cmd_sweep(cfg: &SweepConfig, ctx: &RunContext) -> Result<Vec<SweepCell>, CliError> {
    let seed = ctx.require_seed("sweep")?;
    let incentive_axis: Vec<bool> = cfg
        .r
        .iter()
        .map(|&r| incentive_flag(r))
        .collect::<Result<_, _>>()?;
    let spec = SweepSpec {
        cost: cfg.c.clone(),
        norm_extrinsic: cfg.s_vv.clone(),
        norm_intrinsic: cfg.s_va.clone(),
        incentive: incentive_axis,
        visibility: cfg.vis.clone(),
        pref_intrinsic: cfg.pref_va.clone(),
        pref_extrinsic: cfg.pref_vv.clone(),
        population_per_cell: cfg.population,
        seed,
        mode: cfg.mode.into(),
        max_cells: cfg.max_cells,
    };
    let cells = sweep(&spec)?;
    let mut table = Table::new(vec![
        "cell",
        "c",
        "s_vv",
        "s_va",
        "r",
        "vis",
        "pref_va",
        "pref_vv",
        "t_star",
        "rate_analytic",
        "rate_empirical",
        "converged",
    ]);
    for cell in &cells {
        table.push(vec![
            Cell::UInt(cell.index as u64),
            Cell::Float(cell.params.cost),
            Cell::Float(cell.params.norm_extrinsic),
            Cell::Float(cell.params.norm_intrinsic),
            Cell::UInt(u64::from(cell.params.incentive)),
            Cell::Float(cell.params.visibility),
            Cell::Float(cell.params.pref_intrinsic),
            Cell::Float(cell.params.pref_extrinsic),
            Cell::Float(cell.t_star),
            Cell::Float(cell.rate_analytic),
            Cell::Float(cell.rate_empirical),
            Cell::Bool(cell.converged),
        ]);
    }
    let path = table.write(&ctx.out_dir, "sweep", ctx.format)?;
    announce(&path);
    Ok(cells)
}

/// Incentive-induced reputation cost curves over a cost grid.
pub fn cmd_costs(cfg: &CostsConfig, ctx: &RunContext) -> Result<PathBuf, CliError> {
    let grid = cfg.grid.values()?;
    if grid.iter().any(|c| !(0.0..=1.0).contains(c)) {
        return Err(CliError::Config("cost grid must stay within [0, 1]".into()));
    }
    let points = reputational_cost_curve(&grid);
    let mut table = Table::new(vec!["c", "intrinsic_cost", "extrinsic_cost"]);
    for p in &points {
        table.push(vec![
            Cell::Float(p.cost),
            Cell::Float(p.intrinsic_cost),
            Cell::Float(p.extrinsic_cost),
        ]);
    }
    let path = table.write(&ctx.out_dir, "costs", ctx.format)?;
    announce(&path);
    Ok(path)
}

/// Inverse problem: find the extrinsic norm matching a target rate.
pub fn cmd_calibrate(cfg: &CalibrateConfig, ctx: &RunContext) -> Result<Calibration, CliError> {
    let params = ModelParams::new(
        cfg.c,
        incentive_flag(cfg.r)?,
        cfg.vis,
        cfg.pref_va,
        cfg.pref_vv,
        cfg.s_va,
        0.0,
    )?;
    let calibration = calibrate_norm(cfg.target_rate, &params, cfg.mode.into())?;
    let mut table = Table::new(vec!["target_rate", "s_vv", "achieved_rate", "iterations"]);
    table.push(vec![
        Cell::Float(calibration.target_rate),
        Cell::Float(calibration.norm_extrinsic),
        Cell::Float(calibration.achieved_rate),
        Cell::UInt(u64::from(calibration.iterations)),
    ]);
    let path = table.write(&ctx.out_dir, "calibrate", ctx.format)?;
    announce(&path);
    Ok(calibration)
}

/// Everything the qualitative-replication checks need from one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSummary {
    pub fit: RegressionFit,
    pub interaction_estimate: f64,
    pub interaction_std_error: f64,
    pub n_countries: usize,
    pub n_rows: usize,
}

impl ExperimentSummary {
    pub fn interaction_z(&self) -> f64 {
        self.interaction_estimate / self.interaction_std_error
    }
}

const MICRODATA_LATENT_COLUMNS: [&str; 13] = [
    "country_id",
    "donated",
    "v_a",
    "v_v",
    "intrinsic_flag",
    "extrinsic_flag",
    "age",
    "gender",
    "cohabiting",
    "education",
    "employed",
    "community",
    "children",
];

fn microdata_table(rows: &[SurveyRow], include_latent: bool) -> Table {
    let columns: Vec<&'static str> = MICRODATA_LATENT_COLUMNS
        .iter()
        .copied()
        .filter(|c| include_latent || (*c != "v_a" && *c != "v_v"))
        .collect();
    let mut table = Table::new(columns);
    for r in rows {
        let mut cells = vec![Cell::UInt(u64::from(r.country_id)), Cell::Bool(r.donated)];
        if include_latent {
            cells.push(Cell::Float(r.intrinsic));
            cells.push(Cell::Float(r.extrinsic));
        }
        cells.extend([
            Cell::Bool(r.intrinsic_flag),
            Cell::Bool(r.extrinsic_flag),
            Cell::UInt(u64::from(r.age)),
            Cell::UInt(u64::from(r.gender)),
            Cell::UInt(u64::from(r.cohabiting)),
            Cell::UInt(u64::from(r.education)),
            Cell::UInt(u64::from(r.employed)),
            Cell::UInt(u64::from(r.community)),
            Cell::UInt(u64::from(r.children)),
        ]);
        table.push(cells);
    }
    table
}

/// Reads a microdata CSV produced by [`cmd_experiment`]. Latent columns are
/// optional; absent ones read back as zero.
pub fn load_microdata(path: &Path) -> Result<Vec<SurveyRow>, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let need = |name: &'static str| {
        col(name).ok_or_else(|| CliError::Io(format!("missing column `{name}` in microdata")))
    };
    let idx_country = need("country_id")?;
    let idx_donated = need("donated")?;
    let idx_va = col("v_a");
    let idx_vv = col("v_v");
    let idx = [
        need("intrinsic_flag")?,
        need("extrinsic_flag")?,
        need("age")?,
        need("gender")?,
        need("cohabiting")?,
        need("education")?,
        need("employed")?,
        need("community")?,
        need("children")?,
    ];
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or_default();
        let flag = |i: usize| field(i) == "1";
        let int = |i: usize| -> Result<u32, CliError> {
            field(i)
                .parse::<u32>()
                .map_err(|e| CliError::Io(format!("bad integer in microdata: {e}")))
        };
        rows.push(SurveyRow {
            country_id: int(idx_country)?,
            donated: flag(idx_donated),
            intrinsic: idx_va.map_or(Ok(0.0), |i| parse_float(field(i), "v_a"))?,
            extrinsic: idx_vv.map_or(Ok(0.0), |i| parse_float(field(i), "v_v"))?,
            intrinsic_flag: flag(idx[0]),
            extrinsic_flag: flag(idx[1]),
            age: int(idx[2])?,
            gender: int(idx[3])? as u8,
            cohabiting: int(idx[4])? as u8,
            education: int(idx[5])? as u8,
            employed: int(idx[6])? as u8,
            community: int(idx[7])? as u8,
            children: int(idx[8])? as u8,
        });
    }
    Ok(rows)
}

/// Regression design for the norm-by-incentive experiment: intercept, the
/// country-level norm and incentive coding with their interaction, and the
/// inert individual covariates. Country indicator columns are deliberately
/// absent: with country-level regressors they would be collinear and the
/// norm and incentive terms would lose identification.
pub fn experiment_design(
    rows: &[SurveyRow],
    countries: &[CountrySpec],
    kind: normsim_core::synthsurvey::IncentiveKind,
) -> (Vec<String>, Vec<Vec<f64>>, Vec<bool>) {
    let names: Vec<String> = [
        INTERCEPT,
        "norm",
        "incentive",
        "norm:incentive",
        "age",
        "gender",
        "cohabiting",
        "education",
        "employed",
        "community",
        "children",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let by_id: std::collections::HashMap<u32, &CountrySpec> =
        countries.iter().map(|c| (c.country_id, c)).collect();
    let mut design = Vec::with_capacity(rows.len());
    let mut outcomes = Vec::with_capacity(rows.len());
    for r in rows {
        let country = by_id[&r.country_id];
        let norm = country.norm(kind);
        let incentive = country.incentive(kind).coding();
        design.push(vec![
            1.0,
            norm,
            incentive,
            norm * incentive,
            f64::from(r.age),
            f64::from(r.gender),
            f64::from(r.cohabiting),
            f64::from(r.education),
            f64::from(r.employed),
            f64::from(r.community),
            f64::from(r.children),
        ]);
        outcomes.push(r.donated);
    }
    (names, design, outcomes)
}

/// Representative-respondent profile for the margin export (covariates are
/// inert by construction, so mid-range values are used).
fn margin_profile() -> Vec<(String, f64)> {
    vec![
        ("incentive".to_string(), 0.0),
        ("age".to_string(), 49.0),
        ("gender".to_string(), 1.0),
        ("cohabiting".to_string(), 1.0),
        ("education".to_string(), 2.0),
        ("employed".to_string(), 1.0),
        ("community".to_string(), 1.0),
        ("children".to_string(), 2.0),
    ]
}

/// Country generation, microdata synthesis, the pooled logistic fit, and
/// predictive margins, exported with a reproducibility manifest.
pub fn cmd_experiment(
    cfg: &ExperimentConfig,
    ctx: &RunContext,
) -> Result<ExperimentSummary, CliError> {
    let seed = ctx.require_seed("experiment")?;
    let countries = generate_countries(
        cfg.n_countries,
        &(&cfg.countries).into(),
        derive_seed(seed, 0),
    )?;
    let link = cfg.link_settings();
    let rows = generate_microdata(
        &countries,
        cfg.rows_per_country,
        &link,
        derive_seed(seed, 1),
    )?;

    // Countries artifact.
    let mut countries_table = Table::new(vec![
        "country_id",
        "s_vv_fin",
        "s_vv_time",
        "incentive_fin",
        "incentive_time",
        "cost_mean",
    ]);
    for c in &countries {
        countries_table.push(vec![
            Cell::UInt(u64::from(c.country_id)),
            Cell::Float(c.norm_financial),
            Cell::Float(c.norm_time),
            Cell::Float(c.incentive_financial.coding()),
            Cell::Float(c.incentive_time.coding()),
            Cell::Float(c.cost_mean),
        ]);
    }
    let countries_path = countries_table.write(&ctx.out_dir, "countries", ctx.format)?;
    announce(&countries_path);

    // Microdata artifact.
    let micro_path =
        microdata_table(&rows, cfg.export_latent).write(&ctx.out_dir, "microdata", ctx.format)?;
    announce(&micro_path);

    // Pooled logistic fit with the norm-by-incentive interaction.
    let (names, design, outcomes) = experiment_design(&rows, &countries, link.kind);
    let fit =
        logistic_fit(&names, &design, &outcomes, &FitOptions::default()).map_err(|e| match e {
            normsim_core::stats::StatsError::Separation { .. }
            | normsim_core::stats::StatsError::DegenerateOutcome => CliError::Degenerate(format!(
                "{e}; the synthetic sample is too extreme for a stable fit - raise rows_per_country"
            )),
            other => CliError::from(other),
        })?;
    let mut coef_table = Table::new(vec!["term", "estimate", "std_error", "z", "p_value"]);
    for i in 0..fit.names.len() {
        let z = fit.estimates[i] / fit.std_errors[i];
        coef_table.push(vec![
            Cell::Text(fit.names[i].clone()),
            Cell::Float(fit.estimates[i]),
            Cell::Float(fit.std_errors[i]),
            Cell::Float(z),
            Cell::Float(normal_two_sided_p(z)),
        ]);
    }
    let coef_path = coef_table.write(&ctx.out_dir, "coefficients", ctx.format)?;
    announce(&coef_path);

    // Predictive margins along the norm axis, one curve per incentive level.
    let norm_axis: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
    let mut margin_table = Table::new(vec!["incentive", "norm", "margin"]);
    for level in [
        IncentiveLevel::None,
        IncentiveLevel::Partial,
        IncentiveLevel::Full,
    ] {
        let mut profile = margin_profile();
        profile[0].1 = level.coding();
        let margins = predictive_margin(&fit, &profile, "norm", &norm_axis)?;
        for (norm, margin) in norm_axis.iter().zip(margins) {
            margin_table.push(vec![
                Cell::Float(level.coding()),
                Cell::Float(*norm),
                Cell::Float(margin),
            ]);
        }
    }
    let margins_path = margin_table.write(&ctx.out_dir, "margins", ctx.format)?;
    announce(&margins_path);

    // Reproducibility manifest: seed, config fingerprint, versions. No
    // timestamps, so reruns stay byte-identical.
    let interaction = fit.coefficient("norm:incentive").ok_or_else(|| {
        CliError::Degenerate("interaction column was dropped as collinear".into())
    })?;
    let interaction_se = fit.std_error("norm:incentive").expect("term present");
    let manifest = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "experiment",
        "seed": seed,
        "config_hash": fnv1a_hex(&ctx.raw_config),
        "versions": {
            "normsim_core": env!("CARGO_PKG_VERSION"),
            "normsim_cli": env!("CARGO_PKG_VERSION"),
        },
        "n_countries": countries.len(),
        "rows_per_country": cfg.rows_per_country,
        "rows_written": rows.len(),
        "converged": fit.converged,
        "dropped_columns": fit.dropped,
        "log_likelihood": fit.log_likelihood,
    });
    let manifest_path = ctx.out_dir.join("manifest.json");
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    write_atomic(&manifest_path, &bytes)?;
    announce(&manifest_path);

    Ok(ExperimentSummary {
        interaction_estimate: interaction,
        interaction_std_error: interaction_se,
        n_countries: countries.len(),
        n_rows: rows.len(),
        fit,
    })
}
