//! Logistic regression by iteratively reweighted least squares, with
//! collinear-column dropping, separation detection, and predictive margins.
//!
//! The fit maximizes the Bernoulli log-likelihood with Newton steps solved
//! through the normal equations `(X^T W X) delta = X^T (y - mu)`; a
//! step-halving guard keeps the log-likelihood non-decreasing. Standard
//! errors come from the inverse Fisher information at the estimate.
//!
//! Interaction columns are named with `:` between the component covariates
//! (for example `norm:incentive`); [`predictive_margin`] recomputes such
//! columns as products while one covariate sweeps, so margins stay on the
//! model surface. The name `intercept` resolves to the constant 1.

// Indexed loops are kept in the dense-matrix code.
#![allow(clippy::needless_range_loop)]

use super::StatsError;

/// Column name recognized as the constant term.
pub const INTERCEPT: &str = "intercept";

/// Separator for interaction column names.
const INTERACTION_SEP: char = ':';

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: u32,
    /// Convergence threshold on the largest coefficient change.
    pub tolerance: f64,
    /// Relative residual norm below which a column counts as collinear.
    pub collinearity_tolerance: f64,
    /// Coefficient magnitude treated as divergence (perfect separation).
    pub separation_bound: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            tolerance: 1e-8,
            collinearity_tolerance: 1e-8,
            separation_bound: 30.0,
        }
    }
}

/// Fitted coefficients and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub names: Vec<String>,
    pub estimates: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub log_likelihood: f64,
    /// Log-likelihood after each IRLS iteration (non-decreasing).
    pub ll_trace: Vec<f64>,
    pub converged: bool,
    pub iterations: u32,
    pub n_used: usize,
    /// Names of columns dropped as collinear before fitting.
    pub dropped: Vec<String>,
}

impl RegressionFit {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.estimates[i])
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.std_errors[i])
    }
}

fn sigmoid(eta: f64) -> f64 {
    1.0 / (1.0 + (-eta).exp())
}

/// `ln(1 + e^eta)` without overflow.
fn ln_1p_exp(eta: f64) -> f64 {
    eta.max(0.0) + (-eta.abs()).exp().ln_1p()
}

/// Bernoulli log-likelihood of coefficients `beta` on the given design.
pub fn logistic_log_likelihood(rows: &[Vec<f64>], outcomes: &[bool], beta: &[f64]) -> f64 {
    rows.iter()
        .zip(outcomes)
        .map(|(row, &y)| {
            let eta: f64 = row.iter().zip(beta).map(|(x, b)| x * b).sum();
            let y = f64::from(u8::from(y));
            y * eta - ln_1p_exp(eta)
        })
        .sum()
}

/// Score (gradient of the log-likelihood) at `beta`: `X^T (y - mu)`.
pub fn logistic_score(rows: &[Vec<f64>], outcomes: &[bool], beta: &[f64]) -> Vec<f64> {
    let p = beta.len();
    let mut score = vec![0.0; p];
    for (row, &y) in rows.iter().zip(outcomes) {
        let eta: f64 = row.iter().zip(beta).map(|(x, b)| x * b).sum();
        let resid = f64::from(u8::from(y)) - sigmoid(eta);
        for (s, x) in score.iter_mut().zip(row) {
            *s += resid * x;
        }
    }
    score
}

/// Solves the symmetric positive-definite system `a x = b` by Cholesky
/// factorization; `None` when a pivot collapses.
fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let p = b.len();
    let mut chol = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= chol[i][k] * chol[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                chol[i][j] = sum.sqrt();
            } else {
                chol[i][j] = sum / chol[j][j];
            }
        }
    }
    // Forward then backward substitution.
    let mut x = b.to_vec();
    for i in 0..p {
        for k in 0..i {
            x[i] -= chol[i][k] * x[k];
        }
        x[i] /= chol[i][i];
    }
    for i in (0..p).rev() {
        for k in i + 1..p {
            x[i] -= chol[k][i] * x[k];
        }
        x[i] /= chol[i][i];
    }
    Some(x)
}

/// Diagonal of the inverse of a symmetric positive-definite matrix.
fn inverse_diagonal(a: &[Vec<f64>]) -> Option<Vec<f64>> {
    let p = a.len();
    let mut diag = Vec::with_capacity(p);
    for j in 0..p {
        let mut e = vec![0.0; p];
        e[j] = 1.0;
        diag.push(cholesky_solve(a, &e)?[j]);
    }
    Some(diag)
}

/// Modified Gram-Schmidt pass over the columns; returns the indices kept and
/// the names dropped as (numerically) linear combinations of earlier ones.
fn drop_collinear(
    names: &[String],
    rows: &[Vec<f64>],
    tolerance: f64,
) -> (Vec<usize>, Vec<String>) {
    let n = rows.len();
    let p = names.len();
    let mut kept: Vec<usize> = Vec::with_capacity(p);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut dropped = Vec::new();
    for j in 0..p {
        let mut v: Vec<f64> = (0..n).map(|i| rows[i][j]).collect();
        let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            dropped.push(names[j].clone());
            continue;
        }
        // Second orthogonalization sweep controls rounding in the projections.
        for _ in 0..2 {
            for q in &basis {
                let proj: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < tolerance * norm0 {
            dropped.push(names[j].clone());
        } else {
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            basis.push(v);
            kept.push(j);
        }
    }
    (kept, dropped)
}

/// Maximum-likelihood logistic fit.
///
/// Collinear columns are dropped (and reported) before fitting; the design
/// must then still have more rows than columns. A constant outcome vector
/// has no MLE and is rejected, and coefficients diverging past the
/// separation bound are reported as perfect separation.
pub fn logistic_fit(
    names: &[String],
    rows: &[Vec<f64>],
    outcomes: &[bool],
    options: &FitOptions,
) -> Result<RegressionFit, StatsError> {
    if rows.is_empty() || names.is_empty() {
        return Err(StatsError::EmptyDesign);
    }
    if rows.len() != outcomes.len() {
        return Err(StatsError::LengthMismatch {
            left: rows.len(),
            right: outcomes.len(),
        });
    }
    if rows.iter().any(|r| r.len() != names.len()) {
        return Err(StatsError::RaggedDesign);
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite("design matrix"));
    }
    let positives = outcomes.iter().filter(|&&y| y).count();
    if positives == 0 || positives == outcomes.len() {
        return Err(StatsError::DegenerateOutcome);
    }

    let (kept, dropped) = drop_collinear(names, rows, options.collinearity_tolerance);
    if kept.is_empty() {
        return Err(StatsError::EmptyDesign);
    }
    let n = rows.len();
    let p = kept.len();
    if n <= p {
        return Err(StatsError::TooFewRows {
            rows: n,
            columns: p,
        });
    }
    let design: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| kept.iter().map(|&j| r[j]).collect())
        .collect();

    let mut beta = vec![0.0; p];
    let mut ll = logistic_log_likelihood(&design, outcomes, &beta);
    let mut ll_trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=options.max_iterations {
        iterations = iter;
        // Assemble X^T W X and the score X^T (y - mu).
        let mut info = vec![vec![0.0; p]; p];
        let mut score = vec![0.0; p];
        for (row, &y) in design.iter().zip(outcomes) {
            let eta: f64 = row.iter().zip(&beta).map(|(x, b)| x * b).sum();
            let mu = sigmoid(eta);
            let w = (mu * (1.0 - mu)).max(1e-10);
            let resid = f64::from(u8::from(y)) - mu;
            for a in 0..p {
                score[a] += resid * row[a];
                for b in 0..=a {
                    info[a][b] += w * row[a] * row[b];
                }
            }
        }
        for a in 0..p {
            for b in a + 1..p {
                info[a][b] = info[b][a];
            }
        }
        let delta = cholesky_solve(&info, &score).ok_or(StatsError::SingularInformation)?;

        // Step halving keeps the log-likelihood non-decreasing (up to
        // rounding noise, which scales with |ll|).
        let ll_slack = 1e-12 * (1.0 + ll.abs());
        let mut step = 1.0;
        let mut candidate: Vec<f64>;
        let mut candidate_ll;
        loop {
            candidate = beta.iter().zip(&delta).map(|(b, d)| b + step * d).collect();
            candidate_ll = logistic_log_likelihood(&design, outcomes, &candidate);
            if candidate_ll >= ll - ll_slack || step < 1e-6 {
                break;
            }
            step *= 0.5;
        }

        let max_change = beta
            .iter()
            .zip(&candidate)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        beta = candidate;
        ll = candidate_ll;
        ll_trace.push(ll);

        if beta.iter().any(|b| b.abs() > options.separation_bound) {
            let max_coefficient = beta.iter().fold(0.0_f64, |m, b| m.max(b.abs()));
            return Err(StatsError::Separation { max_coefficient });
        }
        if max_change < options.tolerance {
            converged = true;
            break;
        }
    }

    // Fisher information at the final estimate for the standard errors.
    let mut info = vec![vec![0.0; p]; p];
    for row in &design {
        let eta: f64 = row.iter().zip(&beta).map(|(x, b)| x * b).sum();
        let mu = sigmoid(eta);
        let w = (mu * (1.0 - mu)).max(1e-10);
        for a in 0..p {
            for b in 0..=a {
                info[a][b] += w * row[a] * row[b];
            }
        }
    }
    for a in 0..p {
        for b in a + 1..p {
            info[a][b] = info[b][a];
        }
    }
    let variances = inverse_diagonal(&info).ok_or(StatsError::SingularInformation)?;
    let std_errors = variances.iter().map(|v| v.max(0.0).sqrt()).collect();

    Ok(RegressionFit {
        names: kept.iter().map(|&j| names[j].clone()).collect(),
        estimates: beta,
        std_errors,
        log_likelihood: ll,
        ll_trace,
        converged,
        iterations,
        n_used: n,
        dropped,
    })
}

fn base_names(fit: &RegressionFit) -> Vec<&str> {
    let mut bases: Vec<&str> = fit
        .names
        .iter()
        .flat_map(|n| n.split(INTERACTION_SEP))
        .filter(|n| *n != INTERCEPT)
        .collect();
    bases.sort_unstable();
    bases.dedup();
    bases
}

fn resolve(
    part: &str,
    profile: &[(String, f64)],
    sweep: &str,
    swept_value: f64,
) -> Result<f64, StatsError> {
    if part == INTERCEPT {
        return Ok(1.0);
    }
    if part == sweep {
        return Ok(swept_value);
    }
    profile
        .iter()
        .find(|(name, _)| name == part)
        .map(|(_, v)| *v)
        .ok_or_else(|| StatsError::MissingCovariate(part.to_string()))
}

/// Fitted probabilities along one covariate axis, all other covariates fixed
/// at the profile. Interaction columns (`a:b`) are recomputed as products,
/// so sweeping a covariate moves every column it participates in.
pub fn predictive_margin(
    fit: &RegressionFit,
    profile: &[(String, f64)],
    sweep: &str,
    values: &[f64],
) -> Result<Vec<f64>, StatsError> {
    let bases = base_names(fit);
    for (name, _) in profile {
        if !bases.contains(&name.as_str()) {
            return Err(StatsError::UnknownCovariate(name.clone()));
        }
    }
    if !bases.contains(&sweep) {
        return Err(StatsError::UnknownCovariate(sweep.to_string()));
    }
    values
        .iter()
        .map(|&x| {
            let mut eta = 0.0;
            for (name, b) in fit.names.iter().zip(&fit.estimates) {
                let mut column = 1.0;
                for part in name.split(INTERACTION_SEP) {
                    column *= resolve(part, profile, sweep, x)?;
                }
                eta += b * column;
            }
            Ok(sigmoid(eta).clamp(f64::MIN_POSITIVE, 1.0_f64.next_down()))
        })
        .collect()
}
