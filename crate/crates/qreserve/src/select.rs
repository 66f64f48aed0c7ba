//! Model comparison and fit assessment: DIC, MSE, standardized residuals
//! and fitted-percentile curves.
//!
//! DIC follows the posterior-deviance decomposition: `Dbar` is the mean of
//! the retained deviance trace, `Dhat` the deviance at the posterior-mean
//! parameter vector, and `DIC = 2 Dbar - Dhat = Dbar + pD` with
//! `pD = Dbar - Dhat`. The posterior mean can fall outside the support for
//! constrained models (power-Pareto); in that case `Dhat` is unavailable
//! and the report flags DIC as missing rather than guessing.

use crate::error::{Error, Result};
use crate::mcmc::{summarize, Chain};
use crate::model::{Model, ParamVector};
use crate::triangle::Triangle;

/// Per-parameter clipping applied when a constrained posterior mean has to
/// be nudged back into its open support (AL skew only).
const SKEW_CLIP: f64 = 1e-6;

/// DIC decomposition.
#[derive(Debug, Clone, Copy)]
pub struct DicResult {
    pub dic: f64,
    pub d_bar: f64,
    pub d_hat: f64,
    pub p_d: f64,
    /// True when a constrained coordinate was clipped to evaluate Dhat.
    pub clipped: bool,
}

/// Fit-quality report for one completed chain.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub dic: Option<DicResult>,
    /// Set when Dhat could not be evaluated (posterior mean outside support).
    pub dic_unavailable_reason: Option<String>,
    pub mse: Option<f64>,
    pub mse_unavailable_reason: Option<String>,
    /// Fitted model means on the original scale, in upper-cell order.
    pub fitted: Vec<f64>,
    /// Standardized residuals per upper cell; None marks an
    /// infinite-variance cell.
    pub residuals: Vec<Option<f64>>,
}

/// Posterior-mean parameter vector with constrained AL skew coordinates
/// clipped into (0,1); returns whether clipping happened.
pub fn posterior_mean_params(chain: &Chain, model: &Model) -> Result<(ParamVector, bool)> {
    let summary = summarize(chain)?;
    let mut theta = summary.mean_vector();
    let mut clipped = false;
    for (k, name) in model.param_names().iter().enumerate() {
        // AL skew coordinates live in (0,1): the scalar skew, or phi_0
        // (= p_1) under the accident-year shape structure. Means of valid
        // draws are already interior, so this only bites in degenerate
        // edge cases.
        let is_skew = (name == "p" && !model.spec().family.positive_support())
            || name == "phi_0";
        if is_skew {
            let v = theta.values[k];
            let c = v.clamp(SKEW_CLIP, 1.0 - SKEW_CLIP);
            if c != v {
                theta.values[k] = c;
                clipped = true;
            }
        }
    }
    Ok((theta, clipped))
}

/// DIC from a chain's deviance trace and the deviance at the posterior
/// mean.
pub fn dic(chain: &Chain, model: &Model) -> Result<DicResult> {
    if chain.deviance.is_empty() {
        return Err(Error::InvalidData("chain has no deviance trace".into()));
    }
    let d_bar = chain.deviance.iter().sum::<f64>() / chain.deviance.len() as f64;
    let (theta_bar, clipped) = posterior_mean_params(chain, model)?;
    let d_hat = model.deviance(&theta_bar)?;
    if !d_hat.is_finite() {
        return Err(Error::Parameter(
            "posterior-mean parameters fall outside the support; Dhat undefined".into(),
        ));
    }
    Ok(DicResult {
        dic: 2.0 * d_bar - d_hat,
        d_bar,
        d_hat,
        p_d: d_bar - d_hat,
        clipped,
    })
}

/// Mean squared error on the original (currency) scale between fitted
/// values and observed amounts, both in upper-cell order.
pub fn mse(fitted: &[f64], observed: &Triangle) -> Result<f64> {
    let cells = observed.upper_cells();
    if fitted.len() != cells.len() {
        return Err(Error::InvalidData(format!(
            "fitted values cover {} cells, triangle has {}",
            fitted.len(),
            cells.len()
        )));
    }
    let n = cells.len() as f64;
    Ok(cells
        .iter()
        .zip(fitted)
        .map(|(&(i, j), &f)| {
            let y = observed.amount(i, j).unwrap();
            (y - f) * (y - f)
        })
        .sum::<f64>()
        / n)
}

/// Fitted model means on the original scale at the posterior-mean
/// parameters: `exp` of the log-scale mean for AL/PP, the mean link for the
/// GB2 family. Cells whose mean does not exist come back as an error.
pub fn fitted_means(theta: &ParamVector, model: &Model) -> Result<Vec<f64>> {
    model
        .upper_cells()
        .iter()
        .map(|&(i, j)| model.cell_dist(theta, i, j)?.mean_original_scale())
        .collect()
}

/// Standardized residuals `(y - E[Y]) / sqrt(Var Y)` on the family's
/// modelling scale (log scale for AL/PP, original scale for GB2/GG/Gamma).
/// Cells with infinite variance are flagged as `None`.
pub fn standardized_residuals(theta: &ParamVector, model: &Model) -> Result<Vec<Option<f64>>> {
    let positive = model.spec().family.positive_support();
    let cells = model.upper_cells();
    let mut out = Vec::with_capacity(cells.len());
    for (idx, &(i, j)) in cells.iter().enumerate() {
        let dist = model.cell_dist(theta, i, j)?;
        match dist.mean_var_modelling_scale() {
            Ok((mean, var)) => {
                let y = if positive {
                    model.raw_observed()[idx].max(model.floor())
                } else {
                    model.ystar()[idx]
                };
                out.push(Some((y - mean) / var.sqrt()));
            }
            Err(Error::NonfiniteMoment(_)) => out.push(None),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Full fit report: DIC, original-scale MSE, fitted means and standardized
/// residuals at the posterior mean.
pub fn fit_report(chain: &Chain, model: &Model, observed: &Triangle) -> Result<FitReport> {
    let (theta_bar, _) = posterior_mean_params(chain, model)?;
    let (dic_res, dic_reason) = match dic(chain, model) {
        Ok(d) => (Some(d), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let (fitted, mse_val, mse_reason) = match fitted_means(&theta_bar, model) {
        Ok(f) => {
            let m = mse(&f, observed)?;
            (f, Some(m), None)
        }
        Err(e) => (Vec::new(), None, Some(e.to_string())),
    };
    let residuals = standardized_residuals(&theta_bar, model)?;
    Ok(FitReport {
        dic: dic_res,
        dic_unavailable_reason: dic_reason,
        mse: mse_val,
        mse_unavailable_reason: mse_reason,
        fitted,
        residuals,
    })
}

/// Linear-interpolation (type-7) percentile of a pre-sorted slice.
pub fn percentile_type7(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty set");
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n as f64 - 1.0) * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Empirical percentiles (type-7 interpolation) of a set of fitted values,
/// one output per requested probability.
pub fn fitted_percentiles(values: &[f64], probs: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::InvalidData(
            "cannot take percentiles of an empty set".into(),
        ));
    }
    if probs.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
        return Err(Error::Domain("percentile probabilities must be in (0,1)".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(probs.iter().map(|&p| percentile_type7(&sorted, p)).collect())
}
