//! Predictive reserve quantiles and risk margins.
//!
//! Cell quantiles come from the conditional predictive posterior quantile
//! function: the family quantile evaluated at a posterior point estimate,
//! mapped back to the currency scale through exp for the log-scale
//! families (there is no unique way to back-transform a log-scale quantile
//! function; exp of the log-scale quantile is used throughout and reports
//! say so). The total outstanding-reserve quantile is computed two ways:
//!
//! - comonotonic bound: sum of the lower-triangle cell quantiles at the
//!   same level (the most conservative convex-order-compatible estimate);
//! - Monte Carlo: simulate lower-triangle cells independently (at a point
//!   estimate or over posterior draws), sum, and take the empirical
//!   quantile, with a batching standard error.
//!
//! For heavy-tailed run-off a first-order tail approximation is available:
//! the dominant cell's quantile at level `1 - (1-u)/T`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::dists::al_moments;
use crate::error::{Error, Result};
use crate::mcmc::Chain;
use crate::model::{CellDist, Model, ParamVector, ShapeStructure};
use crate::select::percentile_type7;

/// Quantile of one cell's predictive distribution on the currency scale.
pub fn cell_quantile(model: &Model, theta: &ParamVector, i: usize, j: usize, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("cell_quantile: u {u} not in (0,1)")));
    }
    model.cell_dist(theta, i, j)?.quantile(u)
}

/// Comonotonic total-reserve quantile: the sum of lower-triangle cell
/// quantiles at the same level.
pub fn total_reserve_quantile_comonotonic(
    model: &Model,
    theta: &ParamVector,
    u: f64,
) -> Result<f64> {
    let mut total = 0.0;
    for &(i, j) in model.lower_cells() {
        total += cell_quantile(model, theta, i, j, u)?;
    }
    Ok(total)
}

/// Where Monte Carlo reserve simulation takes its parameters from.
#[derive(Debug, Clone, Copy)]
pub enum McMode<'a> {
    /// Fixed point estimate (conditional predictive distribution).
    AtPointEstimate(&'a ParamVector),
    /// Parameter uncertainty integrated out over retained posterior draws.
    FullPosterior(&'a Chain),
}

/// Monte Carlo total-reserve quantile with a batching standard error.
#[derive(Debug, Clone, Copy)]
pub struct McQuantile {
    pub value: f64,
    pub mc_se: f64,
    pub n_sims: usize,
}

const MC_BATCHES: usize = 20;

/// Empirical u-quantile of simulated independent-cell reserve totals.
pub fn total_reserve_quantile_mc(
    model: &Model,
    mode: McMode<'_>,
    u: f64,
    n_sims: usize,
    seed: u64,
) -> Result<McQuantile> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("reserve quantile level {u} not in (0,1)")));
    }
    if n_sims < 1_000 {
        return Err(Error::Config(format!(
            "need at least 1000 simulations, got {n_sims}"
        )));
    }
    let lower = model.lower_cells();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut sums = Vec::with_capacity(n_sims);
    match mode {
        McMode::AtPointEstimate(theta) => {
            // Cell distributions are fixed; build them once.
            let dists: Vec<CellDist> = lower
                .iter()
                .map(|&(i, j)| model.cell_dist(theta, i, j))
                .collect::<Result<_>>()?;
            for _ in 0..n_sims {
                let mut s = 0.0;
                for d in &dists {
                    s += d.sample(&mut rng)?;
                }
                sums.push(s);
            }
        }
        McMode::FullPosterior(chain) => {
            if chain.n_retained() == 0 {
                return Err(Error::InvalidData("chain has no retained draws".into()));
            }
            for _ in 0..n_sims {
                let pick = rng.random_range(0..chain.n_retained());
                let theta = ParamVector {
                    values: chain.draws[pick].clone(),
                };
                let mut s = 0.0;
                for &(i, j) in lower {
                    s += model.cell_dist(&theta, i, j)?.sample(&mut rng)?;
                }
                sums.push(s);
            }
        }
    }
    let mut sorted = sums.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let value = percentile_type7(&sorted, u);
    // Batch-quantile standard error.
    let batch_len = n_sims / MC_BATCHES;
    let mut batch_q = Vec::with_capacity(MC_BATCHES);
    for b in 0..MC_BATCHES {
        let mut batch: Vec<f64> = sums[b * batch_len..(b + 1) * batch_len].to_vec();
        batch.sort_by(|a, b| a.partial_cmp(b).unwrap());
        batch_q.push(percentile_type7(&batch, u));
    }
    let mean_q = batch_q.iter().sum::<f64>() / MC_BATCHES as f64;
    let var_q = batch_q.iter().map(|q| (q - mean_q).powi(2)).sum::<f64>()
        / (MC_BATCHES as f64 - 1.0);
    let mc_se = (var_q / MC_BATCHES as f64).sqrt();
    Ok(McQuantile {
        value,
        mc_se,
        n_sims,
    })
}

/// First-order heavy-tail approximation for the quantile of a sum of T
/// cells dominated by one heavy-tailed cell: the dominant cell's quantile
/// at level `1 - (1-u)/T`.
pub fn heavy_tail_quantile_approx(
    dominant_quantile: impl Fn(f64) -> Result<f64>,
    t_count: usize,
    u: f64,
) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("tail level {u} not in (0,1)")));
    }
    if t_count == 0 {
        return Err(Error::InvalidDimension("need at least one cell".into()));
    }
    dominant_quantile(1.0 - (1.0 - u) / t_count as f64)
}

/// Heavy-tail approximation of the total-reserve quantile, taking the
/// lower-triangle cell with the largest fitted scale as dominant.
pub fn heavy_tail_reserve_quantile(model: &Model, theta: &ParamVector, u: f64) -> Result<f64> {
    let lower = model.lower_cells();
    if lower.is_empty() {
        return Err(Error::InvalidDimension("lower triangle is empty".into()));
    }
    let mut dominant: Option<(f64, CellDist)> = None;
    for &(i, j) in lower {
        let dist = model.cell_dist(theta, i, j)?;
        let scale = match &dist {
            CellDist::Al(th) => th.sigma,
            CellDist::Pp { sigma, .. } => *sigma,
            CellDist::Gb2(th) => th.ln_b,
            CellDist::Gg(th) => th.ln_b,
        };
        if dominant.as_ref().map(|(s, _)| scale > *s).unwrap_or(true) {
            dominant = Some((scale, dist));
        }
    }
    let (_, dist) = dominant.expect("lower triangle non-empty");
    heavy_tail_quantile_approx(|lvl| dist.quantile(lvl), lower.len(), u)
}

/// Risk margin `OR(u) - central`; negative margins are reported as zero
/// with a flag, since a central estimate already above the target quantile
/// needs no further adjustment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margin {
    pub value: f64,
    pub floored: bool,
}

pub fn risk_margin(central: f64, or_u: f64) -> Margin {
    let raw = or_u - central;
    if raw < 0.0 {
        Margin {
            value: 0.0,
            floored: true,
        }
    } else {
        Margin {
            value: raw,
            floored: false,
        }
    }
}

// ---------------------------------------------------------------------------
// Accident-year margin profile (dynamic-shape AL fits)
// ---------------------------------------------------------------------------

/// Posterior profile of the accident-year skew (risk-margin level) with the
/// AL variance/skewness it implies.
#[derive(Debug, Clone)]
pub struct YearMargin {
    pub year: usize,
    pub p_hat: f64,
    pub lo95: f64,
    pub hi95: f64,
    pub var_hat: f64,
    pub skew_hat: f64,
}

/// Per-accident-year posterior mean and equal-tailed 95% interval of
/// `p_i = phi_0 + phi_{1i}`, plus the AL variance and skewness at the
/// posterior means. The variance uses each year's scale at the first
/// development year (the dummy reference level).
pub fn margin_profile(chain: &Chain, model: &Model) -> Result<Vec<YearMargin>> {
    if model.spec().shape != ShapeStructure::AccidentYear {
        return Err(Error::Unsupported(
            "margin profile requires an accident-year shape model".into(),
        ));
    }
    if chain.n_retained() == 0 {
        return Err(Error::InvalidData("chain has no retained draws".into()));
    }
    let phi0 = chain
        .param_index("phi_0")
        .ok_or_else(|| Error::InvalidData("chain lacks phi_0".into()))?;
    let theta_bar = ParamVector {
        values: (0..chain.param_names.len())
            .map(|k| chain.column(k).iter().sum::<f64>() / chain.n_retained() as f64)
            .collect(),
    };
    let mut out = Vec::with_capacity(model.i_count());
    for year in 1..=model.i_count() {
        let dummy = if year >= 2 {
            chain.param_index(&format!("phi_acc_{year}"))
        } else {
            None
        };
        let p_draws: Vec<f64> = (0..chain.n_retained())
            .map(|r| chain.draws[r][phi0] + dummy.map(|k| chain.draws[r][k]).unwrap_or(0.0))
            .collect();
        let p_hat = p_draws.iter().sum::<f64>() / p_draws.len() as f64;
        let mut sorted = p_draws;
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let lo95 = percentile_type7(&sorted, 0.025);
        let hi95 = percentile_type7(&sorted, 0.975);
        // AL moments at the posterior means: scale at (year, j = 1).
        let sigma = model.scale_predictor(&theta_bar, year, 1)?.sqrt();
        let p_clamped = p_hat.clamp(1e-6, 1.0 - 1e-6);
        let m = al_moments(&crate::dists::AlParams::new(0.0, sigma, p_clamped)?);
        out.push(YearMargin {
            year,
            p_hat,
            lo95,
            hi95,
            var_hat: m.variance,
            skew_hat: m.skewness,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Reserve report
// ---------------------------------------------------------------------------

/// How the central estimate is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CentralKind {
    /// Comonotonic outstanding reserve at u = 1/2 (median-based, default).
    Median,
    /// Sum of lower-triangle model means.
    Mean,
}

/// One row of the per-level reserve table.
#[derive(Debug, Clone, Copy)]
pub struct LevelRow {
    pub u: f64,
    pub or_comonotonic: f64,
    pub or_mc: Option<f64>,
    pub mc_se: Option<f64>,
    pub margin: f64,
    pub margin_floored: bool,
}

/// Per-level and (optionally) per-year reserve summary.
#[derive(Debug, Clone)]
pub struct ReserveReport {
    pub central: f64,
    pub central_kind: CentralKind,
    pub rows: Vec<LevelRow>,
    pub per_year: Option<Vec<YearMargin>>,
}

/// Monte Carlo settings for the reserve report.
#[derive(Debug, Clone, Copy)]
pub struct McSettings {
    pub n_sims: usize,
    pub seed: u64,
    pub full_posterior: bool,
}

/// Build the reserve report at the posterior point estimate `theta`.
pub fn reserve_report(
    model: &Model,
    theta: &ParamVector,
    chain: Option<&Chain>,
    levels: &[f64],
    central_kind: CentralKind,
    mc: Option<McSettings>,
) -> Result<ReserveReport> {
    if levels.is_empty() {
        return Err(Error::Config("no reserve quantile levels requested".into()));
    }
    for &u in levels {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("reserve level {u} not in (0,1)")));
        }
    }
    let central = match central_kind {
        CentralKind::Median => total_reserve_quantile_comonotonic(model, theta, 0.5)?,
        CentralKind::Mean => {
            let mut total = 0.0;
            for &(i, j) in model.lower_cells() {
                total += model.cell_dist(theta, i, j)?.mean_original_scale()?;
            }
            total
        }
    };
    let mut rows = Vec::with_capacity(levels.len());
    for &u in levels {
        let or_como = total_reserve_quantile_comonotonic(model, theta, u)?;
        let (or_mc, mc_se) = match mc {
            Some(s) => {
                let mode = if s.full_posterior {
                    McMode::FullPosterior(chain.ok_or_else(|| {
                        Error::Config("full-posterior Monte Carlo needs a chain".into())
                    })?)
                } else {
                    McMode::AtPointEstimate(theta)
                };
                let q = total_reserve_quantile_mc(model, mode, u, s.n_sims, s.seed)?;
                (Some(q.value), Some(q.mc_se))
            }
            None => (None, None),
        };
        let margin = risk_margin(central, or_como);
        rows.push(LevelRow {
            u,
            or_comonotonic: or_como,
            or_mc,
            mc_se,
            margin: margin.value,
            margin_floored: margin.floored,
        });
    }
    let per_year = match (model.spec().shape, chain) {
        (ShapeStructure::AccidentYear, Some(c)) => Some(margin_profile(c, model)?),
        _ => None,
    };
    Ok(ReserveReport {
        central,
        central_kind,
        rows,
        per_year,
    })
}

impl ReserveReport {
    /// Per-level CSV: `u,OR_comonotonic,OR_mc,mc_se,margin`.
    pub fn levels_csv(&self) -> String {
        let mut out = String::from("u,OR_comonotonic,OR_mc,mc_se,margin\n");
        for r in &self.rows {
            let _ = write!(out, "{},{}", r.u, r.or_comonotonic);
            match (r.or_mc, r.mc_se) {
                (Some(q), Some(se)) => {
                    let _ = write!(out, ",{q},{se}");
                }
                _ => out.push_str(",,"),
            }
            let _ = writeln!(out, ",{}", r.margin);
        }
        out
    }

    /// Per-year CSV: `i,p_hat,lo95,hi95,var_hat,skew_hat`.
    pub fn per_year_csv(&self) -> Option<String> {
        self.per_year.as_ref().map(|years| {
            let mut out = String::from("i,p_hat,lo95,hi95,var_hat,skew_hat\n");
            for y in years {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    y.year, y.p_hat, y.lo95, y.hi95, y.var_hat, y.skew_hat
                );
            }
            out
        })
    }
}
