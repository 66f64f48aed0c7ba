//! Bayesian quantile regression for general-insurance loss reserving.
//!
//! The crate fits parametric (asymmetric Laplace, power-Pareto, GB2/GG/
//! gamma) and nonparametric (AL-proxy) quantile regression models to claims
//! run-off triangles by block Metropolis-within-Gibbs sampling, compares
//! fits by DIC and MSE, and turns posterior draws into predictive cell
//! quantiles, outstanding-reserve quantiles and risk margins.
//!
//! Module map:
//! - [`triangle`]: run-off triangle data model, index sets, design rows
//! - [`dists`]: distribution kernels and special functions
//! - [`model`]: model assembly, priors, constrained log-posterior
//! - [`mcmc`]: the sampler, chain storage and posterior summaries
//! - [`select`]: DIC / MSE / residual model-comparison machinery
//! - [`risk`]: predictive reserve quantiles and risk margins
//! - [`simulate`]: synthetic triangle generation for calibration studies

// Validation throughout uses the negated form `!(x > 0.0)` deliberately:
// unlike `x <= 0.0` it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dists;
pub mod error;
pub mod mcmc;
pub mod model;
pub mod risk;
pub mod select;
pub mod simulate;
pub mod triangle;

pub use error::{Error, Result};
