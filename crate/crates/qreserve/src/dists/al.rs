//! Asymmetric Laplace distribution and the pinball (check) loss.
//!
//! The AL density
//!
//! ```text
//! f(y | mu, sigma, p) = p(1-p)/sigma * exp( -((y-mu)/sigma) * [p - 1{y <= mu}] )
//! ```
//!
//! is the likelihood counterpart of level-p quantile regression: maximizing
//! it in `mu` at fixed `(sigma, p)` minimizes the pinball loss at level `p`,
//! and the cdf at the location equals `p` exactly.

use crate::error::{Error, Result};
use rand::Rng;

/// Parameters of an asymmetric Laplace distribution: location, scale
/// (standard-deviation-like, > 0) and skew `p` in (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlParams {
    pub mu: f64,
    pub sigma: f64,
    pub p: f64,
}

impl AlParams {
    pub fn new(mu: f64, sigma: f64, p: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::Parameter(format!("AL location {mu} not finite")));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Parameter(format!("AL scale {sigma} not > 0")));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Parameter(format!("AL skew {p} not in (0,1)")));
        }
        Ok(Self { mu, sigma, p })
    }
}

/// Closed-form moments of an AL distribution.
#[derive(Debug, Clone, Copy)]
pub struct AlMoments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

/// Log-density of the AL distribution.
pub fn al_logpdf(y: f64, theta: &AlParams) -> Result<f64> {
    if !y.is_finite() {
        return Err(Error::Domain(format!("al_logpdf: y {y} not finite")));
    }
    let ind = if y <= theta.mu { 1.0 } else { 0.0 };
    Ok((theta.p * (1.0 - theta.p) / theta.sigma).ln()
        - ((y - theta.mu) / theta.sigma) * (theta.p - ind))
}

/// Quantile function (inverse cdf) of the AL distribution, for u in (0, 1).
///
/// Lower branch for u ≤ p, upper branch for u > p; strictly increasing in u.
pub fn al_inv_cdf(u: f64, theta: &AlParams) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("al_inv_cdf: u {u} not in (0,1)")));
    }
    let AlParams { mu, sigma, p } = *theta;
    if u <= p {
        Ok(mu + sigma / (1.0 - p) * (u / p).ln())
    } else {
        Ok(mu - sigma / p * ((1.0 - u) / (1.0 - p)).ln())
    }
}

/// Cdf of the AL distribution (analytic inverse of [`al_inv_cdf`]).
pub fn al_cdf(y: f64, theta: &AlParams) -> Result<f64> {
    if !y.is_finite() {
        return Err(Error::Domain(format!("al_cdf: y {y} not finite")));
    }
    let AlParams { mu, sigma, p } = *theta;
    if y <= mu {
        Ok(p * ((1.0 - p) * (y - mu) / sigma).exp())
    } else {
        Ok(1.0 - (1.0 - p) * (-p * (y - mu) / sigma).exp())
    }
}

/// Mean, variance, skewness and kurtosis of the AL distribution.
pub fn al_moments(theta: &AlParams) -> AlMoments {
    let AlParams { mu, sigma, p } = *theta;
    let q = 1.0 - p;
    let mean = mu + sigma * (1.0 - 2.0 * p) / (p * q);
    let variance = sigma * sigma * (1.0 - 2.0 * p + 2.0 * p * p) / (q * q * p * p);
    let skewness = 2.0 * (q.powi(3) - p.powi(3)) / (q * q + p * p).powf(1.5);
    let kurtosis = (9.0 * p.powi(4) + 6.0 * p * p * q * q + 9.0 * q.powi(4))
        / (1.0 - 2.0 * p + 2.0 * p * p).powi(2);
    AlMoments {
        mean,
        variance,
        skewness,
        kurtosis,
    }
}

/// Draw from the AL distribution by inverse transform.
pub fn al_sample<R: Rng + ?Sized>(theta: &AlParams, rng: &mut R) -> f64 {
    let u = uniform_open(rng);
    al_inv_cdf(u, theta).expect("uniform_open keeps u in (0,1)")
}

/// Uniform draw on the open interval (0, 1).
pub(crate) fn uniform_open<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 && u < 1.0 {
            return u;
        }
    }
}

/// Pinball (check) loss at level `u` summed over residuals:
/// `sum eps * (u - 1{eps < 0})`. Empty input gives 0.
pub fn pinball_loss(residuals: &[f64], u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("pinball_loss: u {u} not in (0,1)")));
    }
    Ok(residuals
        .iter()
        .map(|&e| e * (u - if e < 0.0 { 1.0 } else { 0.0 }))
        .sum())
}
