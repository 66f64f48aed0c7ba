//! Distribution kernels for the quantile-regression families: asymmetric
//! Laplace, power-Pareto, GB2 and its GG/gamma special cases, plus the
//! incomplete beta/gamma machinery they are built on.

pub mod al;
pub mod gb2;
pub mod pp;
pub mod special;

pub use al::{al_cdf, al_inv_cdf, al_logpdf, al_moments, al_sample, pinball_loss, AlMoments, AlParams};
pub use gb2::{
    gb2_cdf, gb2_logpdf, gb2_quantile, gb2_scale_from_mean, gb2_variance, gg_cdf, gg_logpdf,
    gg_quantile, gg_scale_from_mean, gg_variance, Gb2Params, GgParams,
};
pub use pp::{pp_logpdf, pp_quantile, pp_solve_u};
pub use special::{
    ln_beta, ln_gamma, reg_inc_beta, reg_inc_beta_inv, reg_inc_gamma, reg_inc_gamma_inv,
};
