//! Bayesian model assembly: family + structure selection, parameter blocks
//! with identification constraints, priors, and log-posterior evaluation.
//!
//! Structures follow the M_{xy} indexing scheme: location may be a linear
//! trend (M0.), a Nelson-Siegel basis in development year (M1.), or
//! dummy-coded accident/development effects (M2., and M3. for the
//! nonparametric mode at a fixed quantile level); scale may be constant
//! (M.0), accident (M.1), development (M.2), or both (M.3); the AL shape
//! parameter may additionally carry an accident-year regression
//! (`p_i = phi_0 + phi_{1i}`, the "23'" extension). Level-1 dummies are
//! structurally absent (`alpha_11 = alpha_21 = 0` and likewise for beta and
//! phi), so predictors at (1, 1) reduce to the intercepts for dummy-coded
//! blocks.
//!
//! The power-Pareto posterior is only proper on a restricted support; the
//! constraint sets are enforced here by returning -inf from the
//! log-posterior: location predictors must sit strictly below every
//! observation (Omega_1), cell variances must exceed a small epsilon
//! (Omega_2), and the kernel exponents must lie in (0, M] x (0, inf)
//! (Omega_3).

use crate::dists::al::AlParams;
use crate::dists::gb2::{Gb2Params, GgParams};
use crate::dists::special::{ln_beta, ln_gamma};
use crate::dists::{al_logpdf, gb2_logpdf, gg_logpdf, pp_logpdf};
use crate::error::{Error, Result};
use crate::triangle::{design_row, log_transform, Cell, DesignRow, LogTriangle, Triangle};

// ---------------------------------------------------------------------------
// Spec enums and configuration
// ---------------------------------------------------------------------------

/// Distribution family of the quantile regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// AL likelihood with the skew parameter estimated.
    AlParametric,
    /// AL proxy at a fixed quantile level u (nonparametric mode, p = u).
    AlNonparametric,
    /// Polynomial power-Pareto quantile function on log data.
    PowerPareto,
    Gb2,
    Gg,
    Gamma,
}

impl Family {
    /// Families modelling the raw positive amounts rather than log data.
    pub fn positive_support(self) -> bool {
        matches!(self, Family::Gb2 | Family::Gg | Family::Gamma)
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::AlParametric => "al",
            Family::AlNonparametric => "al_nonparametric",
            Family::PowerPareto => "pp",
            Family::Gb2 => "gb2",
            Family::Gg => "gg",
            Family::Gamma => "gamma",
        }
    }
}

/// Location structures M0. - M3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocationStructure {
    /// `alpha_0 + alpha_1 i + alpha_2 j`
    LinearTrend,
    /// `alpha_0 + alpha_s F1(j) + alpha_c F2(j)` (Nelson-Siegel basis)
    NelsonSiegel,
    /// `alpha_0 + alpha_{1i} + alpha_{2j}` with level-1 dummies dropped
    Anova,
    /// ANOVA structure with coefficients specific to a fixed quantile level
    AnovaAtLevel,
}

/// Scale structures M.0 - M.3; `Unspecified` for the GB2 family, which has
/// no direct variance component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleStructure {
    Constant,
    Accident,
    Development,
    Both,
    Unspecified,
}

/// AL shape-parameter structure; `AccidentYear` is the dynamic-skewness
/// extension `p_i = phi_0 + phi_{1i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeStructure {
    Constant,
    AccidentYear,
}

/// Hyperparameters of the (weakly informative) priors.
///
/// `N(0,100)` is read as variance 100. PP kernel exponents get a flat prior
/// on `(0, pp_gamma1_max] x (0, inf)`; `pp_sigma2_eps` is the lower variance
/// bound of the PP posterior support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorConfig {
    pub coeff_variance: f64,
    pub gamma_shape: f64,
    pub gamma_rate: f64,
    pub pp_gamma1_max: f64,
    pub pp_sigma2_eps: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            coeff_variance: 100.0,
            gamma_shape: 0.001,
            gamma_rate: 0.001,
            pp_gamma1_max: 10.0,
            pp_sigma2_eps: 1e-8,
        }
    }
}

/// Full model specification: family, structures and fixed hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub family: Family,
    pub location: LocationStructure,
    pub scale: ScaleStructure,
    pub shape: ShapeStructure,
    /// Quantile level for the nonparametric mode (fixed AL skew).
    pub u: f64,
    /// Nelson-Siegel basis decay; fixed, not estimated.
    pub lambda: f64,
    pub priors: PriorConfig,
}

impl ModelSpec {
    /// Spec with family-appropriate default structures.
    pub fn new(family: Family) -> Self {
        let (location, scale) = match family {
            Family::AlParametric => (LocationStructure::Anova, ScaleStructure::Both),
            Family::AlNonparametric => (LocationStructure::AnovaAtLevel, ScaleStructure::Both),
            Family::PowerPareto => (LocationStructure::NelsonSiegel, ScaleStructure::Constant),
            Family::Gb2 | Family::Gg | Family::Gamma => {
                (LocationStructure::Anova, ScaleStructure::Unspecified)
            }
        };
        Self {
            family,
            location,
            scale,
            shape: ShapeStructure::Constant,
            u: 0.5,
            lambda: 0.5,
            priors: PriorConfig::default(),
        }
    }

    pub fn location(mut self, s: LocationStructure) -> Self {
        self.location = s;
        self
    }

    pub fn scale(mut self, s: ScaleStructure) -> Self {
        self.scale = s;
        self
    }

    pub fn shape(mut self, s: ShapeStructure) -> Self {
        self.shape = s;
        self
    }

    pub fn with_u(mut self, u: f64) -> Self {
        self.u = u;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_priors(mut self, p: PriorConfig) -> Self {
        self.priors = p;
        self
    }

    /// Check the structural invariants of the spec.
    pub fn validate(&self) -> Result<()> {
        if !(self.u > 0.0 && self.u < 1.0) {
            return Err(Error::Config(format!("quantile level u {} not in (0,1)", self.u)));
        }
        if self.location == LocationStructure::NelsonSiegel && !(self.lambda > 0.0) {
            return Err(Error::Config(format!(
                "basis decay lambda {} must be > 0",
                self.lambda
            )));
        }
        if self.family.positive_support() {
            if self.scale != ScaleStructure::Unspecified {
                return Err(Error::Config(
                    "GB2-family models have no direct variance component; scale must be unspecified"
                        .into(),
                ));
            }
            if self.shape != ShapeStructure::Constant {
                return Err(Error::Config(
                    "shape regression is an AL extension; GB2-family models do not support it"
                        .into(),
                ));
            }
        } else if self.scale == ScaleStructure::Unspecified {
            return Err(Error::Config(
                "AL and PP models need an explicit scale structure".into(),
            ));
        }
        if self.shape == ShapeStructure::AccidentYear && self.family != Family::AlParametric {
            return Err(Error::Config(
                "accident-year shape regression requires the parametric AL family".into(),
            ));
        }
        match (self.family, self.location) {
            (Family::AlNonparametric, LocationStructure::AnovaAtLevel) => {}
            (Family::AlNonparametric, _) => {
                return Err(Error::Config(
                    "the nonparametric mode uses the level-u ANOVA location structure".into(),
                ))
            }
            (_, LocationStructure::AnovaAtLevel) => {
                return Err(Error::Config(
                    "the level-u ANOVA location structure is reserved for the nonparametric mode"
                        .into(),
                ))
            }
            _ => {}
        }
        if self.family == Family::PowerPareto {
            if self.location != LocationStructure::NelsonSiegel {
                return Err(Error::Config(
                    "the power-Pareto model is offered with the basis-function location only"
                        .into(),
                ));
            }
            if !matches!(self.scale, ScaleStructure::Constant | ScaleStructure::Both) {
                return Err(Error::Config(
                    "the power-Pareto model is offered with constant or full scale structures only"
                        .into(),
                ));
            }
        }
        let pr = &self.priors;
        if !(pr.coeff_variance > 0.0 && pr.gamma_shape > 0.0 && pr.gamma_rate > 0.0) {
            return Err(Error::Config("prior hyperparameters must be positive".into()));
        }
        if !(pr.pp_gamma1_max > 0.0 && pr.pp_sigma2_eps > 0.0) {
            return Err(Error::Config("PP support constants must be positive".into()));
        }
        Ok(())
    }

    /// Short model label, e.g. `al-M23`, `gb2-M2.`, `al-M23'`.
    pub fn label(&self) -> String {
        let loc = match self.location {
            LocationStructure::LinearTrend => "0",
            LocationStructure::NelsonSiegel => "1",
            LocationStructure::Anova => "2",
            LocationStructure::AnovaAtLevel => "3",
        };
        let scale = match self.scale {
            ScaleStructure::Constant => "0",
            ScaleStructure::Accident => "1",
            ScaleStructure::Development => "2",
            ScaleStructure::Both => "3",
            ScaleStructure::Unspecified => ".",
        };
        let tick = if self.shape == ShapeStructure::AccidentYear {
            "'"
        } else {
            ""
        };
        format!("{}-M{}{}{}", self.family.name(), loc, scale, tick)
    }
}

// ---------------------------------------------------------------------------
// Parameter layout
// ---------------------------------------------------------------------------

/// Kinds of coordinate blocks, in the fixed serialization order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    LocIntercept,
    LocCovariates,
    LocAccident,
    LocDevelopment,
    ScaleIntercept,
    ScaleAccident,
    ScaleDevelopment,
    ShapeIntercept,
    ShapeAccident,
    DistShape,
}

impl BlockKind {
    pub fn group_name(self) -> &'static str {
        match self {
            BlockKind::LocIntercept => "loc_intercept",
            BlockKind::LocCovariates => "loc_covariates",
            BlockKind::LocAccident => "loc_accident",
            BlockKind::LocDevelopment => "loc_development",
            BlockKind::ScaleIntercept => "scale_intercept",
            BlockKind::ScaleAccident => "scale_accident",
            BlockKind::ScaleDevelopment => "scale_development",
            BlockKind::ShapeIntercept => "shape_intercept",
            BlockKind::ShapeAccident => "shape_accident",
            BlockKind::DistShape => "dist_shape",
        }
    }
}

/// One contiguous block of coordinates in the flat parameter vector.
#[derive(Debug, Clone)]
pub struct Block {
    pub kind: BlockKind,
    pub offset: usize,
    pub len: usize,
}

impl Block {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }
}

/// Flat layout of all estimated coordinates, with names in chain-file order.
#[derive(Debug, Clone)]
pub struct ParamLayout {
    blocks: Vec<Block>,
    names: Vec<String>,
}

impl ParamLayout {
    fn build(spec: &ModelSpec, i_count: usize) -> Self {
        let mut blocks = Vec::new();
        let mut names: Vec<String> = Vec::new();
        let mut push = |kind: BlockKind, block_names: Vec<String>, names: &mut Vec<String>| {
            let offset = names.len();
            let len = block_names.len();
            names.extend(block_names);
            if len > 0 {
                blocks.push(Block { kind, offset, len });
            }
        };
        let dummies = |prefix: &str| -> Vec<String> {
            (2..=i_count).map(|k| format!("{prefix}_{k}")).collect()
        };

        push(BlockKind::LocIntercept, vec!["alpha_0".into()], &mut names);
        match spec.location {
            LocationStructure::LinearTrend => push(
                BlockKind::LocCovariates,
                vec!["alpha_1".into(), "alpha_2".into()],
                &mut names,
            ),
            LocationStructure::NelsonSiegel => push(
                BlockKind::LocCovariates,
                vec!["alpha_slope".into(), "alpha_curv".into()],
                &mut names,
            ),
            LocationStructure::Anova | LocationStructure::AnovaAtLevel => {
                push(BlockKind::LocAccident, dummies("alpha_acc"), &mut names);
                push(BlockKind::LocDevelopment, dummies("alpha_dev"), &mut names);
            }
        }
        if spec.scale != ScaleStructure::Unspecified {
            push(BlockKind::ScaleIntercept, vec!["beta_0".into()], &mut names);
            match spec.scale {
                ScaleStructure::Accident => {
                    push(BlockKind::ScaleAccident, dummies("beta_acc"), &mut names)
                }
                ScaleStructure::Development => {
                    push(BlockKind::ScaleDevelopment, dummies("beta_dev"), &mut names)
                }
                ScaleStructure::Both => {
                    push(BlockKind::ScaleAccident, dummies("beta_acc"), &mut names);
                    push(BlockKind::ScaleDevelopment, dummies("beta_dev"), &mut names);
                }
                _ => {}
            }
        }
        if spec.shape == ShapeStructure::AccidentYear {
            push(BlockKind::ShapeIntercept, vec!["phi_0".into()], &mut names);
            push(BlockKind::ShapeAccident, dummies("phi_acc"), &mut names);
        }
        let dist: Vec<String> = match spec.family {
            Family::AlParametric => {
                if spec.shape == ShapeStructure::AccidentYear {
                    vec![] // the skew is carried by the phi block
                } else {
                    vec!["p".into()]
                }
            }
            Family::AlNonparametric => vec![],
            Family::PowerPareto => vec!["gamma_1".into(), "gamma_2".into()],
            Family::Gb2 => vec!["a".into(), "p".into(), "q".into()],
            Family::Gg => vec!["a".into(), "p".into()],
            Family::Gamma => vec!["p".into()],
        };
        push(BlockKind::DistShape, dist, &mut names);

        ParamLayout { blocks, names }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, kind: BlockKind) -> Option<&Block> {
        self.blocks.iter().find(|b| b.kind == kind)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Flat coefficient/shape vector matching a [`ParamLayout`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    pub values: Vec<f64>,
}

impl ParamVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Per-theta family context (shared terms hoisted out of the per-cell loop)
// ---------------------------------------------------------------------------

/// Family-level terms of the likelihood that do not vary across cells.
#[derive(Debug, Clone)]
pub enum FamilyCtx {
    Al {
        /// Skew per accident year (constant vectors when not dynamic).
        p_by_year: Vec<f64>,
    },
    Pp {
        gamma1: f64,
        gamma2: f64,
    },
    Gb2 {
        a: f64,
        p: f64,
        q: f64,
        /// ln b_ij = mu*_ij + offset (mean link on the log scale).
        ln_scale_offset: f64,
        ln_beta_pq: f64,
    },
    Gg {
        a: f64,
        p: f64,
        ln_scale_offset: f64,
        ln_gamma_p: f64,
    },
}

/// Distribution of a single cell at a given parameter vector, on the scale
/// the family models (log scale for AL/PP, original scale for the GB2
/// family).
#[derive(Debug, Clone)]
pub enum CellDist {
    Al(AlParams),
    Pp {
        mu: f64,
        sigma: f64,
        gamma1: f64,
        gamma2: f64,
    },
    Gb2(Gb2Params),
    Gg(GgParams),
}

// ---------------------------------------------------------------------------
// Bound model
// ---------------------------------------------------------------------------

/// A model specification bound to triangle data: cached design rows for the
/// full I x I grid, log-scale observations, and the parameter layout.
#[derive(Debug, Clone)]
pub struct Model {
    spec: ModelSpec,
    i_count: usize,
    layout: ParamLayout,
    rows: Vec<DesignRow>, // all I*I cells, row-major
    upper: Vec<Cell>,
    lower: Vec<Cell>,
    /// y* = ln(max(y, floor)) per upper cell (in `upper` order).
    ystar: Vec<f64>,
    /// Raw (unfloored) amounts per upper cell, for original-scale reporting.
    raw: Vec<f64>,
    floor: f64,
    /// Cells whose likelihood depends on each coordinate.
    touched: Vec<Vec<usize>>,
}

impl Model {
    pub fn new(spec: ModelSpec, data: &Triangle, floor: f64) -> Result<Self> {
        spec.validate()?;
        let i_count = data.i_count();
        let log_data: LogTriangle = log_transform(data, floor)?;
        let layout = ParamLayout::build(&spec, i_count);
        let mut rows = Vec::with_capacity(i_count * i_count);
        for i in 1..=i_count {
            for j in 1..=i_count {
                rows.push(design_row(&spec, i, j, i_count)?);
            }
        }
        let upper = data.upper_cells();
        let lower = data.lower_cells();
        let ystar: Vec<f64> = upper
            .iter()
            .map(|&(i, j)| log_data.value(i, j).unwrap())
            .collect();
        let raw: Vec<f64> = upper
            .iter()
            .map(|&(i, j)| data.amount(i, j).unwrap())
            .collect();
        let mut model = Self {
            spec,
            i_count,
            layout,
            rows,
            upper,
            lower,
            ystar,
            raw,
            floor,
            touched: Vec::new(),
        };
        model.touched = model.compute_touched();
        Ok(model)
    }

    // Cells affected by each coordinate, used for incremental posterior
    // evaluation: dummy coordinates touch one accident or development year,
    // everything else touches all cells.
    fn compute_touched(&self) -> Vec<Vec<usize>> {
        let all: Vec<usize> = (0..self.upper.len()).collect();
        let mut touched = vec![Vec::new(); self.layout.len()];
        for block in self.layout.blocks() {
            for k in block.range() {
                let within = k - block.offset;
                touched[k] = match block.kind {
                    BlockKind::LocAccident | BlockKind::ScaleAccident | BlockKind::ShapeAccident => {
                        let year = within + 2;
                        self.upper
                            .iter()
                            .enumerate()
                            .filter(|(_, &(i, _))| i == year)
                            .map(|(idx, _)| idx)
                            .collect()
                    }
                    BlockKind::LocDevelopment | BlockKind::ScaleDevelopment => {
                        let year = within + 2;
                        self.upper
                            .iter()
                            .enumerate()
                            .filter(|(_, &(_, j))| j == year)
                            .map(|(idx, _)| idx)
                            .collect()
                    }
                    _ => all.clone(),
                };
            }
        }
        touched
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn i_count(&self) -> usize {
        self.i_count
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn n_params(&self) -> usize {
        self.layout.len()
    }

    pub fn param_names(&self) -> &[String] {
        self.layout.names()
    }

    pub fn upper_cells(&self) -> &[Cell] {
        &self.upper
    }

    pub fn lower_cells(&self) -> &[Cell] {
        &self.lower
    }

    /// y* values in upper-cell order.
    pub fn ystar(&self) -> &[f64] {
        &self.ystar
    }

    /// Raw observed amounts in upper-cell order.
    pub fn raw_observed(&self) -> &[f64] {
        &self.raw
    }

    pub fn touched_cells(&self, coord: usize) -> &[usize] {
        &self.touched[coord]
    }

    fn row(&self, i: usize, j: usize) -> &DesignRow {
        &self.rows[(i - 1) * self.i_count + (j - 1)]
    }

    fn check_len(&self, theta: &ParamVector) -> Result<()> {
        if theta.len() != self.layout.len() {
            return Err(Error::Parameter(format!(
                "parameter vector has {} coordinates, layout needs {}",
                theta.len(),
                self.layout.len()
            )));
        }
        Ok(())
    }

    fn dot_block(&self, theta: &ParamVector, kind: BlockKind, covs: &[f64], at: &mut usize) -> f64 {
        match self.layout.block(kind) {
            Some(b) => {
                let mut acc = 0.0;
                for (k, idx) in b.range().enumerate() {
                    acc += theta.values[idx] * covs[*at + k];
                }
                *at += b.len;
                acc
            }
            None => 0.0,
        }
    }

    /// Location linear predictor mu*_ij.
    pub fn location_predictor(&self, theta: &ParamVector, i: usize, j: usize) -> Result<f64> {
        self.check_len(theta)?;
        let row = self.row(i, j);
        let b0 = self
            .layout
            .block(BlockKind::LocIntercept)
            .expect("location intercept always present");
        let mut mu = theta.values[b0.offset];
        let mut at = 0;
        mu += self.dot_block(theta, BlockKind::LocCovariates, &row.location, &mut at);
        mu += self.dot_block(theta, BlockKind::LocAccident, &row.location, &mut at);
        mu += self.dot_block(theta, BlockKind::LocDevelopment, &row.location, &mut at);
        Ok(mu)
    }

    /// Scale linear predictor (before exponentiation).
    fn scale_linear(&self, theta: &ParamVector, i: usize, j: usize) -> Result<f64> {
        let b0 = self.layout.block(BlockKind::ScaleIntercept).ok_or_else(|| {
            Error::Unsupported(format!(
                "{} models have no direct scale component",
                self.spec.family.name()
            ))
        })?;
        let row = self.row(i, j);
        let mut lin = theta.values[b0.offset];
        let mut at = 0;
        lin += self.dot_block(theta, BlockKind::ScaleAccident, &row.scale, &mut at);
        lin += self.dot_block(theta, BlockKind::ScaleDevelopment, &row.scale, &mut at);
        Ok(lin)
    }

    /// Cell variance sigma^2_ij = exp(beta_0 + sum beta_k s_ijk).
    pub fn scale_predictor(&self, theta: &ParamVector, i: usize, j: usize) -> Result<f64> {
        self.check_len(theta)?;
        Ok(self.scale_linear(theta, i, j)?.exp())
    }

    /// AL skew for accident year i: `phi_0 + phi_{1i}` under the dynamic
    /// shape structure, otherwise the scalar skew (or the fixed level u).
    ///
    /// No support clamping happens here; out-of-(0,1) values are rejected by
    /// the posterior.
    pub fn shape_predictor(&self, theta: &ParamVector, i: usize) -> Result<f64> {
        self.check_len(theta)?;
        match self.spec.shape {
            ShapeStructure::AccidentYear => {
                let b0 = self
                    .layout
                    .block(BlockKind::ShapeIntercept)
                    .expect("shape intercept present under AccidentYear");
                let mut p = theta.values[b0.offset];
                if i >= 2 {
                    let acc = self
                        .layout
                        .block(BlockKind::ShapeAccident)
                        .expect("shape dummies present under AccidentYear");
                    p += theta.values[acc.offset + (i - 2)];
                }
                Ok(p)
            }
            ShapeStructure::Constant => match self.spec.family {
                Family::AlParametric => {
                    let b = self
                        .layout
                        .block(BlockKind::DistShape)
                        .expect("AL skew block present");
                    Ok(theta.values[b.offset])
                }
                Family::AlNonparametric => Ok(self.spec.u),
                _ => Err(Error::Unsupported(
                    "shape predictor is defined for AL families only".into(),
                )),
            },
        }
    }

    /// Log-prior over all coordinates (sum of independent terms); -inf
    /// outside the support.
    pub fn log_prior(&self, theta: &ParamVector) -> f64 {
        debug_assert_eq!(theta.len(), self.layout.len());
        (0..theta.len())
            .map(|k| self.prior_term(k, theta.values[k]))
            .sum()
    }

    /// Prior log-density contribution of a single coordinate.
    pub fn prior_term(&self, coord: usize, value: f64) -> f64 {
        let pr = &self.spec.priors;
        let normal = |x: f64| {
            -0.5 * (2.0 * std::f64::consts::PI * pr.coeff_variance).ln()
                - x * x / (2.0 * pr.coeff_variance)
        };
        let gamma = |x: f64| {
            if x > 0.0 {
                pr.gamma_shape * pr.gamma_rate.ln() - ln_gamma(pr.gamma_shape)
                    + (pr.gamma_shape - 1.0) * x.ln()
                    - pr.gamma_rate * x
            } else {
                f64::NEG_INFINITY
            }
        };
        let block = self
            .layout
            .blocks()
            .iter()
            .find(|b| b.range().contains(&coord))
            .expect("coordinate inside layout");
        if block.kind != BlockKind::DistShape {
            return normal(value);
        }
        let name = &self.layout.names()[coord];
        match self.spec.family {
            Family::AlParametric => {
                // Uniform(0,1) on the skew.
                if value > 0.0 && value < 1.0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            Family::PowerPareto => {
                // Flat on (0, M] for gamma_1, flat on (0, inf) for gamma_2.
                let ok = if name == "gamma_1" {
                    value > 0.0 && value <= pr.pp_gamma1_max
                } else {
                    value > 0.0
                };
                if ok {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            Family::Gb2 | Family::Gg => {
                if name == "a" {
                    normal(value)
                } else {
                    gamma(value)
                }
            }
            Family::Gamma => gamma(value),
            Family::AlNonparametric => 0.0,
        }
    }

    /// Family-level likelihood context; `Ok(None)` signals a support
    /// violation (log-posterior -inf).
    pub fn family_ctx(&self, theta: &ParamVector) -> Result<Option<FamilyCtx>> {
        self.check_len(theta)?;
        let dist = self.layout.block(BlockKind::DistShape);
        let val = |name: &str| -> f64 {
            let b = dist.expect("dist block present");
            let idx = self.layout.names()[b.range()]
                .iter()
                .position(|n| n == name)
                .expect("named dist coordinate");
            theta.values[b.offset + idx]
        };
        match self.spec.family {
            Family::AlParametric | Family::AlNonparametric => {
                let mut p_by_year = Vec::with_capacity(self.i_count);
                for i in 1..=self.i_count {
                    let p = self.shape_predictor(theta, i)?;
                    if !(p > 0.0 && p < 1.0) {
                        return Ok(None);
                    }
                    p_by_year.push(p);
                }
                Ok(Some(FamilyCtx::Al { p_by_year }))
            }
            Family::PowerPareto => {
                let gamma1 = val("gamma_1");
                let gamma2 = val("gamma_2");
                let pr = &self.spec.priors;
                if !(gamma1 > 0.0 && gamma1 <= pr.pp_gamma1_max && gamma2 > 0.0) {
                    return Ok(None); // Omega_3
                }
                Ok(Some(FamilyCtx::Pp { gamma1, gamma2 }))
            }
            Family::Gb2 => {
                let (a, p, q) = (val("a"), val("p"), val("q"));
                if a == 0.0 || !(p > 0.0 && q > 0.0) {
                    return Ok(None);
                }
                let inv = 1.0 / a;
                if !(p + inv > 0.0 && q - inv > 0.0) {
                    return Ok(None); // mean link undefined
                }
                Ok(Some(FamilyCtx::Gb2 {
                    a,
                    p,
                    q,
                    ln_scale_offset: ln_beta(p, q) - ln_beta(p + inv, q - inv),
                    ln_beta_pq: ln_beta(p, q),
                }))
            }
            Family::Gg | Family::Gamma => {
                let (a, p) = if self.spec.family == Family::Gg {
                    (val("a"), val("p"))
                } else {
                    (1.0, val("p"))
                };
                if a == 0.0 || !(p > 0.0) {
                    return Ok(None);
                }
                if !(p + 1.0 / a > 0.0) {
                    return Ok(None);
                }
                Ok(Some(FamilyCtx::Gg {
                    a,
                    p,
                    ln_scale_offset: ln_gamma(p) - ln_gamma(p + 1.0 / a),
                    ln_gamma_p: ln_gamma(p),
                }))
            }
        }
    }

    /// Log-likelihood of one upper cell (by index into `upper_cells`).
    ///
    /// Returns `Ok(-inf)` for support violations, `Err` only for genuine
    /// numeric failures.
    pub fn cell_loglik(&self, theta: &ParamVector, ctx: &FamilyCtx, idx: usize) -> Result<f64> {
        let (i, j) = self.upper[idx];
        let y = self.ystar[idx];
        let mu = self.location_predictor(theta, i, j)?;
        match ctx {
            FamilyCtx::Al { p_by_year } => {
                let p = p_by_year[i - 1];
                let sigma = (0.5 * self.scale_linear(theta, i, j)?).exp();
                if !(sigma > 0.0) || !sigma.is_finite() {
                    return Ok(f64::NEG_INFINITY);
                }
                let ind = if y <= mu { 1.0 } else { 0.0 };
                Ok((p * (1.0 - p) / sigma).ln() - ((y - mu) / sigma) * (p - ind))
            }
            FamilyCtx::Pp { gamma1, gamma2 } => {
                if !(mu < y) {
                    return Ok(f64::NEG_INFINITY); // Omega_1
                }
                let sig2 = self.scale_linear(theta, i, j)?.exp();
                if !(sig2 > self.spec.priors.pp_sigma2_eps) || !sig2.is_finite() {
                    return Ok(f64::NEG_INFINITY); // Omega_2
                }
                match pp_logpdf(y, mu, sig2.sqrt(), *gamma1, *gamma2) {
                    Ok(v) => Ok(v),
                    Err(Error::Domain(_)) => Ok(f64::NEG_INFINITY),
                    Err(e) => Err(e),
                }
            }
            FamilyCtx::Gb2 {
                a,
                p,
                q,
                ln_scale_offset,
                ln_beta_pq,
            } => {
                // ln b_ij = mu*_ij + offset; y > 0 by the log-transform floor.
                let ln_b = mu + ln_scale_offset;
                if !ln_b.is_finite() {
                    return Ok(f64::NEG_INFINITY);
                }
                let r = y - ln_b; // ln(y_ij / b_ij)
                let t = a * r;
                let softplus = if t > 0.0 {
                    t + (-t).exp().ln_1p()
                } else {
                    t.exp().ln_1p()
                };
                Ok(a.abs().ln() - ln_b + (a * p - 1.0) * r - ln_beta_pq - (p + q) * softplus)
            }
            FamilyCtx::Gg {
                a,
                p,
                ln_scale_offset,
                ln_gamma_p,
            } => {
                let ln_b = mu + ln_scale_offset;
                if !ln_b.is_finite() {
                    return Ok(f64::NEG_INFINITY);
                }
                let t = a * (y - ln_b);
                Ok(a.abs().ln() + p * t - t.exp() - y - ln_gamma_p)
            }
        }
    }

    /// Full-data log-likelihood; `Ok(-inf)` for support violations.
    pub fn log_likelihood(&self, theta: &ParamVector) -> Result<f64> {
        let ctx = match self.family_ctx(theta)? {
            Some(c) => c,
            None => return Ok(f64::NEG_INFINITY),
        };
        let mut total = 0.0;
        for idx in 0..self.upper.len() {
            let ll = self.cell_loglik(theta, &ctx, idx)?;
            if ll == f64::NEG_INFINITY {
                return Ok(f64::NEG_INFINITY);
            }
            total += ll;
        }
        Ok(total)
    }

    /// Log-posterior (likelihood plus prior).
    pub fn log_posterior(&self, theta: &ParamVector) -> Result<f64> {
        let prior = self.log_prior(theta);
        if prior == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(self.log_likelihood(theta)? + prior)
    }

    /// Deviance `-2 log f(y | theta)`.
    pub fn deviance(&self, theta: &ParamVector) -> Result<f64> {
        Ok(-2.0 * self.log_likelihood(theta)?)
    }

    /// The predictive distribution of any cell (upper or lower) at `theta`,
    /// on the family's modelling scale.
    pub fn cell_dist(&self, theta: &ParamVector, i: usize, j: usize) -> Result<CellDist> {
        if i < 1 || j < 1 || i > self.i_count || j > self.i_count {
            return Err(Error::InvalidIndex(format!(
                "cell ({i},{j}) outside 1..={}",
                self.i_count
            )));
        }
        let mu = self.location_predictor(theta, i, j)?;
        match self.spec.family {
            Family::AlParametric | Family::AlNonparametric => {
                let sigma = (0.5 * self.scale_linear(theta, i, j)?).exp();
                let p = self.shape_predictor(theta, i)?;
                Ok(CellDist::Al(AlParams::new(mu, sigma, p)?))
            }
            Family::PowerPareto => {
                let ctx = self
                    .family_ctx(theta)?
                    .ok_or_else(|| Error::Parameter("PP parameters outside support".into()))?;
                let FamilyCtx::Pp { gamma1, gamma2 } = ctx else {
                    unreachable!()
                };
                let sigma = (0.5 * self.scale_linear(theta, i, j)?).exp();
                Ok(CellDist::Pp {
                    mu,
                    sigma,
                    gamma1,
                    gamma2,
                })
            }
            Family::Gb2 => {
                let ctx = self
                    .family_ctx(theta)?
                    .ok_or_else(|| Error::Parameter("GB2 parameters outside support".into()))?;
                let FamilyCtx::Gb2 {
                    a,
                    p,
                    q,
                    ln_scale_offset,
                    ..
                } = ctx
                else {
                    unreachable!()
                };
                Ok(CellDist::Gb2(Gb2Params::with_ln_scale(
                    a,
                    mu + ln_scale_offset,
                    p,
                    q,
                )?))
            }
            Family::Gg | Family::Gamma => {
                let ctx = self
                    .family_ctx(theta)?
                    .ok_or_else(|| Error::Parameter("GG parameters outside support".into()))?;
                let FamilyCtx::Gg {
                    a,
                    p,
                    ln_scale_offset,
                    ..
                } = ctx
                else {
                    unreachable!()
                };
                Ok(CellDist::Gg(GgParams::with_ln_scale(
                    a,
                    mu + ln_scale_offset,
                    p,
                )?))
            }
        }
    }
}

impl CellDist {
    /// Quantile on the original (currency) scale; log-scale families map
    /// through exp.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        match self {
            CellDist::Al(th) => Ok(crate::dists::al_inv_cdf(u, th)?.exp()),
            CellDist::Pp {
                mu,
                sigma,
                gamma1,
                gamma2,
            } => Ok((mu + crate::dists::pp_quantile(u, *gamma1, *gamma2)? * sigma).exp()),
            CellDist::Gb2(th) => crate::dists::gb2_quantile(u, th),
            CellDist::Gg(th) => crate::dists::gg_quantile(u, th),
        }
    }

    /// Cdf of an original-scale amount y > 0.
    pub fn cdf(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(Error::Domain(format!("cdf: amount {y} not > 0")));
        }
        match self {
            CellDist::Al(th) => crate::dists::al_cdf(y.ln(), th),
            CellDist::Pp {
                mu,
                sigma,
                gamma1,
                gamma2,
            } => match crate::dists::pp_solve_u(y.ln(), *mu, *sigma, *gamma1, *gamma2) {
                Ok(u) => Ok(u),
                // Domain failures split by side: below the support edge the
                // cdf is 0, beyond the representable upper tail it is 1.
                Err(Error::Domain(_)) => {
                    let edge = if *gamma1 > 0.0 { *mu } else { mu + sigma };
                    Ok(if y.ln() <= edge { 0.0 } else { 1.0 })
                }
                Err(e) => Err(e),
            },
            CellDist::Gb2(th) => crate::dists::gb2_cdf(y, th),
            CellDist::Gg(th) => crate::dists::gg_cdf(y, th),
        }
    }

    /// Log-density of an original-scale amount under the modelling scale
    /// (log data for AL/PP).
    pub fn logpdf_modelling_scale(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(Error::Domain(format!("logpdf: amount {y} not > 0")));
        }
        match self {
            CellDist::Al(th) => al_logpdf(y.ln(), th),
            CellDist::Pp {
                mu,
                sigma,
                gamma1,
                gamma2,
            } => pp_logpdf(y.ln(), *mu, *sigma, *gamma1, *gamma2),
            CellDist::Gb2(th) => gb2_logpdf(y, th),
            CellDist::Gg(th) => gg_logpdf(y, th),
        }
    }

    /// Draw an original-scale amount by quantile transform.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let u = crate::dists::al::uniform_open(rng);
        self.quantile(u)
    }

    /// Model mean on the original scale: exp of the log-scale mean for AL
    /// and PP, the mean link for the GB2 family.
    pub fn mean_original_scale(&self) -> Result<f64> {
        match self {
            CellDist::Al(th) => Ok(crate::dists::al_moments(th).mean.exp()),
            CellDist::Pp {
                mu,
                sigma,
                gamma1,
                gamma2,
            } => {
                // E[kernel] = B(gamma1 + 1, 1 - gamma2), finite for gamma2 < 1.
                if !(*gamma2 < 1.0) {
                    return Err(Error::NonfiniteMoment(format!(
                        "PP log-scale mean undefined for gamma2 {gamma2} >= 1"
                    )));
                }
                let kernel_mean = ln_beta(gamma1 + 1.0, 1.0 - gamma2).exp();
                Ok((mu + sigma * kernel_mean).exp())
            }
            CellDist::Gb2(th) => {
                let mu = (th.ln_b + ln_beta(th.p + 1.0 / th.a, th.q - 1.0 / th.a)
                    - ln_beta(th.p, th.q))
                .exp();
                Ok(mu)
            }
            CellDist::Gg(th) => {
                let mu = (th.ln_b + ln_gamma(th.p + 1.0 / th.a) - ln_gamma(th.p)).exp();
                Ok(mu)
            }
        }
    }

    /// Mean and variance on the modelling scale (log scale for AL/PP,
    /// original for GB2/GG/Gamma); errors when the variance is infinite.
    pub fn mean_var_modelling_scale(&self) -> Result<(f64, f64)> {
        match self {
            CellDist::Al(th) => {
                let m = crate::dists::al_moments(th);
                Ok((m.mean, m.variance))
            }
            CellDist::Pp {
                mu,
                sigma,
                gamma1,
                gamma2,
            } => {
                if !(*gamma2 < 0.5) {
                    return Err(Error::NonfiniteMoment(format!(
                        "PP log-scale variance undefined for gamma2 {gamma2} >= 1/2"
                    )));
                }
                let m1 = ln_beta(gamma1 + 1.0, 1.0 - gamma2).exp();
                let m2 = ln_beta(2.0 * gamma1 + 1.0, 1.0 - 2.0 * gamma2).exp();
                Ok((mu + sigma * m1, sigma * sigma * (m2 - m1 * m1)))
            }
            CellDist::Gb2(th) => {
                let mean = self.mean_original_scale()?;
                let var = crate::dists::gb2_variance(mean, th.a, th.p, th.q)?;
                Ok((mean, var))
            }
            CellDist::Gg(th) => {
                let mean = self.mean_original_scale()?;
                let var = crate::dists::gg_variance(mean, th.a, th.p)?;
                Ok((mean, var))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small_triangle() -> Triangle {
        Triangle::from_cells(
            3,
            &[
                (1, 1, 10.0),
                (1, 2, 20.0),
                (1, 3, 5.0),
                (2, 1, 12.0),
                (2, 2, 18.0),
                (3, 1, 9.0),
            ],
        )
        .unwrap()
    }

    fn al_m23(data: &Triangle) -> Model {
        let spec = ModelSpec::new(Family::AlParametric)
            .location(LocationStructure::Anova)
            .scale(ScaleStructure::Both);
        Model::new(spec, data, 0.01).unwrap()
    }

    #[test]
    fn spec_validation_rules() {
        assert!(ModelSpec::new(Family::Gb2).validate().is_ok());
        assert!(ModelSpec::new(Family::Gb2)
            .scale(ScaleStructure::Both)
            .validate()
            .is_err());
        assert!(ModelSpec::new(Family::Gamma)
            .shape(ShapeStructure::AccidentYear)
            .validate()
            .is_err());
        assert!(ModelSpec::new(Family::AlParametric)
            .scale(ScaleStructure::Unspecified)
            .validate()
            .is_err());
        assert!(ModelSpec::new(Family::PowerPareto)
            .location(LocationStructure::Anova)
            .validate()
            .is_err());
        assert!(ModelSpec::new(Family::PowerPareto)
            .scale(ScaleStructure::Accident)
            .validate()
            .is_err());
        assert!(ModelSpec::new(Family::AlNonparametric)
            .location(LocationStructure::Anova)
            .validate()
            .is_err());
        assert!(ModelSpec::new(Family::AlParametric)
            .location(LocationStructure::AnovaAtLevel)
            .validate()
            .is_err());
        assert!(ModelSpec::new(Family::AlParametric).with_u(1.5).validate().is_err());
    }

    #[test]
    fn layout_sizes_and_names() {
        let data = small_triangle();
        let m = al_m23(&data);
        // alpha_0 + 2 acc + 2 dev + beta_0 + 2 acc + 2 dev + p
        assert_eq!(m.n_params(), 11);
        assert_eq!(m.param_names()[0], "alpha_0");
        assert!(m.param_names().contains(&"alpha_acc_3".to_string()));
        assert!(m.param_names().contains(&"beta_dev_2".to_string()));
        assert_eq!(m.param_names().last().unwrap(), "p");

        let spec23p = ModelSpec::new(Family::AlParametric)
            .shape(ShapeStructure::AccidentYear);
        let m = Model::new(spec23p, &data, 0.01).unwrap();
        // the phi block replaces the scalar skew
        assert!(m.param_names().contains(&"phi_0".to_string()));
        assert!(!m.param_names().contains(&"p".to_string()));
    }

    #[test]
    fn predictors_match_hand_arithmetic() {
        let data = small_triangle();
        // M0. trend: alpha = (1, 0.1, -0.2) at (i,j) = (2,3) -> 0.6
        let spec = ModelSpec::new(Family::AlParametric)
            .location(LocationStructure::LinearTrend)
            .scale(ScaleStructure::Constant);
        let m = Model::new(spec, &data, 0.01).unwrap();
        let mut theta = ParamVector::zeros(m.n_params());
        theta.values[0] = 1.0;
        theta.values[1] = 0.1;
        theta.values[2] = -0.2;
        assert_relative_eq!(
            m.location_predictor(&theta, 2, 3).unwrap(),
            0.6,
            epsilon = 1e-12
        );

        // Nelson-Siegel with the example coefficients at j = 1.
        let spec = ModelSpec::new(Family::AlParametric)
            .location(LocationStructure::NelsonSiegel)
            .scale(ScaleStructure::Constant)
            .with_lambda(0.5);
        let m = Model::new(spec, &data, 0.01).unwrap();
        let mut theta = ParamVector::zeros(m.n_params());
        theta.values[0] = 1.0; // alpha_0
        theta.values[1] = 0.5; // alpha_slope
        theta.values[2] = 2.0; // alpha_curv
        assert_relative_eq!(
            m.location_predictor(&theta, 1, 1).unwrap(),
            1.754286,
            epsilon = 1e-6
        );

        // Empty model: all coefficients zero.
        let m = al_m23(&data);
        let theta = ParamVector::zeros(m.n_params());
        assert_relative_eq!(m.location_predictor(&theta, 2, 2).unwrap(), 0.0);
        assert_relative_eq!(m.scale_predictor(&theta, 2, 2).unwrap(), 1.0);
    }

    #[test]
    fn scale_predictor_structures() {
        let data = small_triangle();
        let m = al_m23(&data);
        let names = m.param_names().to_vec();
        let mut theta = ParamVector::zeros(m.n_params());
        // beta_0 = ln 4 under constant entries elsewhere -> sigma^2 = 4 at (1,1).
        let b0 = names.iter().position(|n| n == "beta_0").unwrap();
        theta.values[b0] = 4.0_f64.ln();
        assert_relative_eq!(m.scale_predictor(&theta, 1, 1).unwrap(), 4.0, epsilon = 1e-12);
        // M.3 cancellation: beta_acc_i = 0.5, beta_dev_j = -0.5 at (2,2) with beta_0 = 0.
        theta.values[b0] = 0.0;
        let acc2 = names.iter().position(|n| n == "beta_acc_2").unwrap();
        let dev2 = names.iter().position(|n| n == "beta_dev_2").unwrap();
        theta.values[acc2] = 0.5;
        theta.values[dev2] = -0.5;
        assert_relative_eq!(m.scale_predictor(&theta, 2, 2).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn shape_predictor_and_support() {
        let data = small_triangle();
        let spec = ModelSpec::new(Family::AlParametric).shape(ShapeStructure::AccidentYear);
        let m = Model::new(spec, &data, 0.01).unwrap();
        let names = m.param_names().to_vec();
        let mut theta = ParamVector::zeros(m.n_params());
        let phi0 = names.iter().position(|n| n == "phi_0").unwrap();
        let phi2 = names.iter().position(|n| n == "phi_acc_2").unwrap();
        theta.values[phi0] = 0.9;
        theta.values[phi2] = -0.1;
        assert_relative_eq!(m.shape_predictor(&theta, 1).unwrap(), 0.9); // phi_acc_1 = 0
        assert_relative_eq!(m.shape_predictor(&theta, 2).unwrap(), 0.8, epsilon = 1e-12);
        // p_i outside (0,1) rejects the whole posterior.
        theta.values[phi2] = 0.2; // p_2 = 1.1
        assert_eq!(
            m.log_posterior(&theta).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn prior_values() {
        let data = small_triangle();
        let m = al_m23(&data);
        // Single coefficient at 0: N(0, 100) log-density.
        let expect = -0.5 * (200.0 * std::f64::consts::PI).ln();
        assert_relative_eq!(m.prior_term(0, 0.0), expect, epsilon = 1e-12);
        // AL skew is uniform on (0,1).
        let p_idx = m.layout().index_of("p").unwrap();
        assert_eq!(m.prior_term(p_idx, 0.5), 0.0);
        assert_eq!(m.prior_term(p_idx, 1.5), f64::NEG_INFINITY);
        // Additivity: log_prior is the sum of prior terms.
        let mut theta = ParamVector::zeros(m.n_params());
        theta.values[p_idx] = 0.5;
        let total: f64 = (0..m.n_params())
            .map(|k| m.prior_term(k, theta.values[k]))
            .sum();
        assert_relative_eq!(m.log_prior(&theta), total, epsilon = 1e-12);

        // GB2 shape q <= 0 is outside the prior support.
        let gb2 = Model::new(ModelSpec::new(Family::Gb2), &data, 0.01).unwrap();
        let q_idx = gb2.layout().index_of("q").unwrap();
        assert_eq!(gb2.prior_term(q_idx, -1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn al_posterior_single_cell_value() {
        // One-cell triangle with y* = mu*: the log-likelihood reduces to
        // ln(p(1-p)/sigma).
        let data = Triangle::from_cells(1, &[(1, 1, 1.0)]).unwrap(); // y* = 0
        let spec = ModelSpec::new(Family::AlParametric)
            .location(LocationStructure::LinearTrend)
            .scale(ScaleStructure::Constant);
        let m = Model::new(spec, &data, 0.01).unwrap();
        let mut theta = ParamVector::zeros(m.n_params());
        let p_idx = m.layout().index_of("p").unwrap();
        theta.values[p_idx] = 0.5;
        // alpha_1 = alpha_2 = 0 and alpha_0 = 0 puts mu* = 0 = y*.
        let expect = (0.25_f64).ln() + m.log_prior(&theta);
        assert_relative_eq!(m.log_posterior(&theta).unwrap(), expect, epsilon = 1e-12);
    }

    #[test]
    fn pp_support_constraints_reject() {
        let data = small_triangle();
        let spec = ModelSpec::new(Family::PowerPareto);
        let m = Model::new(spec, &data, 0.01).unwrap();
        let names = m.param_names().to_vec();
        let idx = |n: &str| names.iter().position(|x| x == n).unwrap();
        let mut theta = ParamVector::zeros(m.n_params());
        theta.values[idx("gamma_1")] = 0.5;
        theta.values[idx("gamma_2")] = 0.5;
        // Intercept below min(y*): finite posterior.
        theta.values[idx("alpha_0")] = 0.0; // min y* = ln 5 ~ 1.6
        assert!(m.log_posterior(&theta).unwrap().is_finite());
        // Omega_1: location above one observation -> -inf.
        theta.values[idx("alpha_0")] = 2.0; // above ln 5
        assert_eq!(m.log_posterior(&theta).unwrap(), f64::NEG_INFINITY);
        // Omega_3: gamma_1 outside (0, M] -> -inf.
        theta.values[idx("alpha_0")] = 0.0;
        theta.values[idx("gamma_1")] = 11.0;
        assert_eq!(m.log_posterior(&theta).unwrap(), f64::NEG_INFINITY);
        theta.values[idx("gamma_1")] = 0.5;
        theta.values[idx("gamma_2")] = -0.5;
        assert_eq!(m.log_posterior(&theta).unwrap(), f64::NEG_INFINITY);
        // Omega_2: collapse the scale predictor below epsilon -> -inf.
        theta.values[idx("gamma_2")] = 0.5;
        theta.values[idx("beta_0")] = -20.0;
        assert_eq!(m.log_posterior(&theta).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn identification_at_first_cell() {
        // Dummy-coded structures: predictors at (1,1) equal the intercepts.
        let data = small_triangle();
        let spec = ModelSpec::new(Family::AlParametric).shape(ShapeStructure::AccidentYear);
        let m = Model::new(spec, &data, 0.01).unwrap();
        let names = m.param_names().to_vec();
        let mut theta = ParamVector::zeros(m.n_params());
        for (k, name) in names.iter().enumerate() {
            theta.values[k] = match name.as_str() {
                "alpha_0" => 1.25,
                "beta_0" => -0.5,
                "phi_0" => 0.6,
                _ => 0.371, // arbitrary nonzero noise in every dummy
            };
        }
        assert_relative_eq!(m.location_predictor(&theta, 1, 1).unwrap(), 1.25);
        assert_relative_eq!(
            m.scale_predictor(&theta, 1, 1).unwrap(),
            (-0.5_f64).exp(),
            epsilon = 1e-12
        );
        assert_relative_eq!(m.shape_predictor(&theta, 1).unwrap(), 0.6);
    }

    #[test]
    fn gb2_family_likelihood_finite_and_gamma_matches_gg() {
        let data = small_triangle();
        let gb2 = Model::new(ModelSpec::new(Family::Gb2), &data, 0.01).unwrap();
        let mut theta = ParamVector::zeros(gb2.n_params());
        let names = gb2.param_names().to_vec();
        let idx = |n: &str| names.iter().position(|x| x == n).unwrap();
        theta.values[idx("alpha_0")] = 2.0;
        theta.values[idx("a")] = 1.0;
        theta.values[idx("p")] = 2.0;
        theta.values[idx("q")] = 3.0;
        assert!(gb2.log_posterior(&theta).unwrap().is_finite());
        // Mean-link existence violation is a support rejection, not an error.
        theta.values[idx("q")] = 0.5; // q - 1/a <= 0
        assert_eq!(gb2.log_likelihood(&theta).unwrap(), f64::NEG_INFINITY);

        // Gamma family = GG with a pinned to 1.
        let gamma = Model::new(ModelSpec::new(Family::Gamma), &data, 0.01).unwrap();
        let gg = Model::new(ModelSpec::new(Family::Gg), &data, 0.01).unwrap();
        let mut th_gamma = ParamVector::zeros(gamma.n_params());
        let gnames = gamma.param_names().to_vec();
        let gidx = |n: &str| gnames.iter().position(|x| x == n).unwrap();
        th_gamma.values[gidx("alpha_0")] = 2.0;
        th_gamma.values[gidx("p")] = 1.7;
        let mut th_gg = ParamVector::zeros(gg.n_params());
        let ggnames = gg.param_names().to_vec();
        let ggidx = |n: &str| ggnames.iter().position(|x| x == n).unwrap();
        th_gg.values[ggidx("alpha_0")] = 2.0;
        th_gg.values[ggidx("a")] = 1.0;
        th_gg.values[ggidx("p")] = 1.7;
        assert_relative_eq!(
            gamma.log_likelihood(&th_gamma).unwrap(),
            gg.log_likelihood(&th_gg).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn empty_cell_set_posterior_reduces_to_prior() {
        let data = small_triangle();
        let m = al_m23(&data);
        let mut theta = ParamVector::zeros(m.n_params());
        theta.values[m.layout().index_of("p").unwrap()] = 0.5;
        let ctx = m.family_ctx(&theta).unwrap().unwrap();
        // Sum over an empty cell subset is zero, so posterior = prior.
        let no_cells: f64 = (0..0).map(|i| m.cell_loglik(&theta, &ctx, i).unwrap()).sum();
        assert_eq!(no_cells, 0.0);
    }
}
