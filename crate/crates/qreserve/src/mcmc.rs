//! Constrained block Metropolis-within-Gibbs sampling.
//!
//! The sweep is organized around *moves*: every coordinate gets a
//! componentwise Gaussian random-walk move (the "smaller moves in each
//! component" that keep constrained posteriors like the power-Pareto's
//! workable), and dummy-coded blocks additionally get rank-one ridge moves
//! that shift an intercept against its whole dummy block in one step.
//! Dummy-coded location/scale structures put the intercept on a long
//! posterior ridge with its dummies; a combined move changes only
//! reference-level residuals and traverses that ridge directly. All
//! proposals are symmetric Gaussians, so detailed balance is untouched.
//!
//! Each move carries its own proposal scale: scales come from the per-group
//! configuration, adapt by Robbins-Monro during burn-in toward an
//! acceptance rate in [0.2, 0.5], and freeze at the last in-band value when
//! burn-in ends so the post-burn-in chain is a valid Markov chain.
//!
//! Reproducibility contract: each chain owns a ChaCha12 stream seeded by
//! `seed` with the chain index as the stream id; identical inputs give
//! bit-identical chains, and extending the iteration count never changes
//! the draws already produced (prefix property).

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{BlockKind, FamilyCtx, Model, ParamVector};
use crate::select::percentile_type7;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Initial random-walk proposal scales per parameter group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitScales {
    pub location: f64,
    pub scale: f64,
    pub shape: f64,
    pub dist: f64,
}

impl Default for InitScales {
    fn default() -> Self {
        Self {
            location: 0.1,
            scale: 0.1,
            shape: 0.05,
            dist: 0.1,
        }
    }
}

/// Sampler configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub n_chains: usize,
    pub seed: u64,
    pub adapt_window: usize,
    pub init_scales: InitScales,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            iterations: 60_000,
            burn_in: 10_000,
            thin: 10,
            n_chains: 1,
            seed: 1,
            adapt_window: 50,
            init_scales: InitScales::default(),
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.burn_in >= self.iterations {
            return Err(Error::Config(format!(
                "burn-in {} must be < iterations {}",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thinning stride must be >= 1".into()));
        }
        if self.adapt_window == 0 {
            return Err(Error::Config("adaptation window must be >= 1".into()));
        }
        if self.n_chains == 0 {
            return Err(Error::Config("need at least one chain".into()));
        }
        let s = &self.init_scales;
        for (name, v) in [
            ("location", s.location),
            ("scale", s.scale),
            ("shape", s.shape),
            ("dist", s.dist),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!(
                    "initial proposal scale for {name} must be > 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Number of retained draws per chain.
    pub fn retained(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}

// ---------------------------------------------------------------------------
// Chain storage
// ---------------------------------------------------------------------------

/// One scale-adaptation event (burn-in only). `mv` indexes the sampler's
/// move list, not the parameter vector.
#[derive(Debug, Clone, Copy)]
pub struct AdaptEvent {
    pub iteration: usize,
    pub mv: usize,
    pub new_scale: f64,
}

/// Retained draws and sampling metadata for a single chain.
#[derive(Debug, Clone)]
pub struct Chain {
    pub param_names: Vec<String>,
    /// Retained draws, one row per retained iteration.
    pub draws: Vec<Vec<f64>>,
    /// Deviance -2 log f(y | theta) per retained draw.
    pub deviance: Vec<f64>,
    /// Global iteration number of each retained draw.
    pub iters: Vec<usize>,
    /// Post-burn-in acceptance rate per move block.
    pub block_acceptance: Vec<(String, f64)>,
    pub seed: u64,
    pub chain_index: u64,
    /// Proposal scales (one per move) at the burn-in freeze and at chain
    /// end (equal by construction; both kept so the freeze is checkable).
    pub scales_at_freeze: Vec<f64>,
    pub final_scales: Vec<f64>,
    pub adapt_events: Vec<AdaptEvent>,
}

impl Chain {
    pub fn n_retained(&self) -> usize {
        self.draws.len()
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.param_names.iter().position(|n| n == name)
    }

    /// Column of retained draws for one parameter.
    pub fn column(&self, idx: usize) -> Vec<f64> {
        self.draws.iter().map(|d| d[idx]).collect()
    }

    /// Serialize as CSV: `iter,<param names...>,deviance`, one row per
    /// retained draw, floats in shortest round-trip form.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("iter");
        for n in &self.param_names {
            out.push(',');
            out.push_str(n);
        }
        out.push_str(",deviance\n");
        for (r, draw) in self.draws.iter().enumerate() {
            let _ = write!(out, "{}", self.iters[r]);
            for v in draw {
                let _ = write!(out, ",{v}");
            }
            let _ = writeln!(out, ",{}", self.deviance[r]);
        }
        out
    }

    /// Parse a chain CSV produced by [`Chain::to_csv_string`]. Only draws,
    /// deviance and iteration numbers survive the round trip; sampler
    /// metadata (acceptance, scales) does not.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidData("empty chain CSV".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 2 || cols[0] != "iter" || cols[cols.len() - 1] != "deviance" {
            return Err(Error::InvalidData(
                "chain CSV header must be 'iter,<params...>,deviance'".into(),
            ));
        }
        let param_names: Vec<String> =
            cols[1..cols.len() - 1].iter().map(|s| s.to_string()).collect();
        let mut draws = Vec::new();
        let mut deviance = Vec::new();
        let mut iters = Vec::new();
        for (n, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != cols.len() {
                return Err(Error::InvalidData(format!(
                    "chain CSV row {} has {} fields, expected {}",
                    n + 2,
                    fields.len(),
                    cols.len()
                )));
            }
            let it: usize = fields[0]
                .parse()
                .map_err(|_| Error::InvalidData(format!("bad iteration '{}'", fields[0])))?;
            let mut row = Vec::with_capacity(param_names.len());
            for f in &fields[1..fields.len() - 1] {
                row.push(
                    f.parse::<f64>()
                        .map_err(|_| Error::InvalidData(format!("bad draw value '{f}'")))?,
                );
            }
            let dev: f64 = fields[fields.len() - 1].parse().map_err(|_| {
                Error::InvalidData(format!("bad deviance '{}'", fields[fields.len() - 1]))
            })?;
            iters.push(it);
            draws.push(row);
            deviance.push(dev);
        }
        Ok(Chain {
            param_names,
            draws,
            deviance,
            iters,
            block_acceptance: Vec::new(),
            seed: 0,
            chain_index: 0,
            scales_at_freeze: Vec::new(),
            final_scales: Vec::new(),
            adapt_events: Vec::new(),
        })
    }
}

// ---------------------------------------------------------------------------
// Moves and the evaluator abstraction
// ---------------------------------------------------------------------------

/// One proposal direction: theta[coord] += weight * step for each entry.
#[derive(Debug, Clone)]
pub(crate) struct Move {
    /// Label for acceptance reporting (block or ridge name).
    pub label: String,
    /// Direction as (coordinate, weight) pairs.
    pub dir: Vec<(usize, f64)>,
    pub init_scale: f64,
}

/// What a Metropolis sweep needs from a posterior. The model-backed
/// implementation does incremental updates; test targets may recompute in
/// full.
pub(crate) trait Evaluator {
    fn theta(&self) -> &[f64];
    /// Log-posterior delta for moving along `dir` by `step`. `None` encodes
    /// a -inf (support-violating) proposal. The proposal stays pending
    /// until `commit` or `rollback`.
    fn propose(&mut self, dir: &[(usize, f64)], step: f64) -> Result<Option<f64>>;
    fn commit(&mut self);
    fn rollback(&mut self);
    /// Deviance of the current state.
    fn deviance(&self) -> f64;
}

/// Incremental evaluator over a bound [`Model`].
///
/// Per-cell log-likelihood terms and per-coordinate prior terms are cached;
/// a proposal recomputes only the cells its coordinates touch, so a sweep
/// over dummy-coded blocks costs O(cells) rather than O(cells x coords).
pub(crate) struct ModelEvaluator<'a> {
    model: &'a Model,
    theta: ParamVector,
    ctx: FamilyCtx,
    cell_ll: Vec<f64>,
    prior_terms: Vec<f64>,
    // scratch for deduplicating touched cells across a move's coordinates
    cell_epoch: Vec<u64>,
    epoch: u64,
    // pending proposal
    pending_coords: Vec<(usize, f64, f64)>, // (coord, old value, new prior)
    pending_cells: Vec<(usize, f64)>,       // (cell idx, new loglik)
    pending_ctx: Option<FamilyCtx>,
    pending: bool,
}

impl<'a> ModelEvaluator<'a> {
    pub(crate) fn new(model: &'a Model, init: ParamVector) -> Result<Self> {
        if init.len() != model.n_params() {
            return Err(Error::Parameter(format!(
                "init has {} coordinates, model needs {}",
                init.len(),
                model.n_params()
            )));
        }
        let ctx = model.family_ctx(&init)?.ok_or_else(|| {
            Error::Parameter("initial parameter vector violates the posterior support".into())
        })?;
        let n_cells = model.upper_cells().len();
        let mut cell_ll = Vec::with_capacity(n_cells);
        for idx in 0..n_cells {
            let ll = model.cell_loglik(&init, &ctx, idx)?;
            if !ll.is_finite() {
                return Err(Error::Parameter(format!(
                    "initial parameter vector has non-finite log-likelihood at cell {:?}",
                    model.upper_cells()[idx]
                )));
            }
            cell_ll.push(ll);
        }
        let prior_terms: Vec<f64> = (0..init.len())
            .map(|k| model.prior_term(k, init.values[k]))
            .collect();
        if prior_terms.iter().any(|t| !t.is_finite()) {
            return Err(Error::Parameter(
                "initial parameter vector is outside the prior support".into(),
            ));
        }
        Ok(Self {
            model,
            theta: init,
            ctx,
            cell_ll,
            prior_terms,
            cell_epoch: vec![0; n_cells],
            epoch: 0,
            pending_coords: Vec::new(),
            pending_cells: Vec::new(),
            pending_ctx: None,
            pending: false,
        })
    }

    fn coord_changes_ctx(&self, k: usize) -> bool {
        let block = self
            .model
            .layout()
            .blocks()
            .iter()
            .find(|b| b.range().contains(&k))
            .expect("coordinate inside layout");
        matches!(
            block.kind,
            BlockKind::ShapeIntercept | BlockKind::ShapeAccident | BlockKind::DistShape
        )
    }

    fn revert_pending_theta(&mut self) {
        for &(k, old, _) in &self.pending_coords {
            self.theta.values[k] = old;
        }
        self.pending_coords.clear();
        self.pending = false;
    }

    #[cfg(test)]
    pub(crate) fn theta_vec(&self) -> &ParamVector {
        &self.theta
    }

    /// Current log-likelihood (fresh fold over the per-cell cache).
    pub(crate) fn log_likelihood(&self) -> f64 {
        self.cell_ll.iter().sum()
    }

    pub(crate) fn log_posterior(&self) -> f64 {
        self.log_likelihood() + self.prior_terms.iter().sum::<f64>()
    }
}

impl Evaluator for ModelEvaluator<'_> {
    fn theta(&self) -> &[f64] {
        &self.theta.values
    }

    fn propose(&mut self, dir: &[(usize, f64)], step: f64) -> Result<Option<f64>> {
        debug_assert!(!self.pending);
        self.pending_coords.clear();
        self.pending = true;
        let mut delta = 0.0;
        let mut ctx_changed = false;
        for &(k, w) in dir {
            let old = self.theta.values[k];
            let new = old + w * step;
            let new_prior = self.model.prior_term(k, new);
            if new_prior == f64::NEG_INFINITY {
                self.revert_pending_theta();
                return Ok(None);
            }
            delta += new_prior - self.prior_terms[k];
            self.theta.values[k] = new;
            self.pending_coords.push((k, old, new_prior));
            ctx_changed |= self.coord_changes_ctx(k);
        }
        let ctx_for_eval: FamilyCtx;
        let new_ctx = if ctx_changed {
            match self.model.family_ctx(&self.theta) {
                Ok(Some(c)) => {
                    ctx_for_eval = c.clone();
                    Some(c)
                }
                Ok(None) => {
                    self.revert_pending_theta();
                    return Ok(None);
                }
                Err(e) => {
                    self.revert_pending_theta();
                    return Err(e);
                }
            }
        } else {
            ctx_for_eval = self.ctx.clone();
            None
        };
        self.pending_cells.clear();
        self.epoch += 1;
        for &(k, _) in dir {
            for &idx in self.model.touched_cells(k) {
                if self.cell_epoch[idx] == self.epoch {
                    continue;
                }
                self.cell_epoch[idx] = self.epoch;
                let ll = match self.model.cell_loglik(&self.theta, &ctx_for_eval, idx) {
                    Ok(ll) => ll,
                    Err(e) => {
                        self.revert_pending_theta();
                        return Err(e);
                    }
                };
                if ll == f64::NEG_INFINITY {
                    self.revert_pending_theta();
                    return Ok(None);
                }
                delta += ll - self.cell_ll[idx];
                self.pending_cells.push((idx, ll));
            }
        }
        self.pending_ctx = new_ctx;
        Ok(Some(delta))
    }

    fn commit(&mut self) {
        debug_assert!(self.pending);
        for &(idx, ll) in &self.pending_cells {
            self.cell_ll[idx] = ll;
        }
        if let Some(ctx) = self.pending_ctx.take() {
            self.ctx = ctx;
        }
        for &(k, _, new_prior) in &self.pending_coords {
            self.prior_terms[k] = new_prior;
        }
        self.pending_coords.clear();
        self.pending = false;
    }

    fn rollback(&mut self) {
        debug_assert!(self.pending);
        self.pending_ctx = None;
        self.revert_pending_theta();
    }

    fn deviance(&self) -> f64 {
        -2.0 * self.log_likelihood()
    }
}

// ---------------------------------------------------------------------------
// The sweep kernel
// ---------------------------------------------------------------------------

pub(crate) struct KernelOutput {
    pub draws: Vec<Vec<f64>>,
    pub deviance: Vec<f64>,
    pub iters: Vec<usize>,
    pub block_acceptance: Vec<(String, f64)>,
    pub scales_at_freeze: Vec<f64>,
    pub final_scales: Vec<f64>,
    pub adapt_events: Vec<AdaptEvent>,
}

const ACCEPT_LOW: f64 = 0.2;
const ACCEPT_HIGH: f64 = 0.5;

pub(crate) fn run_kernel(
    eval: &mut dyn Evaluator,
    moves: &[Move],
    cfg: &ChainConfig,
    rng: &mut ChaCha12Rng,
) -> Result<KernelOutput> {
    let n_moves = moves.len();
    let mut scales: Vec<f64> = moves.iter().map(|m| m.init_scale).collect();
    // Scale at the most recent burn-in window whose acceptance landed in
    // the target band. Degenerate-scale excursions (single-observation
    // variance levels can transiently pin the location block late in
    // burn-in) would otherwise freeze a useless step size.
    let mut calm_scales = scales.clone();
    let mut window_prop = vec![0usize; n_moves];
    let mut window_acc = vec![0usize; n_moves];
    let mut windows_done = vec![0usize; n_moves];
    let mut post_prop = vec![0usize; n_moves];
    let mut post_acc = vec![0usize; n_moves];
    let mut adapt_events = Vec::new();
    let mut scales_at_freeze = Vec::new();

    let retained = cfg.retained();
    let mut draws = Vec::with_capacity(retained);
    let mut deviance = Vec::with_capacity(retained);
    let mut iters = Vec::with_capacity(retained);

    for t in 1..=cfg.iterations {
        let in_burn = t <= cfg.burn_in;
        for (m, mv) in moves.iter().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            let step = scales[m] * z;
            let delta = eval.propose(&mv.dir, step).map_err(|e| {
                Error::Convergence(format!("iteration {t}, move {}: {e}", mv.label))
            })?;
            let accept = match delta {
                None => false,
                Some(d) => {
                    if d >= 0.0 {
                        true
                    } else {
                        let u: f64 = rng.random();
                        u.ln() < d
                    }
                }
            };
            if accept {
                if delta.is_some() {
                    eval.commit();
                }
            } else if delta.is_some() {
                eval.rollback();
            }
            if in_burn {
                window_prop[m] += 1;
                if accept {
                    window_acc[m] += 1;
                }
                if window_prop[m] == cfg.adapt_window {
                    windows_done[m] += 1;
                    let rate = window_acc[m] as f64 / window_prop[m] as f64;
                    // Decaying step with a floor: early windows chase the
                    // burn-in transient and a floored step keeps enough
                    // authority to re-equilibrate afterwards.
                    let step = (1.0 / (windows_done[m] as f64).sqrt()).clamp(0.05, 0.25);
                    let mut ln_s = scales[m].ln();
                    if rate < ACCEPT_LOW {
                        ln_s -= step;
                    } else if rate > ACCEPT_HIGH {
                        ln_s += step;
                    } else {
                        calm_scales[m] = scales[m];
                    }
                    ln_s = ln_s.clamp(-20.0, 20.0);
                    let new_scale = ln_s.exp();
                    if new_scale != scales[m] {
                        scales[m] = new_scale;
                        adapt_events.push(AdaptEvent {
                            iteration: t,
                            mv: m,
                            new_scale,
                        });
                    }
                    window_prop[m] = 0;
                    window_acc[m] = 0;
                }
            } else {
                post_prop[m] += 1;
                if accept {
                    post_acc[m] += 1;
                }
            }
        }
        if t == cfg.burn_in {
            // Freeze every move at its last in-band scale.
            scales = calm_scales.clone();
            scales_at_freeze = scales.clone();
        }
        if t > cfg.burn_in && (t - cfg.burn_in).is_multiple_of(cfg.thin) && draws.len() < retained {
            draws.push(eval.theta().to_vec());
            deviance.push(eval.deviance());
            iters.push(t);
        }
    }
    if scales_at_freeze.is_empty() {
        scales_at_freeze = scales.clone();
    }

    // Pool post-burn-in acceptance over moves sharing a label.
    let mut block_acceptance: Vec<(String, usize, usize)> = Vec::new();
    for (m, mv) in moves.iter().enumerate() {
        match block_acceptance.iter_mut().find(|(l, _, _)| *l == mv.label) {
            Some((_, acc, prop)) => {
                *acc += post_acc[m];
                *prop += post_prop[m];
            }
            None => block_acceptance.push((mv.label.clone(), post_acc[m], post_prop[m])),
        }
    }
    let block_acceptance = block_acceptance
        .into_iter()
        .map(|(l, acc, prop)| (l, if prop > 0 { acc as f64 / prop as f64 } else { 0.0 }))
        .collect();

    Ok(KernelOutput {
        draws,
        deviance,
        iters,
        block_acceptance,
        scales_at_freeze,
        final_scales: scales,
        adapt_events,
    })
}

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

/// Componentwise moves for every coordinate plus intercept-vs-dummy-block
/// ridge moves for the dummy-coded structures.
fn model_moves(model: &Model, scales: &InitScales) -> Vec<Move> {
    let layout = model.layout();
    let group_scale = |kind: BlockKind| match kind {
        BlockKind::LocIntercept
        | BlockKind::LocCovariates
        | BlockKind::LocAccident
        | BlockKind::LocDevelopment => scales.location,
        BlockKind::ScaleIntercept | BlockKind::ScaleAccident | BlockKind::ScaleDevelopment => {
            scales.scale
        }
        BlockKind::ShapeIntercept | BlockKind::ShapeAccident => scales.shape,
        BlockKind::DistShape => scales.dist,
    };
    let mut moves = Vec::new();
    for block in layout.blocks() {
        for k in block.range() {
            moves.push(Move {
                label: block.kind.group_name().to_string(),
                dir: vec![(k, 1.0)],
                init_scale: group_scale(block.kind),
            });
        }
    }
    // Ridge moves: intercept up, whole dummy block down. Only the dummy
    // reference level's residuals change, so these traverse the
    // intercept/dummy ridge directly.
    let mut ridge = |intercept: BlockKind, dummies: BlockKind, label: &str, s: f64| {
        if let (Some(b0), Some(bd)) = (layout.block(intercept), layout.block(dummies)) {
            let mut dir = vec![(b0.offset, 1.0)];
            dir.extend(bd.range().map(|k| (k, -1.0)));
            moves.push(Move {
                label: label.to_string(),
                dir,
                init_scale: s,
            });
        }
    };
    ridge(
        BlockKind::LocIntercept,
        BlockKind::LocAccident,
        "loc_ridge_accident",
        scales.location,
    );
    ridge(
        BlockKind::LocIntercept,
        BlockKind::LocDevelopment,
        "loc_ridge_development",
        scales.location,
    );
    ridge(
        BlockKind::ScaleIntercept,
        BlockKind::ScaleAccident,
        "scale_ridge_accident",
        scales.scale,
    );
    ridge(
        BlockKind::ScaleIntercept,
        BlockKind::ScaleDevelopment,
        "scale_ridge_development",
        scales.scale,
    );
    ridge(
        BlockKind::ShapeIntercept,
        BlockKind::ShapeAccident,
        "shape_ridge_accident",
        scales.shape,
    );
    moves
}

/// Run a single chain from `init`.
pub fn run_chain(
    model: &Model,
    cfg: &ChainConfig,
    init: &ParamVector,
    chain_index: u64,
) -> Result<Chain> {
    cfg.validate()?;
    let mut eval = ModelEvaluator::new(model, init.clone())?;
    if !eval.log_posterior().is_finite() {
        return Err(Error::Parameter(
            "initial parameter vector has non-finite log-posterior".into(),
        ));
    }
    let moves = model_moves(model, &cfg.init_scales);
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    rng.set_stream(chain_index);
    let out = run_kernel(&mut eval, &moves, cfg, &mut rng)?;
    Ok(Chain {
        param_names: model.param_names().to_vec(),
        draws: out.draws,
        deviance: out.deviance,
        iters: out.iters,
        block_acceptance: out.block_acceptance,
        seed: cfg.seed,
        chain_index,
        scales_at_freeze: out.scales_at_freeze,
        final_scales: out.final_scales,
        adapt_events: out.adapt_events,
    })
}

/// Run `cfg.n_chains` independent chains (streams `0..n_chains`).
pub fn run_chains(model: &Model, cfg: &ChainConfig, init: &ParamVector) -> Result<Vec<Chain>> {
    (0..cfg.n_chains as u64)
        .map(|idx| run_chain(model, cfg, init, idx))
        .collect()
}

/// Default initial parameter vector: intercept at the data median, skew at
/// 1/2 (or the fixed level), scale intercept at the log data variance, and
/// a power-Pareto location intercept one sample standard deviation below
/// the minimum so the support constraints hold by construction.
pub fn init_params(model: &Model) -> ParamVector {
    let ystar = model.ystar();
    let mut sorted = ystar.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = percentile_type7(&sorted, 0.5);
    let n = ystar.len() as f64;
    let mean = ystar.iter().sum::<f64>() / n;
    let var = if ystar.len() > 1 {
        ystar.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    // Degenerate data: fall back to unit scales.
    let var = if var > 0.0 && var.is_finite() { var } else { 1.0 };
    let sd = var.sqrt();

    let mut theta = ParamVector::zeros(model.n_params());
    let layout = model.layout();
    let set = |theta: &mut ParamVector, name: &str, v: f64| {
        if let Some(idx) = layout.index_of(name) {
            theta.values[idx] = v;
        }
    };
    use crate::model::Family;
    match model.spec().family {
        Family::PowerPareto => set(&mut theta, "alpha_0", sorted[0] - sd),
        _ => set(&mut theta, "alpha_0", median),
    }
    set(&mut theta, "beta_0", var.ln());
    set(&mut theta, "phi_0", 0.5);
    match model.spec().family {
        Family::AlParametric => set(&mut theta, "p", 0.5),
        Family::PowerPareto => {
            set(&mut theta, "gamma_1", 0.5);
            set(&mut theta, "gamma_2", 0.5);
        }
        Family::Gb2 => {
            set(&mut theta, "a", 1.0);
            set(&mut theta, "p", 1.0);
            set(&mut theta, "q", 2.0);
        }
        Family::Gg => {
            set(&mut theta, "a", 1.0);
            set(&mut theta, "p", 1.0);
        }
        Family::Gamma => set(&mut theta, "p", 1.0),
        Family::AlNonparametric => {}
    }
    theta
}

// ---------------------------------------------------------------------------
// Posterior summaries and diagnostics
// ---------------------------------------------------------------------------

/// Posterior summary of one parameter.
#[derive(Debug, Clone)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Posterior means, sds and equal-tailed 95% intervals plus sampler
/// diagnostics.
#[derive(Debug, Clone)]
pub struct PosteriorSummary {
    pub params: Vec<ParamSummary>,
    pub retained: usize,
    pub block_acceptance: Vec<(String, f64)>,
}

impl PosteriorSummary {
    pub fn param(&self, name: &str) -> Option<&ParamSummary> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Posterior-mean parameter vector in layout order.
    pub fn mean_vector(&self) -> ParamVector {
        ParamVector {
            values: self.params.iter().map(|p| p.mean).collect(),
        }
    }
}

/// Summarize a chain: per-parameter posterior mean, sd and equal-tailed 95%
/// credible interval.
pub fn summarize(chain: &Chain) -> Result<PosteriorSummary> {
    let n = chain.n_retained();
    if n == 0 {
        return Err(Error::InvalidData("cannot summarize an empty chain".into()));
    }
    let mut params = Vec::with_capacity(chain.param_names.len());
    for (k, name) in chain.param_names.iter().enumerate() {
        let col = chain.column(k);
        let mean = col.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt()
        } else {
            0.0
        };
        let mut sorted = col;
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        params.push(ParamSummary {
            name: name.clone(),
            mean,
            sd,
            ci_lo: percentile_type7(&sorted, 0.025),
            ci_hi: percentile_type7(&sorted, 0.975),
        });
    }
    Ok(PosteriorSummary {
        params,
        retained: n,
        block_acceptance: chain.block_acceptance.clone(),
    })
}

/// Sample autocorrelation function of one parameter's retained draws,
/// lags 0..=max_lag (lag 0 is 1 by construction).
pub fn acf(chain: &Chain, param: usize, max_lag: usize) -> Result<Vec<f64>> {
    let x = chain.column(param);
    let n = x.len();
    if max_lag >= n {
        return Err(Error::InvalidData(format!(
            "max_lag {max_lag} must be < retained draws {n}"
        )));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let denom: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    if denom == 0.0 {
        return Err(Error::InvalidData(
            "ACF undefined for a constant series".into(),
        ));
    }
    let mut out = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        let num: f64 = (0..n - lag)
            .map(|t| (x[t] - mean) * (x[t + lag] - mean))
            .sum();
        out.push(num / denom);
    }
    Ok(out)
}
