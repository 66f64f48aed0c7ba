//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line (run with `--nocapture` to see the lines for passing criteria).
//!
//! Every tolerance is pinned in code next to the check it gates. Oracles
//! (quadrature, brute-force optimization, Monte Carlo references) are
//! implemented here, independent of the library paths they verify.

use qreserve::dists::{
    al_cdf, al_inv_cdf, al_logpdf, gb2_cdf, gb2_logpdf, gb2_quantile, gg_cdf, gg_logpdf,
    gg_quantile, pinball_loss, pp_logpdf, pp_quantile, pp_solve_u, AlParams, Gb2Params, GgParams,
};
use qreserve::mcmc::{init_params, run_chain, summarize, ChainConfig, PosteriorSummary};
use qreserve::model::{
    Family, LocationStructure, Model, ModelSpec, ParamVector, ScaleStructure, ShapeStructure,
};
use qreserve::risk::{
    heavy_tail_quantile_approx, margin_profile, total_reserve_quantile_comonotonic,
    total_reserve_quantile_mc, McMode,
};
use qreserve::simulate::simulate_triangle;
use qreserve::triangle::{build_index_sets, Triangle};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

// ---------------------------------------------------------------------------
// Shared oracle helpers
// ---------------------------------------------------------------------------

/// Recursive adaptive Simpson quadrature (oracle side).
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, m: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, m: f64, b: f64, whole: f64, tol: f64, depth: usize) -> f64 {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let left = simpson(f, a, lm, m);
        let right = simpson(f, m, rm, b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, lm, m, left, tol / 2.0, depth - 1)
                + rec(f, m, rm, b, right, tol / 2.0, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    rec(f, a, m, b, simpson(f, a, m, b), tol, depth)
}

/// Golden-section minimizer of a unimodal function on [a, b].
fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Placeholder-bound model (layout access for building named parameter
/// vectors without data).
fn placeholder_model(spec: &ModelSpec, i_count: usize) -> Model {
    let (upper, _) = build_index_sets(i_count).unwrap();
    let ones: Vec<(usize, usize, f64)> = upper.iter().map(|&(i, j)| (i, j, 1.0)).collect();
    Model::new(spec.clone(), &Triangle::from_cells(i_count, &ones).unwrap(), 0.01).unwrap()
}

fn theta_from_pairs(model: &Model, pairs: &[(String, f64)]) -> ParamVector {
    let mut theta = ParamVector::zeros(model.n_params());
    for (name, v) in pairs {
        let idx = model
            .layout()
            .index_of(name)
            .unwrap_or_else(|| panic!("unknown parameter {name}"));
        theta.values[idx] = *v;
    }
    theta
}

// ---------------------------------------------------------------------------
// Criterion 1 — DIC arithmetic reproduction
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_dic_arithmetic_reproduction() {
    // (label, printed DIC, printed Dbar, printed Dhat) from the published
    // model-comparison tables this engine is benchmarked against.
    let rows: &[(&str, f64, f64, f64)] = &[
        // AL structure comparison, constant variance.
        ("al M00", 195.41, 255.21, 315.02),
        ("al M10", 223.30, 284.10, 344.91),
        ("al M20", 50.94, 120.17, 189.40),
        // AL structure comparison, dynamic variance.
        ("al M03", 272.82, 334.74, 396.66),
        ("al M13", 199.14, 247.49, 295.85),
        ("al M23", -20.81, 24.91, 70.63),
        // Nonparametric rows at fixed levels.
        ("np M30 p=0.30", 55.94, 125.61, 195.28),
        ("np M30 p=0.50", 73.10, 152.26, 231.43),
        ("np M30 p=0.75", 55.26, 132.56, 209.87),
        ("np M30 p=0.95", 44.86, 116.38, 187.91),
        ("np M33 p=0.30", -37.06, 38.34, 113.74),
        ("np M33 p=0.50", -38.80, 35.51, 109.82),
        ("np M33 p=0.75", -17.33, 53.40, 124.12),
        ("np M33 p=0.95", -64.26, 3.68, 71.62),
        // AL variance-structure table.
        ("al M21", -4.32, 56.66, 117.64),
        ("al M22", 6.63, 54.29, 101.95),
        // Distribution comparison.
        ("gamma M2.", 3064.50, 3028.93, 2993.36),
        ("gg M2.", 2707.42, 2932.97, 3158.52),
        ("gb2 M2.", 3002.82, 2964.60, 2926.37),
        ("pp M10", 3272.14, 1021.71, 1230.01),
        ("pp M13", 1502.19, 1906.49, 2310.98),
        // Payment-data shape-model table.
        ("qld M20", -322.55, -215.65, -108.75),
        ("qld M23", -311.36, -197.71, -84.06),
        ("qld M23'", -255.03, -229.46, -203.90),
    ];
    let mut bad = Vec::new();
    for &(label, dic, d_bar, d_hat) in rows {
        let implied = 2.0 * d_bar - d_hat;
        let resid = (implied - dic).abs();
        println!(
            "  {label}: printed DIC {dic}, 2*Dbar - Dhat = {implied:.2}, |resid| = {resid:.2}"
        );
        if resid > 0.02 {
            bad.push(format!(
                "{label}: printed {dic} vs implied {implied:.2} (resid {resid:.2})"
            ));
        }
    }
    println!(
        "criterion 1 (DIC arithmetic reproduction): {}",
        if bad.is_empty() { "PASS" } else { "FAIL" }
    );
    assert!(
        bad.is_empty(),
        "rows violating DIC = 2*Dbar - Dhat within 0.02 (inconsistent as printed in the \
         source tables): {bad:?}"
    );
}

// ---------------------------------------------------------------------------
// Criterion 2 — quantile/cdf round trips
// ---------------------------------------------------------------------------

#[test]
fn criterion_02_quantile_cdf_round_trips() {
    let tol = 1e-9;
    let grid: Vec<f64> = (1..1000).map(|k| k as f64 / 1000.0).collect();

    for &(mu, sigma, p) in &[(0.0, 1.0, 0.5), (1.5, 2.0, 0.3), (-1.0, 0.7, 0.9)] {
        let th = AlParams::new(mu, sigma, p).unwrap();
        for &u in &grid {
            let y = al_inv_cdf(u, &th).unwrap();
            let back = al_cdf(y, &th).unwrap();
            assert!((back - u).abs() < tol, "AL({mu},{sigma},{p}) u={u}: {back}");
        }
    }
    for &(mu, sigma, g1, g2) in &[
        (0.0, 1.0, 1.0, 1.0),
        (0.5, 2.0, 2.0, 0.5),
        (-1.0, 0.5, 0.5, 2.0),
    ] {
        for &u in &grid {
            let y = mu + pp_quantile(u, g1, g2).unwrap() * sigma;
            let back = pp_solve_u(y, mu, sigma, g1, g2).unwrap();
            assert!((back - u).abs() < tol, "PP({g1},{g2}) u={u}: {back}");
        }
    }
    for &(a, b, p, q) in &[
        (1.0, 1.0, 1.0, 1.0),
        (2.0, 3.0, 2.0, 2.0),
        (-2.0, 1.0, 2.0, 3.0),
        (-7.94, 1.0, 1.78, 0.17),
    ] {
        let th = Gb2Params::new(a, b, p, q).unwrap();
        for &u in &grid {
            let y = gb2_quantile(u, &th).unwrap();
            let back = gb2_cdf(y, &th).unwrap();
            assert!((back - u).abs() < tol, "GB2({a},{b},{p},{q}) u={u}: {back}");
        }
    }
    for &(a, b, p) in &[
        (1.0, 1.0, 2.0),
        (2.0, 1.3, 1.5),
        (-1.5, 2.0, 2.5),
        (33.22, 1.0, 0.08),
    ] {
        let th = GgParams::new(a, b, p).unwrap();
        for &u in &grid {
            let y = gg_quantile(u, &th).unwrap();
            let back = gg_cdf(y, &th).unwrap();
            assert!((back - u).abs() < tol, "GG({a},{b},{p}) u={u}: {back}");
        }
    }
    // Gamma is GG with a = 1; exercised at its own settings.
    for &(p, mean) in &[(1.0, 1.0), (1.87, 2.5), (5.0, 0.4)] {
        let th = GgParams::from_mean(mean, 1.0, p).unwrap();
        for &u in &grid {
            let y = gg_quantile(u, &th).unwrap();
            let back = gg_cdf(y, &th).unwrap();
            assert!((back - u).abs() < tol, "Gamma({p},{mean}) u={u}: {back}");
        }
    }
    println!("criterion 2 (quantile/cdf round trips): PASS");
}

// ---------------------------------------------------------------------------
// Criterion 3 — density normalization
// ---------------------------------------------------------------------------

#[test]
fn criterion_03_density_normalization() {
    let tol = 1e-6;
    let tail = 1e-9; // truncated mass per side

    // Positive-support (and power-tailed) densities integrate on the log
    // scale: with y = e^t the integral becomes
    // int f(e^t) e^t dt, turning power-law tails spanning many decades
    // into exponential decay that adaptive Simpson resolves cheaply.
    let integrate_log_scale = |f: &dyn Fn(f64) -> f64, lo: f64, hi: f64| {
        let g = |t: f64| {
            let y = t.exp();
            f(y) * y
        };
        adaptive_simpson(&g, lo.ln(), hi.ln(), 1e-9, 60)
    };

    for &(mu, sigma, p) in &[(0.0, 1.0, 0.5), (1.5, 2.0, 0.3), (-1.0, 0.7, 0.9)] {
        let th = AlParams::new(mu, sigma, p).unwrap();
        let lo = al_inv_cdf(tail, &th).unwrap();
        let hi = al_inv_cdf(1.0 - tail, &th).unwrap();
        let f = |y: f64| al_logpdf(y, &th).unwrap().exp();
        let integral = adaptive_simpson(&f, lo, hi, 1e-9, 60);
        assert!((integral - 1.0).abs() < tol, "AL({mu},{sigma},{p}): {integral}");
    }
    for &(g1, g2) in &[(1.0, 1.0), (2.0, 0.5), (0.5, 2.0)] {
        // The density is shift-invariant in mu (it only sees y - mu), so
        // normalization is checked on the standardized support z > 0.
        let sigma = 1.2;
        let lo = pp_quantile(tail, g1, g2).unwrap() * sigma;
        let hi = pp_quantile(1.0 - tail, g1, g2).unwrap() * sigma;
        let f = |z: f64| pp_logpdf(z, 0.0, sigma, g1, g2).unwrap().exp();
        let integral = integrate_log_scale(&f, lo, hi);
        assert!((integral - 1.0).abs() < tol, "PP({g1},{g2}): {integral}");
    }
    for &(a, b, p, q) in &[(1.0, 1.0, 1.0, 1.0), (2.0, 3.0, 2.0, 2.0), (-2.0, 1.0, 2.0, 3.0)] {
        let th = Gb2Params::new(a, b, p, q).unwrap();
        let lo = gb2_quantile(tail, &th).unwrap();
        let hi = gb2_quantile(1.0 - tail, &th).unwrap();
        let f = |y: f64| gb2_logpdf(y, &th).unwrap().exp();
        let integral = integrate_log_scale(&f, lo, hi);
        assert!((integral - 1.0).abs() < tol, "GB2({a},{b},{p},{q}): {integral}");
    }
    for &(a, b, p) in &[(1.0, 1.0, 2.0), (2.0, 1.3, 1.5), (-1.5, 2.0, 2.5)] {
        let th = GgParams::new(a, b, p).unwrap();
        let lo = gg_quantile(tail, &th).unwrap();
        let hi = gg_quantile(1.0 - tail, &th).unwrap();
        let f = |y: f64| gg_logpdf(y, &th).unwrap().exp();
        let integral = integrate_log_scale(&f, lo, hi);
        assert!((integral - 1.0).abs() < tol, "GG({a},{b},{p}): {integral}");
    }
    for &(p, mean) in &[(1.0, 1.0), (1.87, 2.5), (5.0, 0.4)] {
        let th = GgParams::from_mean(mean, 1.0, p).unwrap();
        let lo = gg_quantile(tail, &th).unwrap();
        let hi = gg_quantile(1.0 - tail, &th).unwrap();
        let f = |y: f64| gg_logpdf(y, &th).unwrap().exp();
        let integral = integrate_log_scale(&f, lo, hi);
        assert!((integral - 1.0).abs() < tol, "Gamma({p},{mean}): {integral}");
    }
    println!("criterion 3 (density normalization): PASS");
}

// ---------------------------------------------------------------------------
// Criterion 4 — pinball / AL-likelihood equivalence
// ---------------------------------------------------------------------------

#[test]
fn criterion_04_pinball_al_equivalence() {
    let tol = 1e-5;
    let mut rng = ChaCha12Rng::seed_from_u64(2024);
    for trial in 0..50 {
        // A mildly skewed continuous sample of size 50.
        let sample: Vec<f64> = (0..50)
            .map(|_| {
                let z: f64 = rng.random::<f64>();
                4.0 * z * z - 1.0 + rng.random::<f64>()
            })
            .collect();
        let mut sorted = sample.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (lo, hi) = (sorted[0] - 1.0, sorted[49] + 1.0);
        for &u in &[0.3, 0.5, 0.75, 0.95] {
            // Implementation side: maximize the AL log-likelihood over a
            // constant location at fixed sigma and p = u.
            let sigma = 1.3;
            let neg_loglik = |m: f64| {
                -sample
                    .iter()
                    .map(|&y| {
                        al_logpdf(y, &AlParams::new(m, sigma, u).unwrap()).unwrap()
                    })
                    .sum::<f64>()
            };
            let mle = golden_min(&neg_loglik, lo, hi, 1e-10);

            // Oracle side: the pinball argmin set from the order statistics
            // (an interval when n*u is an integer, else a single point).
            let nu = 50.0 * u;
            let (set_lo, set_hi) = if (nu - nu.round()).abs() < 1e-12 {
                let k = nu.round() as usize;
                (sorted[k - 1], sorted[k])
            } else {
                let k = nu.ceil() as usize;
                (sorted[k - 1], sorted[k - 1])
            };
            let dist = if mle < set_lo {
                set_lo - mle
            } else if mle > set_hi {
                mle - set_hi
            } else {
                0.0
            };
            assert!(
                dist <= tol,
                "trial {trial}, u={u}: MLE {mle} vs argmin set [{set_lo}, {set_hi}]"
            );
            // Cross-check that the pinball loss at the MLE matches the loss
            // at the set minimum (slope near a kink is at most n, so a 1e-5
            // location gap can cost up to ~5e-4 in loss).
            let loss_at = |m: f64| {
                let res: Vec<f64> = sample.iter().map(|y| y - m).collect();
                pinball_loss(&res, u).unwrap()
            };
            assert!(loss_at(mle) <= loss_at(set_lo) + 1e-3);
        }
    }
    println!("criterion 4 (pinball/AL equivalence): PASS");
}

// ---------------------------------------------------------------------------
// Criterion 5 — simulation-based parameter recovery
// ---------------------------------------------------------------------------

struct Recovery {
    names: Vec<String>,
    theta0: Vec<f64>,
    summaries: Vec<PosteriorSummary>,
}

fn run_recovery(
    spec: &ModelSpec,
    theta0_pairs: &[(String, f64)],
    n_runs: usize,
    data_seed_base: u64,
) -> Recovery {
    let i_count = 10;
    let layout_model = placeholder_model(spec, i_count);
    let theta0 = theta_from_pairs(&layout_model, theta0_pairs);
    let names = layout_model.param_names().to_vec();
    let mut summaries = Vec::with_capacity(n_runs);
    for k in 0..n_runs {
        let sim = simulate_triangle(spec, &theta0, i_count, data_seed_base + k as u64).unwrap();
        let model = Model::new(spec.clone(), &sim.upper, 0.01).unwrap();
        let cfg = ChainConfig {
            seed: k as u64,
            ..ChainConfig::default()
        };
        let chain = run_chain(&model, &cfg, &init_params(&model), 0).unwrap();
        summaries.push(summarize(&chain).unwrap());
    }
    Recovery {
        names,
        theta0: theta0.values,
        summaries,
    }
}

fn check_recovery(label: &str, rec: &Recovery) {
    // Canonical run: every coefficient's posterior mean within 3 posterior
    // sds of the truth.
    let canonical = &rec.summaries[0];
    for (k, name) in rec.names.iter().enumerate() {
        let p = &canonical.params[k];
        let gap = (p.mean - rec.theta0[k]).abs();
        assert!(
            gap <= 3.0 * p.sd,
            "{label}: {name} mean {} vs true {} exceeds 3 sd ({})",
            p.mean,
            rec.theta0[k],
            p.sd
        );
    }
    // Coverage: equal-tailed 95% intervals cover the truth in >= 16 of the
    // runs, for every parameter.
    let n_runs = rec.summaries.len();
    for (k, name) in rec.names.iter().enumerate() {
        let covered = rec
            .summaries
            .iter()
            .filter(|s| {
                let p = &s.params[k];
                p.ci_lo <= rec.theta0[k] && rec.theta0[k] <= p.ci_hi
            })
            .count();
        println!("  {label} {name}: coverage {covered}/{n_runs}");
        assert!(
            covered >= 16,
            "{label}: {name} covered only {covered}/{n_runs}"
        );
    }
}

#[test]
fn criterion_05a_recovery_al_m00() {
    let spec = ModelSpec::new(Family::AlParametric)
        .location(LocationStructure::LinearTrend)
        .scale(ScaleStructure::Constant);
    let theta0 = vec![
        ("alpha_0".to_string(), 8.0),
        ("alpha_1".to_string(), 0.04),
        ("alpha_2".to_string(), -0.12),
        ("beta_0".to_string(), -2.4),
        ("p".to_string(), 0.5),
    ];
    let rec = run_recovery(&spec, &theta0, 20, 1000);
    check_recovery("AL M00", &rec);
    println!("criterion 5 (parameter recovery, AL M00): PASS");
}

#[test]
fn criterion_05b_recovery_al_m23() {
    // Weakly informative coefficient priors (variance 4): the default
    // variance-100 prior on log-variance dummies puts real mass on
    // degenerate exact-fit regimes for single-observation levels, which is
    // a posterior feature, not a recovery target.
    let spec = ModelSpec::new(Family::AlParametric)
        .location(LocationStructure::Anova)
        .scale(ScaleStructure::Both)
        .with_priors(qreserve::model::PriorConfig {
            coeff_variance: 4.0,
            ..qreserve::model::PriorConfig::default()
        });
    let acc = [0.2, -0.15, 0.3, 0.1, -0.25, 0.15, -0.1, 0.05, 0.2];
    let dev = [-0.3, 0.25, -0.1, 0.2, -0.2, 0.1, -0.05, 0.15, -0.15];
    let sacc = [0.15, -0.1, 0.2, -0.15, 0.1, -0.2, 0.05, -0.05, 0.1];
    let sdev = [-0.2, 0.15, -0.1, 0.1, -0.15, 0.2, -0.05, 0.05, -0.1];
    let mut theta0 = vec![
        ("alpha_0".to_string(), 8.0),
        ("beta_0".to_string(), -2.5),
        ("p".to_string(), 0.6),
    ];
    for (k, v) in acc.iter().enumerate() {
        theta0.push((format!("alpha_acc_{}", k + 2), *v));
    }
    for (k, v) in dev.iter().enumerate() {
        theta0.push((format!("alpha_dev_{}", k + 2), *v));
    }
    for (k, v) in sacc.iter().enumerate() {
        theta0.push((format!("beta_acc_{}", k + 2), *v));
    }
    for (k, v) in sdev.iter().enumerate() {
        theta0.push((format!("beta_dev_{}", k + 2), *v));
    }
    let rec = run_recovery(&spec, &theta0, 20, 2000);
    check_recovery("AL M23", &rec);
    println!("criterion 5 (parameter recovery, AL M23): PASS");
}

#[test]
fn criterion_05c_recovery_gamma_m2() {
    let spec = ModelSpec::new(Family::Gamma).location(LocationStructure::Anova);
    let acc = [0.2, -0.15, 0.3, 0.1, -0.25, 0.15, -0.1, 0.05, 0.2];
    let dev = [-0.3, 0.25, -0.1, 0.2, -0.2, 0.1, -0.05, 0.15, -0.15];
    let mut theta0 = vec![("alpha_0".to_string(), 2.0), ("p".to_string(), 2.0)];
    for (k, v) in acc.iter().enumerate() {
        theta0.push((format!("alpha_acc_{}", k + 2), *v));
    }
    for (k, v) in dev.iter().enumerate() {
        theta0.push((format!("alpha_dev_{}", k + 2), *v));
    }
    let rec = run_recovery(&spec, &theta0, 20, 1000);
    check_recovery("Gamma M2.", &rec);
    println!("criterion 5 (parameter recovery, Gamma M2.): PASS");
}

// ---------------------------------------------------------------------------
// Criterion 6 — margin-profile recovery
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_margin_profile_recovery() {
    // Skew declining linearly 0.9 -> 0.4 across eight accident years,
    // embedded in a 12-year triangle so each profiled year keeps at least
    // five observations (a bare 8-year triangle leaves the late years with
    // one or two cells and no skew information at all).
    let i_count = 12;
    let decline_years = 8usize;
    let spec = ModelSpec::new(Family::AlParametric)
        .location(LocationStructure::Anova)
        .scale(ScaleStructure::Both)
        .shape(ShapeStructure::AccidentYear)
        .with_priors(qreserve::model::PriorConfig {
            coeff_variance: 4.0,
            ..qreserve::model::PriorConfig::default()
        });
    let layout_model = placeholder_model(&spec, i_count);
    let true_p = |i: usize| {
        if i <= decline_years {
            0.9 - 0.5 * (i as f64 - 1.0) / 7.0
        } else {
            0.4
        }
    };
    let mut pairs = vec![
        ("alpha_0".to_string(), 8.0),
        ("beta_0".to_string(), (0.04_f64).ln()),
        ("phi_0".to_string(), 0.9),
    ];
    for i in 2..=i_count {
        pairs.push((format!("phi_acc_{i}"), true_p(i) - 0.9));
    }
    let theta0 = theta_from_pairs(&layout_model, &pairs);
    let sim = simulate_triangle(&spec, &theta0, i_count, 512).unwrap();
    let model = Model::new(spec.clone(), &sim.upper, 0.01).unwrap();
    let cfg = ChainConfig {
        seed: 6,
        ..ChainConfig::default()
    };
    let chain = run_chain(&model, &cfg, &init_params(&model), 0).unwrap();
    let profile = margin_profile(&chain, &model).unwrap();
    for y in &profile {
        println!(
            "  year {}: p_hat {:.3} [{:.3}, {:.3}] true {:.3}",
            y.year,
            y.p_hat,
            y.lo95,
            y.hi95,
            true_p(y.year)
        );
    }
    // Monotone-declining within credible-interval widths over the declining
    // window: a later year may sit above its predecessor only within the
    // half-width slack.
    for w in profile[..decline_years].windows(2) {
        let slack = 0.5 * ((w[0].hi95 - w[0].lo95) + (w[1].hi95 - w[1].lo95));
        assert!(
            w[1].p_hat <= w[0].p_hat + slack,
            "profile rises from year {} ({:.3}) to year {} ({:.3}) beyond slack {:.3}",
            w[0].year,
            w[0].p_hat,
            w[1].year,
            w[1].p_hat,
            slack
        );
    }
    // The overall decline is recovered, both end to end and front half vs
    // back half of the declining window.
    let drop = profile[0].p_hat - profile[decline_years - 1].p_hat;
    assert!(drop > 0.25, "profile decline {drop:.3} too small");
    let front: f64 = profile[..4].iter().map(|y| y.p_hat).sum::<f64>() / 4.0;
    let back: f64 = profile[4..8].iter().map(|y| y.p_hat).sum::<f64>() / 4.0;
    assert!(
        front - back > 0.1,
        "front-half mean {front:.3} not clearly above back-half mean {back:.3}"
    );
    println!("criterion 6 (margin-profile recovery): PASS");
}

// ---------------------------------------------------------------------------
// Criterion 7 — GB2 nesting
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_gb2_nesting() {
    // GB2 with q = 1e4 against GG, both mean-linked, on a 100-point grid
    // across the body of the distribution (quantiles 0.005 to 0.99).
    for &(mu, a, p) in &[(1.0, 2.0, 1.5), (1.0, 1.0, 2.0), (2.0, 0.5, 1.0)] {
        let gb2 = Gb2Params::from_mean(mu, a, p, 1e4).unwrap();
        let gg = GgParams::from_mean(mu, a, p).unwrap();
        let mut max_gap = 0.0f64;
        for k in 0..100 {
            let u = 0.005 + (0.99 - 0.005) * k as f64 / 99.0;
            let y = gg_quantile(u, &gg).unwrap();
            let gap = (gb2_logpdf(y, &gb2).unwrap() - gg_logpdf(y, &gg).unwrap()).abs();
            max_gap = max_gap.max(gap);
        }
        println!("  GB2(q=1e4) vs GG at (mu={mu}, a={a}, p={p}): max gap {max_gap:.2e}");
        assert!(max_gap < 1e-3, "GG limit gap {max_gap} at ({mu},{a},{p})");
    }
    // GG with a = 1 equals the textbook gamma density to machine precision.
    for &(p, mean) in &[(1.0, 1.0), (1.87, 2.5), (5.0, 0.4)] {
        let th = GgParams::from_mean(mean, 1.0, p).unwrap();
        let scale = mean / p;
        for k in 1..=100 {
            let y = k as f64 * 0.05 * mean;
            let textbook = (p - 1.0) * y.ln()
                - y / scale
                - qreserve::dists::ln_gamma(p)
                - p * scale.ln();
            let gap = (gg_logpdf(y, &th).unwrap() - textbook).abs();
            assert!(gap < 1e-12, "gamma gap {gap} at p={p}, y={y}");
        }
    }
    println!("criterion 7 (GB2 nesting): PASS");
}

// ---------------------------------------------------------------------------
// Criterion 8 — reserve-quantile properties
// ---------------------------------------------------------------------------

#[test]
fn criterion_08_reserve_quantile_properties() {
    // A fitted AL model on a synthetic triangle drives the first two
    // properties. The cells must be light-tailed enough for the
    // convex-order comparison to bite at u = 0.75: exp(AL) cells have a
    // power tail of index p/sigma, so sigma = 0.1 at p = 0.5 keeps the
    // index at 5 (finite mean and variance). For heavier cells (index
    // near or below 1) the comparison genuinely inverts - value-at-risk
    // becomes superadditive - and the bound stops being a bound.
    let spec = ModelSpec::new(Family::AlParametric)
        .location(LocationStructure::LinearTrend)
        .scale(ScaleStructure::Constant);
    let layout_model = placeholder_model(&spec, 7);
    let theta0 = theta_from_pairs(
        &layout_model,
        &[
            ("alpha_0".to_string(), 8.0),
            ("alpha_1".to_string(), 0.04),
            ("alpha_2".to_string(), -0.12),
            ("beta_0".to_string(), -4.6),
            ("p".to_string(), 0.5),
        ],
    );
    let sim = simulate_triangle(&spec, &theta0, 7, 99).unwrap();
    let model = Model::new(spec.clone(), &sim.upper, 0.01).unwrap();
    let cfg = ChainConfig {
        seed: 11,
        ..ChainConfig::default()
    };
    let chain = run_chain(&model, &cfg, &init_params(&model), 0).unwrap();
    let (theta, _) = qreserve::select::posterior_mean_params(&chain, &model).unwrap();

    // (a) comonotonic OR(u) nondecreasing on a 99-level grid.
    let mut prev = 0.0;
    for k in 1..100 {
        let u = k as f64 / 100.0;
        let or = total_reserve_quantile_comonotonic(&model, &theta, u).unwrap();
        assert!(or >= prev, "OR({u}) = {or} < OR at previous level {prev}");
        prev = or;
    }

    // (b) independent-sum Monte Carlo OR never exceeds the comonotonic OR
    // beyond 3 MC standard errors at the upper levels.
    for &u in &[0.75, 0.9, 0.95] {
        let como = total_reserve_quantile_comonotonic(&model, &theta, u).unwrap();
        let mc =
            total_reserve_quantile_mc(&model, McMode::AtPointEstimate(&theta), u, 50_000, 7)
                .unwrap();
        println!(
            "  u = {u}: MC OR {:.0} (se {:.0}) vs comonotonic {:.0}",
            mc.value, mc.mc_se, como
        );
        assert!(
            mc.value <= como + 3.0 * mc.mc_se,
            "u={u}: independent-sum OR {} above comonotonic {} + 3se",
            mc.value,
            como
        );
    }

    // (c) first-order heavy-tail approximation for a sum of 20 iid
    // Pareto(index 2, scale 1) cells at u = 0.999, against the empirical
    // quantile of 1e7 simulated sums.
    let t_count = 20;
    let u = 0.999;
    let n: usize = 10_000_000;
    let mut rng = ChaCha12Rng::seed_from_u64(8);
    let mut sums = Vec::with_capacity(n);
    for _ in 0..n {
        let mut s = 0.0;
        for _ in 0..t_count {
            let v: f64 = rng.random();
            s += (1.0 - v).powf(-0.5);
        }
        sums.push(s);
    }
    sums.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let empirical = qreserve::select::percentile_type7(&sums, u);
    let approx =
        heavy_tail_quantile_approx(|lvl| Ok((1.0 - lvl).powf(-0.5)), t_count, u).unwrap();
    let rel_err = (approx - empirical).abs() / empirical;
    println!(
        "  heavy tail: approximation {approx:.2} vs empirical {empirical:.2}, relative error {:.1}%",
        100.0 * rel_err
    );
    println!(
        "criterion 8 (reserve-quantile properties): {}",
        if rel_err < 0.10 { "PASS" } else { "FAIL" }
    );
    assert!(
        rel_err < 0.10,
        "first-order tail approximation off by {:.1}% (> 10%) against the 1e7-sample \
         empirical quantile; at T=20, alpha=2, u=0.999 the first-order regime has not set \
         in (the gap is dominated by the sum of the 19 non-dominant cell means)",
        100.0 * rel_err
    );
}

// ---------------------------------------------------------------------------
// Criterion 9 — PP posterior-support enforcement
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_pp_posterior_support_enforcement() {
    let i_count = 8;
    let spec = ModelSpec::new(Family::PowerPareto);
    let layout_model = placeholder_model(&spec, i_count);
    let theta0 = theta_from_pairs(
        &layout_model,
        &[
            ("alpha_0".to_string(), 2.0),
            ("alpha_slope".to_string(), 1.0),
            ("alpha_curv".to_string(), -0.5),
            ("beta_0".to_string(), (0.25_f64).ln()),
            ("gamma_1".to_string(), 0.8),
            ("gamma_2".to_string(), 0.3),
        ],
    );
    let sim = simulate_triangle(&spec, &theta0, i_count, 77).unwrap();
    let model = Model::new(spec.clone(), &sim.upper, 0.01).unwrap();
    let cfg = ChainConfig {
        seed: 5,
        ..ChainConfig::default()
    };
    let chain = run_chain(&model, &cfg, &init_params(&model), 0).unwrap();
    assert_eq!(chain.n_retained(), cfg.retained());

    // Every retained draw satisfies all three constraint sets and has a
    // finite log-posterior.
    let g1_idx = chain.param_index("gamma_1").unwrap();
    let g2_idx = chain.param_index("gamma_2").unwrap();
    let m = model.spec().priors.pp_gamma1_max;
    let eps = model.spec().priors.pp_sigma2_eps;
    for draw in &chain.draws {
        let theta = ParamVector {
            values: draw.clone(),
        };
        let lp = model.log_posterior(&theta).unwrap();
        assert!(lp.is_finite(), "retained draw with non-finite posterior");
        assert!(draw[g1_idx] > 0.0 && draw[g1_idx] <= m, "Omega_3 gamma_1");
        assert!(draw[g2_idx] > 0.0, "Omega_3 gamma_2");
        for (idx, &(i, j)) in model.upper_cells().iter().enumerate() {
            let mu = model.location_predictor(&theta, i, j).unwrap();
            assert!(mu < model.ystar()[idx], "Omega_1 violated in retained draw");
            let sig2 = model.scale_predictor(&theta, i, j).unwrap();
            assert!(sig2 > eps, "Omega_2 violated in retained draw");
        }
    }

    // Randomized support-violating parameter vectors always get -inf.
    let mut rng = ChaCha12Rng::seed_from_u64(123);
    let base = init_params(&model);
    assert!(model.log_posterior(&base).unwrap().is_finite());
    let idx_of = |n: &str| model.layout().index_of(n).unwrap();
    let y_max = model
        .ystar()
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    for k in 0..500 {
        let mut theta = base.clone();
        let z: f64 = rng.random::<f64>() * 3.0;
        match k % 5 {
            // Omega_1: location intercept at or above some observation.
            0 => theta.values[idx_of("alpha_0")] = y_max + z,
            // Omega_2: variance at or below epsilon.
            1 => theta.values[idx_of("beta_0")] = eps.ln() - z,
            // Omega_3 violations, one coordinate at a time.
            2 => theta.values[idx_of("gamma_1")] = -z,
            3 => theta.values[idx_of("gamma_1")] = m + z + f64::EPSILON,
            _ => theta.values[idx_of("gamma_2")] = -z,
        }
        assert_eq!(
            model.log_posterior(&theta).unwrap(),
            f64::NEG_INFINITY,
            "violating vector {k} not rejected"
        );
    }
    println!("criterion 9 (PP posterior-support enforcement): PASS");
}
