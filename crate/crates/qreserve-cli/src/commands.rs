//! Implementations of the fit / compare / predict / reserve / margin /
//! simulate subcommands. Every artifact is a tidy CSV (or a small
//! plain-text summary); nothing here draws plots — the CSVs are the plot
//! data.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use qreserve::dists::{al_inv_cdf, pp_quantile, AlParams};
use qreserve::mcmc::{init_params, run_chains, summarize, Chain};
use qreserve::model::{Family, Model, ParamVector, ShapeStructure};
use qreserve::risk::{
    heavy_tail_reserve_quantile, margin_profile, reserve_report, CentralKind, McSettings,
};
use qreserve::select::{fit_report, fitted_percentiles, posterior_mean_params};
use qreserve::simulate::simulate_triangle;
use qreserve::triangle::Triangle;

use crate::config::{fnv1a64, spec_from_kv, KvFile, Manifest, RunConfig};
use crate::CliError;

/// Back-transform caveat echoed into reserve and fit logs.
const EXP_BACKTRANSFORM_NOTE: &str = "note: log-scale quantiles are mapped to the currency scale \
through exp(Q); this is the conventional choice, not a unique back-transform";

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::new(3, "io_error", format!("writing {}: {e}", path.display())))
}

fn load_triangle(path: &Path) -> Result<Triangle, CliError> {
    Triangle::from_csv_path(path).map_err(CliError::from_lib)
}

fn build_model(run: &RunConfig, data: &Triangle) -> Result<Model, CliError> {
    Model::new(run.spec.clone(), data, run.floor).map_err(CliError::from_lib)
}

/// Concatenate retained draws across chains (reports pool all chains).
fn merge_chains(chains: &[Chain]) -> Chain {
    let mut merged = chains[0].clone();
    for c in &chains[1..] {
        merged.draws.extend(c.draws.iter().cloned());
        merged.deviance.extend(c.deviance.iter().cloned());
        merged.iters.extend(c.iters.iter().cloned());
    }
    if chains.len() > 1 {
        let n = chains.len() as f64;
        for (b, (_, rate)) in merged.block_acceptance.iter_mut().enumerate() {
            let total: f64 = chains.iter().map(|c| c.block_acceptance[b].1).sum();
            *rate = total / n;
        }
    }
    merged
}

fn load_fit_chains(fit_dir: &Path, n_chains: usize) -> Result<Chain, CliError> {
    let mut chains = Vec::with_capacity(n_chains);
    for idx in 0..n_chains {
        let path = fit_dir.join(format!("chain_{idx}.csv"));
        let text = std::fs::read_to_string(&path).map_err(|e| {
            CliError::new(3, "io_error", format!("reading {}: {e}", path.display()))
        })?;
        chains.push(Chain::from_csv_str(&text).map_err(CliError::from_lib)?);
    }
    Ok(merge_chains(&chains))
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

pub fn cmd_fit(
    config_path: &Path,
    out_override: Option<PathBuf>,
    seed_override: Option<u64>,
) -> Result<(), CliError> {
    let mut run = RunConfig::load(config_path)?;
    if let Some(out) = out_override {
        run.out_dir = out;
    }
    if let Some(seed) = seed_override {
        run.chain.seed = seed;
    }
    let data_bytes = std::fs::read(&run.data_path)
        .map_err(|e| CliError::new(3, "io_error", format!("reading data: {e}")))?;
    let data_fnv = fnv1a64(&data_bytes);
    let data = load_triangle(&run.data_path)?;
    let model = build_model(&run, &data)?;
    let init = init_params(&model);

    let started = Instant::now();
    let chains = run_chains(&model, &run.chain, &init).map_err(CliError::from_lib)?;
    let elapsed = started.elapsed();

    std::fs::create_dir_all(&run.out_dir)
        .map_err(|e| CliError::new(3, "io_error", format!("creating out dir: {e}")))?;
    for chain in &chains {
        write_file(
            &run.out_dir.join(format!("chain_{}.csv", chain.chain_index)),
            &chain.to_csv_string(),
        )?;
    }
    let merged = merge_chains(&chains);
    let summary = summarize(&merged).map_err(CliError::from_lib)?;
    let mut summary_csv = String::from("param,mean,sd,lo95,hi95\n");
    for p in &summary.params {
        let _ = writeln!(
            summary_csv,
            "{},{},{},{},{}",
            p.name, p.mean, p.sd, p.ci_lo, p.ci_hi
        );
    }
    write_file(&run.out_dir.join("summary.csv"), &summary_csv)?;

    let report = fit_report(&merged, &model, &data).map_err(CliError::from_lib)?;
    let mut metrics = String::from("dic,d_bar,d_hat,p_d,mse\n");
    match (&report.dic, &report.mse) {
        (Some(d), mse) => {
            let _ = write!(metrics, "{},{},{},{}", d.dic, d.d_bar, d.d_hat, d.p_d);
            match mse {
                Some(m) => {
                    let _ = writeln!(metrics, ",{m}");
                }
                None => metrics.push_str(",\n"),
            }
        }
        (None, mse) => {
            let _ = write!(metrics, ",,,");
            match mse {
                Some(m) => {
                    let _ = writeln!(metrics, ",{m}");
                }
                None => metrics.push_str(",\n"),
            }
        }
    }
    write_file(&run.out_dir.join("fit_metrics.csv"), &metrics)?;

    let mut fitted_csv = String::from("i,j,observed,fitted,std_residual\n");
    for (idx, &(i, j)) in model.upper_cells().iter().enumerate() {
        let obs = data.amount(i, j).unwrap();
        let fitted = report
            .fitted
            .get(idx)
            .map(|v| v.to_string())
            .unwrap_or_default();
        let resid = report.residuals[idx]
            .map(|v| v.to_string())
            .unwrap_or_default();
        let _ = writeln!(fitted_csv, "{i},{j},{obs},{fitted},{resid}");
    }
    write_file(&run.out_dir.join("fitted.csv"), &fitted_csv)?;

    write_file(
        &run.out_dir.join("manifest.txt"),
        &run.manifest_string(data_fnv, data.i_count()),
    )?;

    // Wall-clock and adaptation history live in the (non-deterministic) log.
    let mut log = String::new();
    let _ = writeln!(log, "fit completed in {:.3}s", elapsed.as_secs_f64());
    let _ = writeln!(log, "model = {}", model.spec().label());
    let _ = writeln!(
        log,
        "triangle: I = {}, observed cells = {}, floor = {}",
        data.i_count(),
        data.n_observed(),
        run.floor
    );
    let _ = writeln!(log, "{EXP_BACKTRANSFORM_NOTE}");
    if let Some(reason) = &report.dic_unavailable_reason {
        let _ = writeln!(log, "DIC unavailable: {reason}");
    }
    if let Some(reason) = &report.mse_unavailable_reason {
        let _ = writeln!(log, "MSE unavailable: {reason}");
    }
    for chain in &chains {
        let _ = writeln!(
            log,
            "chain {}: seed = {}, stream = {}, retained = {}, adaptation events = {}",
            chain.chain_index,
            chain.seed,
            chain.chain_index,
            chain.n_retained(),
            chain.adapt_events.len()
        );
        for (name, rate) in &chain.block_acceptance {
            let _ = writeln!(log, "  acceptance[{name}] = {rate:.4}");
        }
        for e in &chain.adapt_events {
            let _ = writeln!(
                log,
                "  adapt iter={} move={} scale={}",
                e.iteration, e.mv, e.new_scale
            );
        }
    }
    write_file(&run.out_dir.join("run_log.txt"), &log)?;
    println!("fit written to {}", run.out_dir.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

struct FitRow {
    label: String,
    dic: Option<f64>,
    d_bar: Option<f64>,
    d_hat: Option<f64>,
    mse: Option<f64>,
    shapes: Vec<(String, f64)>,
}

type Metrics = (Option<f64>, Option<f64>, Option<f64>, Option<f64>);

fn read_metrics(fit_dir: &Path) -> Result<Metrics, CliError> {
    let path = fit_dir.join("fit_metrics.csv");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::new(3, "io_error", format!("reading {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != "dic,d_bar,d_hat,p_d,mse" {
        return Err(CliError::new(
            3,
            "data_invalid",
            format!("unexpected fit_metrics header '{header}'"),
        ));
    }
    let row = lines.next().ok_or_else(|| {
        CliError::new(3, "data_invalid", "fit_metrics.csv has no data row".to_string())
    })?;
    let fields: Vec<&str> = row.split(',').collect();
    let get = |k: usize| -> Option<f64> { fields.get(k).and_then(|s| s.parse().ok()) };
    Ok((get(0), get(1), get(2), get(4)))
}

pub fn cmd_compare(fit_dirs: &[PathBuf], out_dir: Option<PathBuf>) -> Result<(), CliError> {
    if fit_dirs.len() < 2 {
        return Err(CliError::new(
            2,
            "usage",
            "compare needs at least two fit directories".to_string(),
        ));
    }
    let mut rows = Vec::new();
    let mut fingerprint: Option<(u64, usize)> = None;
    for dir in fit_dirs {
        let manifest = Manifest::load(dir)?;
        let fp = (manifest.data_fnv, manifest.i_count);
        match fingerprint {
            None => fingerprint = Some(fp),
            Some(existing) if existing != fp => {
                return Err(CliError::new(
                    2,
                    "config_incompatible_fits",
                    format!("{} was fitted to different data", dir.display()),
                ));
            }
            _ => {}
        }
        let (dic, d_bar, d_hat, mse) = read_metrics(dir)?;
        // Key shape estimates from the posterior summary.
        let summary_path = dir.join("summary.csv");
        let text = std::fs::read_to_string(&summary_path).map_err(|e| {
            CliError::new(3, "io_error", format!("reading {}: {e}", summary_path.display()))
        })?;
        let mut shapes = Vec::new();
        for line in text.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() < 2 {
                continue;
            }
            let name = fields[0];
            if ["p", "a", "q", "gamma_1", "gamma_2", "phi_0"].contains(&name) {
                if let Ok(v) = fields[1].parse::<f64>() {
                    shapes.push((name.to_string(), v));
                }
            }
            if name == "beta_0" {
                if let Ok(v) = fields[1].parse::<f64>() {
                    shapes.push(("sigma2".to_string(), v.exp()));
                }
            }
        }
        rows.push(FitRow {
            label: manifest.run.spec.label(),
            dic,
            d_bar,
            d_hat,
            mse,
            shapes,
        });
    }
    // Smaller DIC first; fits without a DIC sink to the bottom.
    rows.sort_by(|a, b| {
        let ka = a.dic.unwrap_or(f64::INFINITY);
        let kb = b.dic.unwrap_or(f64::INFINITY);
        ka.partial_cmp(&kb).unwrap()
    });
    let shape_cols = ["p", "phi_0", "a", "q", "gamma_1", "gamma_2", "sigma2"];
    let mut csv = String::from("model,dic,d_bar,d_hat,mse");
    for c in shape_cols {
        csv.push(',');
        csv.push_str(c);
    }
    csv.push('\n');
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &rows {
        let _ = write!(
            csv,
            "{},{},{},{},{}",
            r.label,
            opt(r.dic),
            opt(r.d_bar),
            opt(r.d_hat),
            opt(r.mse)
        );
        for c in shape_cols {
            let v = r.shapes.iter().find(|(n, _)| n == c).map(|(_, v)| *v);
            csv.push(',');
            csv.push_str(&opt(v));
        }
        csv.push('\n');
    }
    print!("{csv}");
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(&dir)
            .map_err(|e| CliError::new(3, "io_error", format!("creating out dir: {e}")))?;
        write_file(&dir.join("comparison.csv"), &csv)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

fn validate_levels(levels: &[f64]) -> Result<(), CliError> {
    if levels.is_empty() {
        return Err(CliError::new(2, "usage", "level list is empty".to_string()));
    }
    for &u in levels {
        if !(u > 0.0 && u < 1.0) {
            return Err(CliError::new(
                2,
                "usage",
                format!("quantile level {u} must be in (0,1)"),
            ));
        }
    }
    Ok(())
}

pub fn cmd_predict(
    fit_dir: &Path,
    levels: Option<Vec<f64>>,
    out_override: Option<PathBuf>,
) -> Result<(), CliError> {
    let levels = levels.unwrap_or_else(|| vec![0.3, 0.5, 0.75, 0.95]);
    validate_levels(&levels)?;
    let manifest = Manifest::load(fit_dir)?;
    let out_dir = out_override.unwrap_or_else(|| fit_dir.to_path_buf());
    let data = load_triangle(&manifest.run.data_path)?;
    let model = build_model(&manifest.run, &data)?;
    let chain = load_fit_chains(fit_dir, manifest.run.chain.n_chains)?;
    let (theta, _) = posterior_mean_params(&chain, &model).map_err(CliError::from_lib)?;

    // Per-cell quantiles over the full grid (heat-map data).
    let mut q_csv = String::from("region,i,j,level,quantile\n");
    for (region, cells) in [("upper", model.upper_cells()), ("lower", model.lower_cells())] {
        for &(i, j) in cells {
            for &u in &levels {
                let q = qreserve::risk::cell_quantile(&model, &theta, i, j, u)
                    .map_err(CliError::from_lib)?;
                let _ = writeln!(q_csv, "{region},{i},{j},{u},{q}");
            }
        }
    }
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::new(3, "io_error", format!("creating out dir: {e}")))?;
    write_file(&out_dir.join("quantiles.csv"), &q_csv)?;

    // QQ data: standardized-residual quantiles for log-scale families with
    // a constant skew, probability-integral-transform quantiles otherwise.
    let n = model.upper_cells().len();
    let mut qq = String::from("pos,model,empirical\n");
    let log_family = matches!(
        model.spec().family,
        Family::AlParametric | Family::AlNonparametric | Family::PowerPareto
    ) && model.spec().shape == ShapeStructure::Constant;
    if log_family {
        let mut residuals = Vec::with_capacity(n);
        for (idx, &(i, j)) in model.upper_cells().iter().enumerate() {
            let mu = model.location_predictor(&theta, i, j).map_err(CliError::from_lib)?;
            let sig = model
                .scale_predictor(&theta, i, j)
                .map_err(CliError::from_lib)?
                .sqrt();
            residuals.push((model.ystar()[idx] - mu) / sig);
        }
        residuals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (k, e) in residuals.iter().enumerate() {
            let pos = (k as f64 + 0.5) / n as f64;
            let model_q = match model.spec().family {
                Family::PowerPareto => {
                    let g1 = theta.values[model.layout().index_of("gamma_1").unwrap()];
                    let g2 = theta.values[model.layout().index_of("gamma_2").unwrap()];
                    pp_quantile(pos, g1, g2).map_err(CliError::from_lib)?
                }
                _ => {
                    let p = model.shape_predictor(&theta, 1).map_err(CliError::from_lib)?;
                    al_inv_cdf(pos, &AlParams::new(0.0, 1.0, p).map_err(CliError::from_lib)?)
                        .map_err(CliError::from_lib)?
                }
            };
            let _ = writeln!(qq, "{pos},{model_q},{e}");
        }
    } else {
        let mut pit = Vec::with_capacity(n);
        for (idx, &(i, j)) in model.upper_cells().iter().enumerate() {
            let dist = model.cell_dist(&theta, i, j).map_err(CliError::from_lib)?;
            let y = model.raw_observed()[idx].max(model.floor());
            pit.push(dist.cdf(y).map_err(CliError::from_lib)?);
        }
        pit.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (k, u) in pit.iter().enumerate() {
            let pos = (k as f64 + 0.5) / n as f64;
            let _ = writeln!(qq, "{pos},{pos},{u}");
        }
    }
    write_file(&out_dir.join("qq.csv"), &qq)?;

    // Percentile curves of fitted vs observed (ascending-order comparison).
    let report = fit_report(&chain, &model, &data).map_err(CliError::from_lib)?;
    let probs: Vec<f64> = (1..100).map(|k| k as f64 / 100.0).collect();
    let mut curve = String::from("prob,fitted,observed\n");
    if !report.fitted.is_empty() {
        let fitted_p = fitted_percentiles(&report.fitted, &probs).map_err(CliError::from_lib)?;
        let observed_p =
            fitted_percentiles(&data.observed_values(), &probs).map_err(CliError::from_lib)?;
        for ((p, f), o) in probs.iter().zip(&fitted_p).zip(&observed_p) {
            let _ = writeln!(curve, "{p},{f},{o}");
        }
    }
    write_file(&out_dir.join("fitted_curve.csv"), &curve)?;
    println!("prediction artifacts written to {}", out_dir.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// reserve
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
pub fn cmd_reserve(
    fit_dir: &Path,
    levels: Option<Vec<f64>>,
    sims: usize,
    mc_mode: &str,
    central: &str,
    seed: Option<u64>,
    tail_approx: bool,
    out_override: Option<PathBuf>,
) -> Result<(), CliError> {
    let levels = levels.unwrap_or_else(|| vec![0.3, 0.5, 0.75, 0.9, 0.95, 0.995]);
    validate_levels(&levels)?;
    let manifest = Manifest::load(fit_dir)?;
    let out_dir = out_override.unwrap_or_else(|| fit_dir.to_path_buf());
    let data = load_triangle(&manifest.run.data_path)?;
    let model = build_model(&manifest.run, &data)?;
    let chain = load_fit_chains(fit_dir, manifest.run.chain.n_chains)?;
    let (theta, _) = posterior_mean_params(&chain, &model).map_err(CliError::from_lib)?;

    let central_kind = match central {
        "median" => CentralKind::Median,
        "mean" => CentralKind::Mean,
        other => {
            return Err(CliError::new(
                2,
                "usage",
                format!("unknown central estimate '{other}' (expected median or mean)"),
            ))
        }
    };
    let mc = match mc_mode {
        "none" => None,
        "point" => Some(McSettings {
            n_sims: sims,
            seed: seed.unwrap_or(manifest.run.chain.seed),
            full_posterior: false,
        }),
        "full" => Some(McSettings {
            n_sims: sims,
            seed: seed.unwrap_or(manifest.run.chain.seed),
            full_posterior: true,
        }),
        other => {
            return Err(CliError::new(
                2,
                "usage",
                format!("unknown mc mode '{other}' (expected none, point, full)"),
            ))
        }
    };
    let report = reserve_report(&model, &theta, Some(&chain), &levels, central_kind, mc)
        .map_err(CliError::from_lib)?;

    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::new(3, "io_error", format!("creating out dir: {e}")))?;
    write_file(&out_dir.join("reserve.csv"), &report.levels_csv())?;
    if let Some(per_year) = report.per_year_csv() {
        write_file(&out_dir.join("margin_profile.csv"), &per_year)?;
    }
    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "central estimate ({}) = {}",
        match central_kind {
            CentralKind::Median => "comonotonic median",
            CentralKind::Mean => "sum of model means",
        },
        report.central
    );
    for r in &report.rows {
        let _ = writeln!(
            summary,
            "u = {}: OR_comonotonic = {}, margin = {}{}",
            r.u,
            r.or_comonotonic,
            r.margin,
            if r.margin_floored {
                " (floored at 0: central already above this quantile)"
            } else {
                ""
            }
        );
    }
    let _ = writeln!(summary, "{EXP_BACKTRANSFORM_NOTE}");
    if tail_approx {
        let mut tail_csv = String::from("u,q_tail\n");
        for &u in &levels {
            let q = heavy_tail_reserve_quantile(&model, &theta, u).map_err(CliError::from_lib)?;
            let _ = writeln!(tail_csv, "{u},{q}");
        }
        write_file(&out_dir.join("tail_approx.csv"), &tail_csv)?;
        let _ = writeln!(summary, "heavy-tail approximation written to tail_approx.csv");
    }
    write_file(&out_dir.join("reserve_summary.txt"), &summary)?;
    println!("reserve artifacts written to {}", out_dir.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// margin
// ---------------------------------------------------------------------------

pub fn cmd_margin(fit_dir: &Path, out_override: Option<PathBuf>) -> Result<(), CliError> {
    let manifest = Manifest::load(fit_dir)?;
    if manifest.run.spec.shape != ShapeStructure::AccidentYear {
        return Err(CliError::new(
            2,
            "config_not_shape_model",
            "margin profiles need a fit with the accident-year shape structure".to_string(),
        ));
    }
    let out_dir = out_override.unwrap_or_else(|| fit_dir.to_path_buf());
    let data = load_triangle(&manifest.run.data_path)?;
    let model = build_model(&manifest.run, &data)?;
    let chain = load_fit_chains(fit_dir, manifest.run.chain.n_chains)?;
    let profile = margin_profile(&chain, &model).map_err(CliError::from_lib)?;
    let mut csv = String::from("i,p_hat,lo95,hi95,var_hat,skew_hat\n");
    for y in &profile {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            y.year, y.p_hat, y.lo95, y.hi95, y.var_hat, y.skew_hat
        );
    }
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::new(3, "io_error", format!("creating out dir: {e}")))?;
    write_file(&out_dir.join("margin_profile.csv"), &csv)?;
    println!("margin profile written to {}", out_dir.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

pub fn cmd_simulate(
    config_path: &Path,
    out_override: Option<PathBuf>,
    seed_override: Option<u64>,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(config_path).map_err(|e| {
        CliError::new(
            2,
            "config_missing",
            format!("cannot read {}: {e}", config_path.display()),
        )
    })?;
    let kv = KvFile::parse(&text)?;
    let base = config_path.parent().unwrap_or_else(|| Path::new("."));

    let spec = spec_from_kv(&kv)?;
    let i_count: usize = kv
        .get("simulate", "i_count")
        .ok_or_else(|| CliError::config_invalid("[simulate] i_count is required"))?
        .parse()
        .map_err(|_| CliError::config_invalid("bad [simulate] i_count"))?;
    let seed: u64 = match seed_override {
        Some(s) => s,
        None => kv
            .get("simulate", "seed")
            .unwrap_or("1")
            .parse()
            .map_err(|_| CliError::config_invalid("bad [simulate] seed"))?,
    };
    let out_dir = out_override
        .unwrap_or_else(|| base.join(kv.get("output", "dir").unwrap_or("out")));

    // Placeholder binding supplies the parameter layout for named values.
    let (upper, _) = qreserve::triangle::build_index_sets(i_count).map_err(CliError::from_lib)?;
    let ones: Vec<(usize, usize, f64)> = upper.iter().map(|&(i, j)| (i, j, 1.0)).collect();
    let placeholder = Triangle::from_cells(i_count, &ones).map_err(CliError::from_lib)?;
    let model = Model::new(spec.clone(), &placeholder, 0.01).map_err(CliError::from_lib)?;
    let mut theta = ParamVector::zeros(model.n_params());
    if let Some(params) = kv.section("params") {
        for (name, (value, line)) in params {
            let idx = model.layout().index_of(name).ok_or_else(|| {
                CliError::config_invalid(format!(
                    "line {line}: unknown parameter '{name}' for model {}",
                    spec.label()
                ))
            })?;
            theta.values[idx] = value.parse().map_err(|_| {
                CliError::config_invalid(format!("line {line}: bad value for '{name}'"))
            })?;
        }
    }
    // Support validation before any sampling.
    let ok = model
        .family_ctx(&theta)
        .map_err(CliError::from_lib)?
        .is_some();
    if !ok || !model.log_prior(&theta).is_finite() {
        return Err(CliError::config_invalid(
            "[params] values violate the model's parameter support".to_string(),
        ));
    }
    let sim = simulate_triangle(&spec, &theta, i_count, seed).map_err(CliError::from_lib)?;
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::new(3, "io_error", format!("creating out dir: {e}")))?;
    write_file(&out_dir.join("triangle.csv"), &sim.upper.to_csv_string())?;
    write_file(&out_dir.join("holdout.csv"), &sim.lower_csv())?;
    println!(
        "simulated triangle (I = {i_count}, seed = {seed}) written to {}",
        out_dir.display()
    );
    Ok(())
}

