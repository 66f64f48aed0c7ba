//! Run configuration: a line-oriented `[section]` / `key = value` format
//! (UTF-8, `#` comments), parsed without dependencies so config diffs stay
//! trivial to read.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qreserve::mcmc::{ChainConfig, InitScales};
use qreserve::model::{
    Family, LocationStructure, ModelSpec, PriorConfig, ScaleStructure, ShapeStructure,
};

use crate::CliError;

/// Parsed key-value file: section -> key -> (value, line number).
#[derive(Debug, Clone, Default)]
pub struct KvFile {
    sections: BTreeMap<String, BTreeMap<String, (String, usize)>>,
}

impl KvFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut out = KvFile::default();
        let mut current = String::new();
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| {
                    CliError::config_parse(format!("line {line_no}: unterminated section header"))
                })?;
                current = name.trim().to_string();
                out.sections.entry(current.clone()).or_default();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::config_parse(format!("line {line_no}: expected 'key = value'"))
            })?;
            if current.is_empty() {
                return Err(CliError::config_parse(format!(
                    "line {line_no}: key outside any [section]"
                )));
            }
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            let section = out.sections.get_mut(&current).expect("section created");
            if section.insert(key.clone(), (value, line_no)).is_some() {
                return Err(CliError::config_parse(format!(
                    "line {line_no}: duplicate key '{key}' in [{current}]"
                )));
            }
        }
        Ok(out)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .get(section)
            .and_then(|s| s.get(key))
            .map(|(v, _)| v.as_str())
    }

    pub fn section(&self, name: &str) -> Option<&BTreeMap<String, (String, usize)>> {
        self.sections.get(name)
    }

    fn parse_as<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, CliError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|_| {
                CliError::config_invalid(format!("[{section}] {key} = {v}: cannot parse"))
            }),
        }
    }
}

/// Fully resolved run configuration for `fit` (and the model part of
/// `simulate`).
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub data_path: PathBuf,
    pub floor: f64,
    pub spec: ModelSpec,
    pub chain: ChainConfig,
    pub out_dir: PathBuf,
}

fn parse_family(v: &str) -> Result<Family, CliError> {
    Ok(match v {
        "al" => Family::AlParametric,
        "al_nonparametric" => Family::AlNonparametric,
        "pp" => Family::PowerPareto,
        "gb2" => Family::Gb2,
        "gg" => Family::Gg,
        "gamma" => Family::Gamma,
        other => {
            return Err(CliError::config_invalid(format!(
                "unknown family '{other}' (expected al, al_nonparametric, pp, gb2, gg, gamma)"
            )))
        }
    })
}

fn family_name(f: Family) -> &'static str {
    f.name()
}

fn parse_location(v: &str) -> Result<LocationStructure, CliError> {
    Ok(match v {
        "linear" => LocationStructure::LinearTrend,
        "nelson_siegel" => LocationStructure::NelsonSiegel,
        "anova" => LocationStructure::Anova,
        "anova_u" => LocationStructure::AnovaAtLevel,
        other => {
            return Err(CliError::config_invalid(format!(
                "unknown location structure '{other}' (expected linear, nelson_siegel, anova, anova_u)"
            )))
        }
    })
}

fn location_name(s: LocationStructure) -> &'static str {
    match s {
        LocationStructure::LinearTrend => "linear",
        LocationStructure::NelsonSiegel => "nelson_siegel",
        LocationStructure::Anova => "anova",
        LocationStructure::AnovaAtLevel => "anova_u",
    }
}

fn parse_scale(v: &str) -> Result<ScaleStructure, CliError> {
    Ok(match v {
        "constant" => ScaleStructure::Constant,
        "accident" => ScaleStructure::Accident,
        "development" => ScaleStructure::Development,
        "both" => ScaleStructure::Both,
        "unspecified" => ScaleStructure::Unspecified,
        other => {
            return Err(CliError::config_invalid(format!(
                "unknown scale structure '{other}' (expected constant, accident, development, both, unspecified)"
            )))
        }
    })
}

fn scale_name(s: ScaleStructure) -> &'static str {
    match s {
        ScaleStructure::Constant => "constant",
        ScaleStructure::Accident => "accident",
        ScaleStructure::Development => "development",
        ScaleStructure::Both => "both",
        ScaleStructure::Unspecified => "unspecified",
    }
}

fn parse_shape(v: &str) -> Result<ShapeStructure, CliError> {
    Ok(match v {
        "constant" => ShapeStructure::Constant,
        "accident" => ShapeStructure::AccidentYear,
        other => {
            return Err(CliError::config_invalid(format!(
                "unknown shape structure '{other}' (expected constant, accident)"
            )))
        }
    })
}

fn shape_name(s: ShapeStructure) -> &'static str {
    match s {
        ShapeStructure::Constant => "constant",
        ShapeStructure::AccidentYear => "accident",
    }
}

/// Model spec from the `[model]` and `[priors]` sections (shared by fit
/// and simulate configs).
pub fn spec_from_kv(kv: &KvFile) -> Result<ModelSpec, CliError> {
    let family = parse_family(
        kv.get("model", "family")
            .ok_or_else(|| CliError::config_invalid("[model] family is required"))?,
    )?;
    let mut spec = ModelSpec::new(family);
    if let Some(v) = kv.get("model", "location") {
        spec = spec.location(parse_location(v)?);
    }
    if let Some(v) = kv.get("model", "scale") {
        spec = spec.scale(parse_scale(v)?);
    }
    if let Some(v) = kv.get("model", "shape") {
        spec = spec.shape(parse_shape(v)?);
    }
    if let Some(u) = kv.parse_as::<f64>("model", "u")? {
        spec = spec.with_u(u);
    }
    if let Some(l) = kv.parse_as::<f64>("model", "lambda")? {
        spec = spec.with_lambda(l);
    }
    let mut priors = PriorConfig::default();
    if let Some(v) = kv.parse_as::<f64>("priors", "coeff_variance")? {
        priors.coeff_variance = v;
    }
    if let Some(v) = kv.parse_as::<f64>("priors", "gamma_shape")? {
        priors.gamma_shape = v;
    }
    if let Some(v) = kv.parse_as::<f64>("priors", "gamma_rate")? {
        priors.gamma_rate = v;
    }
    if let Some(v) = kv.parse_as::<f64>("priors", "pp_gamma1_max")? {
        priors.pp_gamma1_max = v;
    }
    if let Some(v) = kv.parse_as::<f64>("priors", "pp_sigma2_eps")? {
        priors.pp_sigma2_eps = v;
    }
    spec = spec.with_priors(priors);
    spec.validate().map_err(CliError::from_lib_config)?;
    Ok(spec)
}

impl RunConfig {
    /// Read and validate a config file. Relative paths resolve against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::new(2, "config_missing", format!("cannot read {}: {e}", path.display()))
        })?;
        let kv = KvFile::parse(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_kv(&kv, base)
    }

    pub fn from_kv(kv: &KvFile, base: &Path) -> Result<Self, CliError> {
        let data_rel = kv
            .get("data", "path")
            .ok_or_else(|| CliError::config_invalid("[data] path is required"))?;
        let data_path = base.join(data_rel);
        if !data_path.is_file() {
            return Err(CliError::new(
                2,
                "config_missing_data",
                format!("data file {} does not exist", data_path.display()),
            ));
        }
        let floor = kv.parse_as::<f64>("data", "floor")?.unwrap_or(0.01);
        if !(floor > 0.0) {
            return Err(CliError::config_invalid(format!("[data] floor {floor} must be > 0")));
        }

        let spec = spec_from_kv(kv)?;

        let mut chain = ChainConfig::default();
        if let Some(v) = kv.parse_as::<usize>("mcmc", "iterations")? {
            chain.iterations = v;
        }
        if let Some(v) = kv.parse_as::<usize>("mcmc", "burn_in")? {
            chain.burn_in = v;
        }
        if let Some(v) = kv.parse_as::<usize>("mcmc", "thin")? {
            chain.thin = v;
        }
        if let Some(v) = kv.parse_as::<usize>("mcmc", "chains")? {
            chain.n_chains = v;
        }
        if let Some(v) = kv.parse_as::<u64>("mcmc", "seed")? {
            chain.seed = v;
        }
        if let Some(v) = kv.parse_as::<usize>("mcmc", "adapt_window")? {
            chain.adapt_window = v;
        }
        let mut scales = InitScales::default();
        if let Some(v) = kv.parse_as::<f64>("mcmc", "scale_location")? {
            scales.location = v;
        }
        if let Some(v) = kv.parse_as::<f64>("mcmc", "scale_scale")? {
            scales.scale = v;
        }
        if let Some(v) = kv.parse_as::<f64>("mcmc", "scale_shape")? {
            scales.shape = v;
        }
        if let Some(v) = kv.parse_as::<f64>("mcmc", "scale_dist")? {
            scales.dist = v;
        }
        chain.init_scales = scales;
        chain.validate().map_err(CliError::from_lib_config)?;

        let out_dir = base.join(kv.get("output", "dir").unwrap_or("out"));
        Ok(RunConfig {
            data_path,
            floor,
            spec,
            chain,
            out_dir,
        })
    }

    /// Serialize back into the config format (used for the fit manifest).
    pub fn manifest_string(&self, data_fnv: u64, i_count: usize) -> String {
        let spec = &self.spec;
        let pr = &spec.priors;
        let c = &self.chain;
        let s = &c.init_scales;
        format!(
            "# fit manifest (written by qreserve fit; read by compare/predict/reserve/margin)\n\
             [data]\n\
             path = {data}\n\
             floor = {floor}\n\
             fnv64 = {fnv:016x}\n\
             i_count = {i_count}\n\
             \n\
             [model]\n\
             family = {family}\n\
             location = {location}\n\
             scale = {scale}\n\
             shape = {shape}\n\
             u = {u}\n\
             lambda = {lambda}\n\
             \n\
             [priors]\n\
             coeff_variance = {cv}\n\
             gamma_shape = {gs}\n\
             gamma_rate = {gr}\n\
             pp_gamma1_max = {pm}\n\
             pp_sigma2_eps = {pe}\n\
             \n\
             [mcmc]\n\
             iterations = {iters}\n\
             burn_in = {burn}\n\
             thin = {thin}\n\
             chains = {chains}\n\
             seed = {seed}\n\
             adapt_window = {aw}\n\
             scale_location = {sl}\n\
             scale_scale = {ss}\n\
             scale_shape = {sh}\n\
             scale_dist = {sd}\n",
            data = self.data_path.display(),
            floor = self.floor,
            fnv = data_fnv,
            i_count = i_count,
            family = family_name(spec.family),
            location = location_name(spec.location),
            scale = scale_name(spec.scale),
            shape = shape_name(spec.shape),
            u = spec.u,
            lambda = spec.lambda,
            cv = pr.coeff_variance,
            gs = pr.gamma_shape,
            gr = pr.gamma_rate,
            pm = pr.pp_gamma1_max,
            pe = pr.pp_sigma2_eps,
            iters = c.iterations,
            burn = c.burn_in,
            thin = c.thin,
            chains = c.n_chains,
            seed = c.seed,
            aw = c.adapt_window,
            sl = s.location,
            ss = s.scale,
            sh = s.shape,
            sd = s.dist,
        )
    }
}

/// A fit manifest read back from disk.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub run: RunConfig,
    pub data_fnv: u64,
    pub i_count: usize,
}

impl Manifest {
    pub fn load(fit_dir: &Path) -> Result<Self, CliError> {
        let path = fit_dir.join("manifest.txt");
        let text = std::fs::read_to_string(&path).map_err(|e| {
            CliError::new(
                2,
                "config_missing_manifest",
                format!("cannot read {}: {e} (is this a fit directory?)", path.display()),
            )
        })?;
        let kv = KvFile::parse(&text)?;
        // The manifest stores the data path as resolved at fit time.
        let run = RunConfig::from_kv(&kv, Path::new(""))?;
        let fnv = kv
            .get("data", "fnv64")
            .ok_or_else(|| CliError::config_invalid("manifest lacks data fnv64"))?;
        let data_fnv = u64::from_str_radix(fnv, 16)
            .map_err(|_| CliError::config_invalid(format!("bad fnv64 '{fnv}' in manifest")))?;
        let i_count = kv
            .get("data", "i_count")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| CliError::config_invalid("manifest lacks i_count"))?;
        Ok(Manifest {
            run,
            data_fnv,
            i_count,
        })
    }
}

/// FNV-1a 64-bit hash (data-compatibility fingerprint in manifests).
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
