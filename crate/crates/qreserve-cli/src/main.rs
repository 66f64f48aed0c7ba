//! `qreserve` — Bayesian quantile-regression loss reserving from run-off
//! triangles.
//!
//! Exit codes are a stable contract: 0 success, 2 configuration/usage
//! error, 3 data error, 4 numeric error. Failures print one
//! machine-readable line `ERROR <code>: <message>` on stderr.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// CLI-level error: exit code, machine code, human message.
#[derive(Debug)]
pub struct CliError {
    pub exit: u8,
    pub code: String,
    pub message: String,
}

impl CliError {
    pub fn new(exit: u8, code: &str, message: String) -> Self {
        Self {
            exit,
            code: code.to_string(),
            message,
        }
    }

    pub fn config_parse(message: String) -> Self {
        Self::new(2, "config_parse", message)
    }

    pub fn config_invalid(message: impl Into<String>) -> Self {
        Self::new(2, "config_invalid", message.into())
    }

    /// Library errors that arise while validating configuration.
    pub fn from_lib_config(e: qreserve::Error) -> Self {
        Self::new(2, "config_invalid", e.to_string())
    }

    /// Library errors at compute time, mapped onto the exit-code contract.
    pub fn from_lib(e: qreserve::Error) -> Self {
        use qreserve::Error as E;
        let (exit, code) = match &e {
            E::Config(_) => (2, "config_invalid"),
            E::Unsupported(_) => (2, "config_unsupported"),
            E::InvalidData(_) | E::InvalidDimension(_) => (3, "data_invalid"),
            E::Io(_) => (3, "io_error"),
            E::Domain(_) | E::Parameter(_) | E::InvalidIndex(_) => (4, "numeric_domain"),
            E::NonfiniteMoment(_) => (4, "numeric_moment"),
            E::Convergence(_) => (4, "numeric_convergence"),
        };
        Self::new(exit, code, e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "qreserve",
    version,
    about = "Bayesian quantile-regression loss reserving on claims run-off triangles"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit a model by MCMC and write chain, summary and fit-report CSVs.
    Fit {
        /// Run configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Override the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the configured RNG seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Tabulate completed fits (DIC ascending) into comparison.csv.
    Compare {
        /// Two or more fit output directories.
        #[arg(required = true)]
        fits: Vec<PathBuf>,
        /// Directory for comparison.csv (also printed to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-cell predictive quantiles, QQ data and fitted-percentile curves.
    Predict {
        /// Completed fit directory.
        #[arg(long)]
        fit: PathBuf,
        /// Quantile levels (comma separated), default 0.3,0.5,0.75,0.95.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Outstanding-reserve quantiles and risk margins.
    Reserve {
        /// Completed fit directory.
        #[arg(long)]
        fit: PathBuf,
        /// Quantile levels, default 0.3,0.5,0.75,0.9,0.95,0.995.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<f64>>,
        /// Monte Carlo simulations for the independent-sum quantile.
        #[arg(long, default_value_t = 10_000)]
        sims: usize,
        /// Monte Carlo mode: none, point (at the posterior mean), full
        /// (parameter uncertainty integrated over posterior draws).
        #[arg(long, default_value = "point")]
        mc: String,
        /// Central estimate: median (comonotonic OR at 0.5) or mean.
        #[arg(long, default_value = "median")]
        central: String,
        /// Monte Carlo seed (default: the fit seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the first-order heavy-tail approximation.
        #[arg(long)]
        tail_approx: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Accident-year risk-margin profile (dynamic-shape fits only).
    Margin {
        /// Completed fit directory.
        #[arg(long)]
        fit: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a synthetic triangle from a model at known parameters.
    Simulate {
        /// Config with [model], [simulate] and [params] sections.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the configured simulation seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Fit { config, out, seed } => commands::cmd_fit(&config, out, seed),
        Cmd::Compare { fits, out } => commands::cmd_compare(&fits, out),
        Cmd::Predict { fit, levels, out } => commands::cmd_predict(&fit, levels, out),
        Cmd::Reserve {
            fit,
            levels,
            sims,
            mc,
            central,
            seed,
            tail_approx,
            out,
        } => commands::cmd_reserve(&fit, levels, sims, &mc, &central, seed, tail_approx, out),
        Cmd::Margin { fit, out } => commands::cmd_margin(&fit, out),
        Cmd::Simulate { config, out, seed } => commands::cmd_simulate(&config, out, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ERROR {}: {}", e.code, e.message);
            ExitCode::from(e.exit)
        }
    }
}
