//! Command-line pipeline over the `landscape-tsir` core.
//!
//! Subcommands: `aggregate`, `fit`, `ablate`, `simulate`, `evaluate-seg`.
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 for
//! data errors.

pub mod config;
pub mod error;
pub mod evaluate;
pub mod fit;
pub mod inputs;
pub mod simulate;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::PipelineConfig;
pub use error::{CliError, Result};

use config::Needs;

#[derive(Debug, Parser)]
#[command(
    name = "landscape-tsir",
    version,
    about = "Landscape coverage and TSIR epidemic pipeline"
)]
pub struct Cli {
    /// Pipeline config (JSON); for `simulate`, a scenario config
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory, overriding the config
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed, overriding the config
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel stages
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-unit landscape coverage from the class rasters
    Aggregate,
    /// Fit the full model; writes fit_report.json and residuals.csv
    Fit,
    /// Adjusted R² for every feature set and stratum; writes ablation.csv
    Ablate,
    /// Write a synthetic input bundle
    Simulate,
    /// Segmentation metrics for prediction/truth raster pairs
    EvaluateSeg {
        #[arg(long, value_name = "DIR")]
        pred: PathBuf,
        #[arg(long, value_name = "DIR")]
        truth: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
    },
}

fn pipeline_config(cli: &Cli, needs: Needs) -> Result<PipelineConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Usage("this subcommand needs --config <PATH>".into()))?;
    let mut cfg = PipelineConfig::load(path)?;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate(path, needs)?;
    Ok(cfg)
}

fn write_output(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(CliError::io(&path))?;
    Ok(path)
}

/// Runs an already parsed command line.
pub fn execute(cli: &Cli) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(cli))
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Aggregate => {
            let cfg = pipeline_config(cli, Needs::Rasters)?;
            let units = inputs::load_units(&cfg)?;
            let m = inputs::aggregate(&cfg, &units)?;
            let path = write_output(&cfg.output_dir, "coverage.csv", &inputs::coverage_csv(&m))?;
            log::info!("wrote {}", path.display());
        }
        Command::Fit => {
            let cfg = pipeline_config(cli, Needs::Model)?;
            let report = fit::cmd_fit(&cfg)?;
            log::info!(
                "n = {}, p = {}, adjusted R² = {:.6}",
                report.n,
                report.p,
                report.adjusted_r2
            );
        }
        Command::Ablate => {
            let cfg = pipeline_config(cli, Needs::Model)?;
            fit::cmd_ablate(&cfg)?;
        }
        Command::Simulate => {
            let mut scenario = simulate::load_scenario(cli.config.as_deref())?;
            if let Some(seed) = cli.seed {
                scenario.seed = seed;
            }
            let out = cli
                .out
                .as_deref()
                .ok_or_else(|| CliError::Usage("simulate needs --out <DIR>".into()))?;
            simulate::cmd_simulate(&scenario, out)?;
            log::info!("wrote bundle to {}", out.display());
        }
        Command::EvaluateSeg {
            pred,
            truth,
            threshold,
        } => {
            let rows = evaluate::cmd_evaluate_seg(pred, truth, *threshold)?;
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            write_output(&out, "seg_metrics.csv", &evaluate::metrics_csv(&rows))?;
        }
    }
    Ok(())
}

/// Parses `args` and runs; returns the process exit code. Help and version
/// requests print and return 0.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
