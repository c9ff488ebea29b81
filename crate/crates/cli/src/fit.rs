//! `fit` and `ablate`.

use std::fs;
use std::path::Path;

use landscape_tsir::epi::{
    ablate, biweek_start, build_design, fit_ols, lag_search, AlphaMode, FeatureSet, ModelSpec,
    Stratum, ZeroPolicy,
};
use landscape_tsir::{AblationTable, CoverageMatrix, EpidemicPanel, TsirFit};
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::inputs::{csv_field, fitted_units, load_coverage, load_panel, load_units};

#[derive(Debug, Serialize)]
pub struct EstimateRecord {
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Serialize)]
pub struct LandscapeRecord {
    pub class: String,
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Serialize)]
pub struct WeatherRecord {
    pub covariate: String,
    pub lag: usize,
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Serialize)]
pub struct AlphaRecord {
    pub unit: String,
    pub estimate: f64,
    pub std_error: f64,
}

/// Contents of `fit_report.json`.
#[derive(Debug, Serialize)]
pub struct FitReport {
    pub n: usize,
    pub p: usize,
    pub r2: f64,
    pub adjusted_r2: f64,
    pub lags: Vec<usize>,
    pub zero_policy: ZeroPolicy,
    pub alpha_mode: AlphaMode,
    pub units: Vec<String>,
    pub landscape: Vec<LandscapeRecord>,
    pub weather: Vec<WeatherRecord>,
    pub density: EstimateRecord,
    pub alpha: Vec<AlphaRecord>,
}

impl FitReport {
    pub fn new(fit: &TsirFit, units: Vec<String>) -> Self {
        Self {
            n: fit.n_rows,
            p: fit.n_params,
            r2: fit.r2,
            adjusted_r2: fit.adjusted_r2,
            lags: fit.lags(),
            zero_policy: fit.zero_policy,
            alpha_mode: fit.alpha_mode,
            units,
            landscape: fit
                .landscape
                .iter()
                .map(|(c, e)| LandscapeRecord {
                    class: c.to_string(),
                    estimate: e.value,
                    std_error: e.std_error,
                })
                .collect(),
            weather: fit
                .weather
                .iter()
                .map(|w| WeatherRecord {
                    covariate: w.name.clone(),
                    lag: w.lag,
                    estimate: w.estimate.value,
                    std_error: w.estimate.std_error,
                })
                .collect(),
            density: EstimateRecord {
                estimate: fit.density.value,
                std_error: fit.density.std_error,
            },
            alpha: fit
                .alpha
                .iter()
                .map(|(u, e)| AlphaRecord {
                    unit: u.clone(),
                    estimate: e.value,
                    std_error: e.std_error,
                })
                .collect(),
        }
    }
}

pub(crate) fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(CliError::io(path))
}

fn prepare(cfg: &PipelineConfig) -> Result<(EpidemicPanel, CoverageMatrix, ModelSpec)> {
    let units = load_units(cfg)?;
    let coverage = load_coverage(cfg, &units)?;
    let panel = load_panel(cfg, &units)?;
    let spec = cfg.model_spec().with_units(fitted_units(&panel, &coverage));
    Ok((panel, coverage, spec))
}

pub fn cmd_fit(cfg: &PipelineConfig) -> Result<FitReport> {
    let (panel, coverage, mut spec) = prepare(cfg)?;
    if let Some(grid) = &cfg.lag_grid {
        spec = spec.with_lags(lag_search(&panel, &coverage, &spec, grid)?);
        log::info!("lag search chose {:?}", spec.lags);
    }
    let design = build_design(&panel, &coverage, &spec)?;
    let fit = fit_ols(&design)?;
    let mut units: Vec<String> = Vec::new();
    for (u, _) in &fit.rows {
        if !units.contains(u) {
            units.push(u.clone());
        }
    }

    let mut residuals = String::from("unit_id,t,target_date,observed,fitted,residual\n");
    for (k, (unit, t)) in fit.rows.iter().enumerate() {
        residuals.push_str(&format!(
            "{},{t},{},{:.6},{:.6},{:.6}\n",
            csv_field(unit),
            biweek_start(panel.start(), t + 1),
            fit.observed[k],
            fit.fitted[k],
            fit.residuals[k]
        ));
    }
    let report = FitReport::new(&fit, units);
    fs::create_dir_all(&cfg.output_dir).map_err(CliError::io(&cfg.output_dir))?;
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    write(&cfg.output_dir.join("fit_report.json"), &json)?;
    write(&cfg.output_dir.join("residuals.csv"), &residuals)?;
    Ok(report)
}

pub fn ablation_csv(table: &AblationTable, stratify: bool) -> String {
    let strata: Vec<Stratum> = Stratum::ALL.to_vec();
    let mut s = String::from("model");
    for st in &strata {
        s.push_str(&format!(",{}", st.name()));
    }
    for st in &strata {
        s.push_str(&format!(",best_{}", st.name()));
    }
    for st in &strata {
        s.push_str(&format!(",best_single_{}", st.name()));
    }
    s.push('\n');
    let shown = |st: Stratum| stratify || st == Stratum::All;
    for fs in FeatureSet::TABLE {
        s.push_str(fs.name());
        for &st in &strata {
            match table.get(fs, st).filter(|_| shown(st)) {
                Some(v) => s.push_str(&format!(",{v:.6}")),
                None => s.push_str(",NA"),
            }
        }
        for &st in &strata {
            let flag = shown(st) && table.best(st) == Some(fs);
            s.push_str(if flag { ",1" } else { ",0" });
        }
        for &st in &strata {
            let flag = shown(st) && table.best_single(st) == Some(fs);
            s.push_str(if flag { ",1" } else { ",0" });
        }
        s.push('\n');
    }
    s
}

pub fn cmd_ablate(cfg: &PipelineConfig) -> Result<AblationTable> {
    let (panel, coverage, mut spec) = prepare(cfg)?;
    if let Some(grid) = &cfg.lag_grid {
        spec = spec.with_lags(lag_search(&panel, &coverage, &spec, grid)?);
    }
    let table = ablate(&panel, &coverage, &spec)?;
    for fs in FeatureSet::TABLE {
        for st in Stratum::ALL {
            if let Some(note) = &table.cell(fs, st).note {
                if cfg.stratify || st == Stratum::All {
                    log::warn!("{fs} / {}: {note}", st.name());
                }
            }
        }
    }
    fs::create_dir_all(&cfg.output_dir).map_err(CliError::io(&cfg.output_dir))?;
    write(
        &cfg.output_dir.join("ablation.csv"),
        &ablation_csv(&table, cfg.stratify),
    )?;
    Ok(table)
}
