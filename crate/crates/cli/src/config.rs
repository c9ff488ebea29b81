//! The pipeline configuration document.
//!
//! Relative paths are resolved against the directory holding the config
//! file. Unknown fields are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use landscape_tsir::epi::{biweek_count, AlphaMode, ModelSpec, SusceptibleRule, ZeroPolicy};
use landscape_tsir::geo::CoverageMode;
use landscape_tsir::LandscapeClass;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

fn default_threshold() -> f64 {
    0.5
}

fn default_s0() -> f64 {
    0.1
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub units: PathBuf,
    pub rasters_dir: PathBuf,
    pub cases: PathBuf,
    pub weather: PathBuf,
    pub population: PathBuf,
    /// Coverage CSV read by `fit` and `ablate`. When absent they use
    /// `coverage.csv` in the output directory if present, else the rasters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub coverage_mode: CoverageMode,
    #[serde(default = "default_s0")]
    pub s0: f64,
    #[serde(default)]
    pub birth_rate: f64,
    /// Lags for (temperature, rain days). Defaults to `[1, 1]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lags: Option<Vec<usize>>,
    /// Candidate lags per covariate; the best combination by adjusted R² is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lag_grid: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub zero_policy: ZeroPolicy,
    #[serde(default)]
    pub alpha_mode: AlphaMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<LandscapeClass>>,
    #[serde(default = "default_true")]
    pub stratify: bool,
    #[serde(default)]
    pub seed: u64,
}

/// What a subcommand needs to find on disk.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Needs {
    Rasters,
    Model,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg_err = |message: String| CliError::Config {
            path: path.display().to_string(),
            message,
        };
        let text = fs::read_to_string(path).map_err(|e| cfg_err(e.to_string()))?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| cfg_err(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve(base);
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.units);
        join(&mut self.rasters_dir);
        join(&mut self.cases);
        join(&mut self.weather);
        join(&mut self.population);
        join(&mut self.output_dir);
        if let Some(c) = &mut self.coverage {
            join(c);
        }
    }

    /// Checks parameter ranges and that every input `needs` requires exists.
    pub fn validate(&self, source: &Path, needs: Needs) -> Result<()> {
        let err = |message: String| {
            Err(CliError::Config {
                path: source.display().to_string(),
                message,
            })
        };
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return err(format!("threshold {} outside (0, 1]", self.threshold));
        }
        if let Err(e) = self.susceptible_rule().validate() {
            return err(e.to_string());
        }
        if biweek_count(self.start_date, self.end_date) == 0 {
            return err(format!(
                "{} .. {} holds no complete biweek",
                self.start_date, self.end_date
            ));
        }
        if self.lags.is_some() && self.lag_grid.is_some() {
            return err("give either lags or lag_grid, not both".into());
        }
        if let Some(l) = &self.lags {
            if l.len() != 2 {
                return err(format!(
                    "lags needs 2 entries (temperature, rain_days), got {}",
                    l.len()
                ));
            }
        }
        if let Some(g) = &self.lag_grid {
            if g.len() != 2 || g.iter().any(Vec::is_empty) {
                return err("lag_grid needs 2 non-empty candidate lists".into());
            }
        }
        let mut required: Vec<(&str, &Path)> = vec![("units", &self.units)];
        let rasters_needed = needs == Needs::Rasters || self.coverage.is_none();
        if rasters_needed {
            required.push(("rasters_dir", &self.rasters_dir));
        }
        if needs == Needs::Model {
            required.push(("cases", &self.cases));
            required.push(("weather", &self.weather));
            required.push(("population", &self.population));
            if let Some(c) = &self.coverage {
                required.push(("coverage", c));
            }
        }
        for (name, p) in required {
            if !p.exists() {
                return err(format!("{name} path {} does not exist", p.display()));
            }
        }
        Ok(())
    }

    pub fn susceptible_rule(&self) -> SusceptibleRule {
        SusceptibleRule {
            s0: self.s0,
            birth_rate: self.birth_rate,
        }
    }

    pub fn classes(&self) -> Vec<LandscapeClass> {
        self.classes
            .clone()
            .unwrap_or_else(|| LandscapeClass::ALL.to_vec())
    }

    pub fn model_spec(&self) -> ModelSpec {
        ModelSpec {
            classes: self.classes(),
            lags: self.lags.clone().unwrap_or_else(|| vec![1, 1]),
            zero_policy: self.zero_policy,
            alpha_mode: self.alpha_mode,
            units: None,
        }
    }
}
