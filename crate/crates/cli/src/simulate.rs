//! `simulate`: writes a synthetic input bundle that the other subcommands
//! consume unchanged.
//!
//! ```text
//! <out>/units.geojson
//! <out>/rasters/<class>/<unit>.pgm (+ .json sidecar)
//! <out>/cases.csv, weather.csv, population.csv
//! <out>/pipeline.json   config for aggregate/fit/ablate
//! <out>/scenario.json   the scenario as run
//! <out>/truth.json      generating parameters
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use landscape_tsir::epi::biweek_start;
use landscape_tsir::epi::io::{write_cases, write_population, write_weather};
use landscape_tsir::geo::{write_units, CoverageMode};
use landscape_tsir::raster::save_raster;
use landscape_tsir::synth::{Scenario, ScenarioConfig};
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::fit::write;

#[derive(Debug, Serialize)]
pub struct Truth {
    pub landscape: BTreeMap<String, f64>,
    pub temperature: f64,
    pub rain_days: f64,
    pub density: f64,
    pub alpha: BTreeMap<String, f64>,
    pub s0: f64,
    pub birth_rate: f64,
    pub lags: Vec<usize>,
    pub noise_sigma: f64,
    pub truncations: usize,
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializes");
    s.push('\n');
    s
}

pub fn load_scenario(path: Option<&Path>) -> Result<ScenarioConfig> {
    let Some(path) = path else {
        return Ok(ScenarioConfig::default());
    };
    let cfg_err = |message: String| CliError::Config {
        path: path.display().to_string(),
        message,
    };
    let text = fs::read_to_string(path).map_err(|e| cfg_err(e.to_string()))?;
    let config: ScenarioConfig = serde_json::from_str(&text).map_err(|e| cfg_err(e.to_string()))?;
    config.validate().map_err(|e| cfg_err(e.to_string()))?;
    Ok(config)
}

pub fn cmd_simulate(config: &ScenarioConfig, out: &Path) -> Result<Scenario> {
    let scenario = Scenario::generate(config)?;
    let sim = &scenario.simulation;
    let mkdir = |p: &Path| fs::create_dir_all(p).map_err(CliError::io(p));
    mkdir(out)?;

    write_units(&scenario.units, &out.join("units.geojson"))?;

    let rasters = scenario.rasters()?;
    for (class, list) in &rasters {
        let dir = out.join("rasters").join(class.name());
        mkdir(&dir)?;
        for (unit, raster) in scenario.units.iter().zip(list) {
            let base = dir.join(unit.id());
            save_raster(
                raster,
                &base.with_extension("pgm"),
                &base.with_extension("json"),
            )?;
        }
    }

    let start = config.start_date;
    let mut cases = Vec::new();
    let mut population = Vec::new();
    for u in sim.panel.units() {
        for t in 0..sim.panel.n_biweeks() {
            let date = biweek_start(start, t);
            cases.push((u.id.clone(), date, u.infected[t]));
            population.push((u.id.clone(), date, u.population[t]));
        }
    }
    write_cases(&out.join("cases.csv"), &cases)?;
    write_population(&out.join("population.csv"), &population)?;
    write_weather(
        &out.join("weather.csv"),
        &scenario.daily_temp,
        &scenario.daily_rain,
    )?;

    let pipeline = PipelineConfig {
        units: "units.geojson".into(),
        rasters_dir: "rasters".into(),
        cases: "cases.csv".into(),
        weather: "weather.csv".into(),
        population: "population.csv".into(),
        coverage: None,
        output_dir: "results".into(),
        start_date: start,
        end_date: config.end_date(),
        threshold: 0.5,
        coverage_mode: CoverageMode::Threshold,
        s0: config.s0,
        birth_rate: config.birth_rate,
        lags: Some(config.lag_vector()),
        lag_grid: None,
        zero_policy: Default::default(),
        alpha_mode: Default::default(),
        classes: None,
        stratify: true,
        seed: config.seed,
    };
    write(&out.join("pipeline.json"), &pretty(&pipeline))?;
    write(&out.join("scenario.json"), &pretty(config))?;

    let theta = &config.theta;
    let truth = Truth {
        landscape: scenario
            .coverage
            .classes()
            .iter()
            .map(|c| (c.to_string(), theta.landscape_value(*c)))
            .collect(),
        temperature: theta.temperature,
        rain_days: theta.rain_days,
        density: theta.density,
        alpha: scenario
            .units
            .iter()
            .zip(&sim.alpha)
            .map(|(u, a)| (u.id().to_string(), *a))
            .collect(),
        s0: config.s0,
        birth_rate: config.birth_rate,
        lags: config.lag_vector(),
        noise_sigma: config.noise_sigma,
        truncations: sim.truncations,
    };
    write(&out.join("truth.json"), &pretty(&truth))?;
    if sim.truncations > 0 {
        log::warn!(
            "incidence was capped at the susceptible pool {} times",
            sim.truncations
        );
    }
    Ok(scenario)
}
