use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{Result, SynthError};
use crate::epi::{SusceptibleRule, BIWEEK_DAYS};
use crate::raster::LandscapeClass;

/// Generating coefficients of `log β`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThetaConfig {
    pub landscape: BTreeMap<LandscapeClass, f64>,
    pub temperature: f64,
    pub rain_days: f64,
    pub density: f64,
}

impl Default for ThetaConfig {
    fn default() -> Self {
        Self {
            landscape: BTreeMap::from([
                (LandscapeClass::Buildings, 0.6),
                (LandscapeClass::Roads, 0.3),
                (LandscapeClass::Trees, 0.25),
                (LandscapeClass::Crops, -0.2),
                (LandscapeClass::Waterway, 0.35),
                (LandscapeClass::StandingWater, 0.15),
            ]),
            temperature: 0.08,
            rain_days: 0.05,
            density: 1e-5,
        }
    }
}

impl ThetaConfig {
    pub fn landscape_value(&self, class: LandscapeClass) -> f64 {
        self.landscape.get(&class).copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeatherConfig {
    pub mean_temp_c: f64,
    pub amplitude_c: f64,
    /// Day of the sinusoid's upward zero crossing, counted from the start date.
    pub phase_days: f64,
    pub temp_noise_sd: f64,
    pub rain_probability: f64,
    pub mean_rain_mm: f64,
}

impl Default for WeatherConfig {
    fn default() -> Self {
        Self {
            mean_temp_c: 25.0,
            amplitude_c: 3.0,
            phase_days: 90.0,
            temp_noise_sd: 1.5,
            rain_probability: 0.3,
            mean_rain_mm: 8.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PopulationConfig {
    pub min: u64,
    pub max: u64,
    pub growth_per_biweek: f64,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        Self {
            min: 200_000,
            max: 800_000,
            growth_per_biweek: 0.001,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AreaConfig {
    pub min_km2: f64,
    pub max_km2: f64,
}

impl Default for AreaConfig {
    fn default() -> Self {
        Self {
            min_km2: 20.0,
            max_km2: 80.0,
        }
    }
}

/// Geometry of the synthetic city: square units on a grid, one raster tile
/// per unit and class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RasterConfig {
    pub tile_pixels: usize,
    /// Side of each unit square in degrees.
    pub unit_size_deg: f64,
    pub origin_lon: f64,
    pub origin_lat: f64,
}

impl Default for RasterConfig {
    fn default() -> Self {
        Self {
            tile_pixels: 32,
            unit_size_deg: 0.0625,
            origin_lon: 73.0,
            origin_lat: 33.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub n_units: usize,
    pub n_biweeks: usize,
    pub start_date: NaiveDate,
    pub seed: u64,
    pub theta: ThetaConfig,
    /// Explicit per-unit mixing exponents; drawn from `alpha_range` when absent.
    pub alpha: Option<Vec<f64>>,
    pub alpha_range: [f64; 2],
    pub s0: f64,
    pub birth_rate: f64,
    /// Standard deviation of `log ε`.
    pub noise_sigma: f64,
    /// Round incidence to whole cases. Off, the noiseless model holds exactly.
    pub integer_counts: bool,
    pub initial_infected_fraction: f64,
    pub lags: BTreeMap<String, usize>,
    pub weather: WeatherConfig,
    pub population: PopulationConfig,
    pub area: AreaConfig,
    pub raster: RasterConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_units: 14,
            n_biweeks: 130,
            start_date: NaiveDate::from_ymd_opt(2014, 1, 1).expect("valid date"),
            seed: 42,
            theta: ThetaConfig::default(),
            alpha: None,
            alpha_range: [0.7, 0.9],
            s0: 0.1,
            birth_rate: 0.001,
            noise_sigma: 0.1,
            integer_counts: true,
            initial_infected_fraction: 0.001,
            lags: BTreeMap::from([("temperature".to_string(), 1), ("rain_days".to_string(), 1)]),
            weather: WeatherConfig::default(),
            population: PopulationConfig::default(),
            area: AreaConfig::default(),
            raster: RasterConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SynthError::Config(m));
        if self.n_units == 0 {
            return bad("n_units must be at least 1".into());
        }
        if self.n_biweeks < 8 {
            return bad(format!(
                "n_biweeks = {} but at least 8 are needed",
                self.n_biweeks
            ));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise_sigma {} must be ≥ 0", self.noise_sigma));
        }
        if let Some(a) = &self.alpha {
            if a.len() != self.n_units {
                return bad(format!(
                    "{} alpha values for {} units",
                    a.len(),
                    self.n_units
                ));
            }
        }
        if !(self.alpha_range[0] <= self.alpha_range[1]) {
            return bad("alpha_range must be [low, high]".into());
        }
        self.susceptible_rule()
            .validate()
            .map_err(|e| SynthError::Config(e.to_string()))?;
        if !(self.initial_infected_fraction > 0.0 && self.initial_infected_fraction <= self.s0) {
            return bad("initial_infected_fraction must lie in (0, s0]".into());
        }
        for key in self.lags.keys() {
            if key != "temperature" && key != "rain_days" {
                return bad(format!("unknown lag key {key:?}"));
            }
        }
        let w = &self.weather;
        if !(0.0..=1.0).contains(&w.rain_probability)
            || w.mean_rain_mm <= 0.0
            || w.temp_noise_sd < 0.0
        {
            return bad("weather parameters out of range".into());
        }
        let p = &self.population;
        if p.min == 0 || p.min > p.max || p.growth_per_biweek <= -1.0 {
            return bad("population range must satisfy 0 < min ≤ max".into());
        }
        if !(self.area.min_km2 > 0.0 && self.area.min_km2 <= self.area.max_km2) {
            return bad("area range must satisfy 0 < min ≤ max".into());
        }
        if self.raster.tile_pixels == 0 || !(self.raster.unit_size_deg > 0.0) {
            return bad("raster tile must be non-empty".into());
        }
        Ok(())
    }

    pub fn susceptible_rule(&self) -> SusceptibleRule {
        SusceptibleRule {
            s0: self.s0,
            birth_rate: self.birth_rate,
        }
    }

    /// Last day of the final biweek.
    pub fn end_date(&self) -> NaiveDate {
        self.start_date + Days::new(self.n_biweeks as u64 * BIWEEK_DAYS - 1)
    }

    /// Lags in covariate order (temperature, rain days).
    pub fn lag_vector(&self) -> Vec<usize> {
        ["temperature", "rain_days"]
            .iter()
            .map(|k| self.lags.get(*k).copied().unwrap_or(1))
            .collect()
    }

    pub fn unit_ids(&self) -> Vec<String> {
        let width = self.n_units.to_string().len().max(2);
        (1..=self.n_units)
            .map(|k| format!("u{k:0width$}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_defaults_fill_missing_fields() {
        let c: ScenarioConfig =
            serde_json::from_str(r#"{"n_units": 3, "theta": {"temperature": 0.1}}"#).unwrap();
        assert_eq!(c.n_units, 3);
        assert_eq!(c.theta.temperature, 0.1);
        assert_eq!(c.theta.landscape.len(), 6);
        assert_eq!(c.n_biweeks, 130);
        assert!(serde_json::from_str::<ScenarioConfig>(r#"{"n_unit": 3}"#).is_err());
    }

    #[test]
    fn validation() {
        assert!(ScenarioConfig::default().validate().is_ok());
        let short = ScenarioConfig {
            n_biweeks: 7,
            ..Default::default()
        };
        assert!(short.validate().is_err());
        let none = ScenarioConfig {
            n_units: 0,
            ..Default::default()
        };
        assert!(none.validate().is_err());
        let c = ScenarioConfig::default();
        assert_eq!((c.end_date() - c.start_date).num_days(), 130 * 14 - 1);
        assert_eq!(c.unit_ids()[0], "u01");
    }
}
