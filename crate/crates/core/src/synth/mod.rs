//! Seeded synthetic scenarios with known TSIR parameters.
//!
//! Every generator is a pure function of the [`ScenarioConfig`]; each draws
//! from its own ChaCha stream so changing one component (say, the weather)
//! leaves the others untouched.

mod config;
mod landscape;
mod simulate;
mod weather;

use thiserror::Error;

pub use config::{
    AreaConfig, PopulationConfig, RasterConfig, ScenarioConfig, ThetaConfig, WeatherConfig,
};
pub use landscape::{gen_landscape, gen_rasters, gen_units, rasterize_fraction};
pub use simulate::{simulate_tsir, Simulation};
pub use weather::gen_weather;

use crate::epi::{bin_weather, EpiError, WeatherBin};
use crate::geo::{CoverageMatrix, GeoError};
use crate::raster::{LandscapeClass, ProbabilityRaster, RasterError};
use crate::SpatialUnit;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error(transparent)]
    Epi(#[from] EpiError),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error(transparent)]
    Raster(#[from] RasterError),
}

pub type Result<T, E = SynthError> = std::result::Result<T, E>;

// stream ids, one per generator
const STREAM_UNITS: u64 = 1;
const STREAM_LANDSCAPE: u64 = 2;
const STREAM_RASTERS: u64 = 3;
const STREAM_WEATHER: u64 = 4;
const STREAM_POPULATION: u64 = 5;
const STREAM_ALPHA: u64 = 6;
const STREAM_NOISE: u64 = 7;

fn rng(seed: u64, stream: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Everything generated for one scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub units: Vec<SpatialUnit>,
    pub coverage: CoverageMatrix<f64>,
    pub daily_temp: Vec<(chrono::NaiveDate, f64)>,
    pub daily_rain: Vec<(chrono::NaiveDate, f64)>,
    pub weather: Vec<WeatherBin<f64>>,
    pub simulation: Simulation,
}

impl Scenario {
    pub fn generate(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let units = gen_units(config)?;
        let coverage = gen_landscape(config, &units)?;
        let (daily_temp, daily_rain) = gen_weather(config);
        let weather = bin_weather(
            &daily_temp,
            &daily_rain,
            config.start_date,
            config.end_date(),
        )?;
        let simulation = simulate_tsir(config, &units, &coverage, &weather)?;
        Ok(Self {
            config: config.clone(),
            units,
            coverage,
            daily_temp,
            daily_rain,
            weather,
            simulation,
        })
    }

    /// One raster tile per unit and class, matching `coverage` exactly.
    pub fn rasters(
        &self,
    ) -> Result<std::collections::BTreeMap<LandscapeClass, Vec<ProbabilityRaster<f64>>>> {
        gen_rasters(&self.config, &self.units, &self.coverage)
    }
}
