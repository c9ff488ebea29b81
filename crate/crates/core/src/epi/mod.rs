//! TSIR regression: biweekly binning, susceptible reconstruction, design
//! assembly, least-squares fitting, one-step prediction and feature
//! ablation.
//!
//! The per-unit recursion
//! `I(t+1) = β(t) · S(t)/N(t) · I(t)^α · ε`
//! is fitted in log space as
//! `log I(t+1) + log N(t) − log S(t) = log β(t) + α log I(t) + noise`,
//! with `log β(t) = Σ_a θ_a L_a + Σ_j θ_j E_j(t − l_j) + θ_p D(t)`.

mod ablation;
mod binning;
mod design;
mod fit;
pub mod io;
mod panel;
mod susceptible;

use chrono::NaiveDate;
use thiserror::Error;

pub use ablation::{
    ablate, lag_search, stratify_units, AblationCell, AblationTable, FeatureSet, Stratum,
};
pub use binning::{
    bin_cases, bin_weather, biweek_count, biweek_start, population_series, WeatherBin, BIWEEK_DAYS,
};
pub use design::{build_design, AlphaMode, ColumnLabel, Design, ModelSpec, ZeroPolicy};
pub use fit::{fit_ols, predict_next, state_at, Estimate, TsirFit, TsirState, WeatherEstimate};
pub use panel::{Covariate, EpidemicPanel, UnitSeries, RAIN_DAYS, TEMPERATURE};
pub use susceptible::{reconstruct_susceptibles, SusceptibleRule};

use crate::geo::GeoError;
use crate::linalg::LinalgError;
use crate::raster::LandscapeClass;

#[derive(Debug, Error)]
pub enum EpiError {
    #[error("date range {start} .. {end} holds no complete biweek")]
    EmptyRange { start: NaiveDate, end: NaiveDate },
    #[error("event for unit {unit:?} on {date} lies outside {start} .. {end}")]
    OutOfRange {
        unit: String,
        date: NaiveDate,
        start: NaiveDate,
        end: NaiveDate,
    },
    #[error("unknown unit id {0:?}")]
    UnknownUnit(String),
    #[error("no weather record for {0}")]
    MissingWeatherDay(NaiveDate),
    #[error("duplicate weather record for {0}")]
    DuplicateWeatherDay(NaiveDate),
    #[error("no population record for unit {unit:?} on or before {date}")]
    MissingPopulation { unit: String, date: NaiveDate },
    #[error("initial susceptible fraction {0} outside (0, 1]")]
    InitialFraction(f64),
    #[error(
        "susceptible depletion in unit {unit:?} at biweek {t}: S = {susceptible}, I = {infected}"
    )]
    Depletion {
        unit: String,
        t: usize,
        susceptible: f64,
        infected: f64,
    },
    #[error("unit {unit:?} at biweek {t}: S = {susceptible} is not positive")]
    NonPositiveSusceptible {
        unit: String,
        t: usize,
        susceptible: f64,
    },
    #[error("invalid panel: {0}")]
    Panel(String),
    #[error("no coverage row for unit {0:?}")]
    MissingCoverage(String),
    #[error("class {0} missing from coverage")]
    MissingClass(LandscapeClass),
    #[error("{expected} lags expected (one per covariate), got {got}")]
    LagCount { expected: usize, got: usize },
    #[error("no design rows survive filtering")]
    NoRows,
    #[error("empty lag grid")]
    EmptyGrid,
    #[error("no fitted parameter for unit {0:?}")]
    UnknownAlpha(String),
    #[error("covariate {name} has no value at biweek {t} (lag {lag})")]
    MissingCovariate { name: String, lag: usize, t: usize },
    #[error(transparent)]
    Fit(#[from] LinalgError),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error("{path}, line {line}: {message}")]
    Csv {
        path: String,
        line: u64,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl EpiError {
    /// True for errors caused by too little data rather than bad input.
    pub fn is_insufficient_data(&self) -> bool {
        matches!(
            self,
            EpiError::NoRows | EpiError::Fit(LinalgError::InsufficientRows { .. })
        )
    }
}

pub type Result<T, E = EpiError> = std::result::Result<T, E>;
