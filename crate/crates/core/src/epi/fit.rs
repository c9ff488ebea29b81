use super::{AlphaMode, ColumnLabel, Design, EpiError, EpidemicPanel, Result, ZeroPolicy};
use crate::geo::CoverageMatrix;
use crate::linalg::least_squares;
use crate::raster::LandscapeClass;
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub std_error: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeatherEstimate<T> {
    pub name: String,
    pub lag: usize,
    pub estimate: Estimate<T>,
}

/// Fitted TSIR regression.
#[derive(Clone, Debug, PartialEq)]
pub struct TsirFit<T> {
    pub landscape: Vec<(LandscapeClass, Estimate<T>)>,
    pub weather: Vec<WeatherEstimate<T>>,
    pub density: Estimate<T>,
    /// Per-unit mixing exponents; a single entry keyed `"*"` when shared.
    pub alpha: Vec<(String, Estimate<T>)>,
    pub alpha_mode: AlphaMode,
    pub zero_policy: ZeroPolicy,
    pub r2: T,
    pub adjusted_r2: T,
    pub n_rows: usize,
    pub n_params: usize,
    pub rows: Vec<(String, usize)>,
    pub observed: Vec<T>,
    pub fitted: Vec<T>,
    pub residuals: Vec<T>,
}

impl<T: Real> TsirFit<T> {
    pub fn alpha_for(&self, unit: &str) -> Option<T> {
        match self.alpha_mode {
            AlphaMode::Shared => self.alpha.first().map(|(_, e)| e.value),
            AlphaMode::PerUnit => self
                .alpha
                .iter()
                .find(|(u, _)| u == unit)
                .map(|(_, e)| e.value),
        }
    }

    pub fn theta_landscape(&self, class: LandscapeClass) -> Option<T> {
        self.landscape
            .iter()
            .find(|(c, _)| *c == class)
            .map(|(_, e)| e.value)
    }

    pub fn lags(&self) -> Vec<usize> {
        self.weather.iter().map(|w| w.lag).collect()
    }
}

/// Least-squares fit of an assembled design.
pub fn fit_ols<T: Real>(design: &Design<T>) -> Result<TsirFit<T>> {
    let names = design.column_names();
    let ols = least_squares(&design.x, &design.y, Some(&names))?;
    let mut landscape = Vec::new();
    let mut weather = Vec::new();
    let mut density = None;
    let mut alpha = Vec::new();
    for (k, label) in design.columns.iter().enumerate() {
        let est = Estimate {
            value: ols.coefficients[k],
            std_error: ols.std_errors[k],
        };
        match label {
            ColumnLabel::Landscape(c) => landscape.push((*c, est)),
            ColumnLabel::Weather { name, lag } => weather.push(WeatherEstimate {
                name: name.clone(),
                lag: *lag,
                estimate: est,
            }),
            ColumnLabel::Density => density = Some(est),
            ColumnLabel::Alpha(u) => alpha.push((u.clone(), est)),
            ColumnLabel::AlphaShared => alpha.push(("*".to_string(), est)),
        }
    }
    Ok(TsirFit {
        landscape,
        weather,
        density: density.expect("design always has a density column"),
        alpha,
        alpha_mode: design.spec.alpha_mode,
        zero_policy: design.spec.zero_policy,
        r2: ols.r2,
        adjusted_r2: ols.adjusted_r2,
        n_rows: ols.n,
        n_params: ols.p,
        rows: design.rows.clone(),
        observed: design.y.clone(),
        fitted: ols.fitted,
        residuals: ols.residuals,
    })
}

/// Inputs for a one-step prediction in one unit at biweek `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct TsirState<T> {
    pub unit: String,
    pub infected: T,
    pub susceptible: T,
    pub population: T,
    /// Coverage per class, aligned with `fit.landscape`.
    pub landscape: Vec<T>,
    /// `E_j(t − l_j)`, aligned with `fit.weather`.
    pub weather: Vec<T>,
    pub density: T,
}

/// Conditional median of `I(t+1)`:
/// `exp(log β̂ + α̂ log I(t) + log S(t) − log N(t))`.
pub fn predict_next<T: Real>(fit: &TsirFit<T>, state: &TsirState<T>) -> Result<T> {
    if state.weather.len() != fit.weather.len() {
        let missing = &fit.weather[state.weather.len().min(fit.weather.len().saturating_sub(1))];
        return Err(EpiError::MissingCovariate {
            name: missing.name.clone(),
            lag: missing.lag,
            t: 0,
        });
    }
    if state.landscape.len() != fit.landscape.len() {
        return Err(EpiError::Panel(format!(
            "{} landscape values for {} fitted classes",
            state.landscape.len(),
            fit.landscape.len()
        )));
    }
    let alpha = fit
        .alpha_for(&state.unit)
        .ok_or_else(|| EpiError::UnknownAlpha(state.unit.clone()))?;
    let log_beta = fit
        .landscape
        .iter()
        .zip(&state.landscape)
        .map(|((_, e), l)| e.value * *l)
        .chain(
            fit.weather
                .iter()
                .zip(&state.weather)
                .map(|(w, v)| w.estimate.value * *v),
        )
        .fold(fit.density.value * state.density, |a, b| a + b);
    let (log_i, shift) = match fit.zero_policy {
        ZeroPolicy::Drop => {
            if !(state.infected > T::zero()) {
                return Err(EpiError::Panel(format!(
                    "prediction needs I > 0 in unit {:?}",
                    state.unit
                )));
            }
            (state.infected.ln(), T::zero())
        }
        ZeroPolicy::AddOne => ((state.infected + T::one()).ln(), T::one()),
    };
    Ok((log_beta + alpha * log_i + state.susceptible.ln() - state.population.ln()).exp() - shift)
}

/// Reads the prediction inputs for `unit` at biweek `t` out of a panel.
pub fn state_at<T: Real>(
    fit: &TsirFit<T>,
    panel: &EpidemicPanel<T>,
    coverage: &CoverageMatrix<T>,
    unit: &str,
    t: usize,
) -> Result<TsirState<T>> {
    let u = panel
        .unit_index(unit)
        .ok_or_else(|| EpiError::UnknownUnit(unit.to_string()))?;
    let series = &panel.units()[u];
    if t >= panel.n_biweeks() {
        return Err(EpiError::Panel(format!("biweek {t} beyond panel end")));
    }
    let landscape = fit
        .landscape
        .iter()
        .map(|(c, _)| {
            coverage
                .get(unit, *c)
                .ok_or_else(|| EpiError::MissingCoverage(unit.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let weather = fit
        .weather
        .iter()
        .map(|w| {
            let cov = panel
                .covariates()
                .iter()
                .find(|c| c.name == w.name)
                .ok_or_else(|| EpiError::MissingCovariate {
                    name: w.name.clone(),
                    lag: w.lag,
                    t,
                })?;
            t.checked_sub(w.lag)
                .map(|k| cov.values[k])
                .ok_or_else(|| EpiError::MissingCovariate {
                    name: w.name.clone(),
                    lag: w.lag,
                    t,
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TsirState {
        unit: unit.to_string(),
        infected: series.infected[t],
        susceptible: series.susceptible[t],
        population: series.population[t],
        landscape,
        weather,
        density: panel.density(u)[t],
    })
}
