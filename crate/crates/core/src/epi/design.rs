use std::fmt;

use serde::{Deserialize, Serialize};

use super::{EpiError, EpidemicPanel, Result};
use crate::geo::CoverageMatrix;
use crate::linalg::Matrix;
use crate::raster::LandscapeClass;
use crate::Real;

/// Treatment of biweeks with zero incidence, where the log is undefined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroPolicy {
    /// Drop rows with `I(t) = 0` or `I(t+1) = 0`.
    #[default]
    Drop,
    /// Use `I + 1` in both logs and keep every row.
    AddOne,
}

/// Whether the mixing exponent is estimated per unit or once per city.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMode {
    #[default]
    PerUnit,
    Shared,
}

/// Which covariates and units enter the regression.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub classes: Vec<LandscapeClass>,
    /// One lag (in biweeks) per panel covariate, in panel order.
    pub lags: Vec<usize>,
    pub zero_policy: ZeroPolicy,
    pub alpha_mode: AlphaMode,
    /// Restrict to these units; `None` keeps every panel unit.
    pub units: Option<Vec<String>>,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            classes: LandscapeClass::ALL.to_vec(),
            lags: vec![1, 1],
            zero_policy: ZeroPolicy::Drop,
            alpha_mode: AlphaMode::PerUnit,
            units: None,
        }
    }
}

impl ModelSpec {
    pub fn with_classes(&self, classes: &[LandscapeClass]) -> Self {
        Self {
            classes: classes.to_vec(),
            ..self.clone()
        }
    }

    pub fn with_units(&self, units: Option<Vec<String>>) -> Self {
        Self {
            units,
            ..self.clone()
        }
    }

    pub fn with_lags(&self, lags: Vec<usize>) -> Self {
        Self {
            lags,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColumnLabel {
    Landscape(LandscapeClass),
    Weather { name: String, lag: usize },
    Density,
    Alpha(String),
    AlphaShared,
}

impl fmt::Display for ColumnLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnLabel::Landscape(c) => write!(f, "landscape:{c}"),
            ColumnLabel::Weather { name, lag } => write!(f, "weather:{name}[t-{lag}]"),
            ColumnLabel::Density => f.write_str("density"),
            ColumnLabel::Alpha(u) => write!(f, "alpha:{u}"),
            ColumnLabel::AlphaShared => f.write_str("alpha"),
        }
    }
}

/// Regression inputs: `y = log I(t+1) + log N(t) − log S(t)` against
/// `[L_a…, E_j(t − l_j)…, D(t), α block]`, one row per retained (unit, t).
#[derive(Clone, Debug, PartialEq)]
pub struct Design<T> {
    pub x: Matrix<T>,
    pub y: Vec<T>,
    /// (unit id, biweek t) for every row.
    pub rows: Vec<(String, usize)>,
    pub columns: Vec<ColumnLabel>,
    pub spec: ModelSpec,
}

impl<T: Real> Design<T> {
    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(ToString::to_string).collect()
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_params(&self) -> usize {
        self.columns.len()
    }
}

fn log_count<T: Real>(v: T, policy: ZeroPolicy) -> Option<T> {
    match policy {
        ZeroPolicy::Drop if v > T::zero() => Some(v.ln()),
        ZeroPolicy::Drop => None,
        ZeroPolicy::AddOne => Some((v + T::one()).ln()),
    }
}

pub fn build_design<T: Real>(
    panel: &EpidemicPanel<T>,
    coverage: &CoverageMatrix<T>,
    spec: &ModelSpec,
) -> Result<Design<T>> {
    let covs = panel.covariates();
    if spec.lags.len() != covs.len() {
        return Err(EpiError::LagCount {
            expected: covs.len(),
            got: spec.lags.len(),
        });
    }
    let class_idx = spec
        .classes
        .iter()
        .map(|c| coverage.class_index(*c).ok_or(EpiError::MissingClass(*c)))
        .collect::<Result<Vec<_>>>()?;

    let unit_idx: Vec<usize> = match &spec.units {
        None => (0..panel.units().len()).collect(),
        Some(ids) => {
            let mut idx = ids
                .iter()
                .map(|id| {
                    panel
                        .unit_index(id)
                        .ok_or_else(|| EpiError::UnknownUnit(id.clone()))
                })
                .collect::<Result<Vec<_>>>()?;
            idx.sort_unstable();
            idx.dedup();
            idx
        }
    };

    let max_lag = spec.lags.iter().copied().max().unwrap_or(0);
    let n_t = panel.n_biweeks();
    let mut fixed_rows: Vec<Vec<T>> = Vec::new();
    let mut log_i: Vec<T> = Vec::new();
    let mut y = Vec::new();
    let mut rows = Vec::new();
    let mut row_unit = Vec::new();
    let mut alpha_units: Vec<usize> = Vec::new();

    for &u in &unit_idx {
        let series = &panel.units()[u];
        let cov_row = coverage
            .unit_index(&series.id)
            .ok_or_else(|| EpiError::MissingCoverage(series.id.clone()))?;
        let landscape: Vec<T> = class_idx
            .iter()
            .map(|&a| coverage.values()[cov_row][a])
            .collect();
        let mut any = false;
        for t in max_lag..n_t.saturating_sub(1) {
            let (Some(li), Some(li_next)) = (
                log_count(series.infected[t], spec.zero_policy),
                log_count(series.infected[t + 1], spec.zero_policy),
            ) else {
                continue;
            };
            let s = series.susceptible[t];
            if !(s > T::zero()) {
                return Err(EpiError::NonPositiveSusceptible {
                    unit: series.id.clone(),
                    t,
                    susceptible: s.as_f64(),
                });
            }
            let mut row = landscape.clone();
            row.extend(covs.iter().zip(&spec.lags).map(|(c, &l)| c.values[t - l]));
            row.push(panel.density(u)[t]);
            fixed_rows.push(row);
            log_i.push(li);
            y.push(li_next + series.population[t].ln() - s.ln());
            rows.push((series.id.clone(), t));
            row_unit.push(alpha_units.len());
            any = true;
        }
        if any {
            alpha_units.push(u);
        }
    }
    if y.is_empty() {
        return Err(EpiError::NoRows);
    }

    let mut columns: Vec<ColumnLabel> = spec
        .classes
        .iter()
        .map(|c| ColumnLabel::Landscape(*c))
        .collect();
    columns.extend(
        covs.iter()
            .zip(&spec.lags)
            .map(|(c, &lag)| ColumnLabel::Weather {
                name: c.name.clone(),
                lag,
            }),
    );
    columns.push(ColumnLabel::Density);
    let n_fixed = columns.len();
    match spec.alpha_mode {
        AlphaMode::PerUnit => columns.extend(
            alpha_units
                .iter()
                .map(|&u| ColumnLabel::Alpha(panel.units()[u].id.clone())),
        ),
        AlphaMode::Shared => columns.push(ColumnLabel::AlphaShared),
    }

    let mut x = Matrix::zeros(y.len(), columns.len());
    for (r, fixed) in fixed_rows.iter().enumerate() {
        for (c, v) in fixed.iter().enumerate() {
            x.set(r, c, *v);
        }
        let a = match spec.alpha_mode {
            AlphaMode::PerUnit => n_fixed + row_unit[r],
            AlphaMode::Shared => n_fixed,
        };
        x.set(r, a, log_i[r]);
    }
    Ok(Design {
        x,
        y,
        rows,
        columns,
        spec: spec.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epi::{Covariate, UnitSeries};

    fn one_unit(infected: Vec<f64>, temps: Vec<f64>) -> (EpidemicPanel<f64>, CoverageMatrix<f64>) {
        let n = infected.len();
        let u = UnitSeries {
            id: "u1".into(),
            infected,
            susceptible: vec![500.0; n],
            population: vec![1000.0; n],
            area_km2: 10.0,
        };
        let cov = Covariate {
            name: "temperature".into(),
            values: temps,
        };
        let panel = EpidemicPanel::new("2014-01-01".parse().unwrap(), vec![u], vec![cov]).unwrap();
        let m = CoverageMatrix::new(
            vec!["u1".into()],
            vec![LandscapeClass::Buildings],
            vec![vec![0.3]],
            vec![vec![(3, 10)]],
        )
        .unwrap();
        (panel, m)
    }

    fn spec(lag: usize) -> ModelSpec {
        ModelSpec {
            classes: vec![LandscapeClass::Buildings],
            lags: vec![lag],
            ..ModelSpec::default()
        }
    }

    #[test]
    fn hand_evaluated_row() {
        let (panel, cov) = one_unit(vec![10.0, 20.0], vec![25.0, 26.0]);
        let d = build_design(&panel, &cov, &spec(0)).unwrap();
        assert_eq!(d.n_rows(), 1);
        assert!((d.y[0] - 40f64.ln()).abs() < 1e-12);
        assert_eq!(d.x.row(0), &[0.3, 25.0, 100.0, 10f64.ln()]);
        assert_eq!(d.rows, vec![("u1".to_string(), 0)]);
        assert_eq!(
            d.column_names(),
            [
                "landscape:buildings",
                "weather:temperature[t-0]",
                "density",
                "alpha:u1"
            ]
        );
    }

    #[test]
    fn zero_incidence_rows_are_dropped_or_smoothed() {
        let (panel, cov) = one_unit(vec![10.0, 0.0, 5.0, 6.0], vec![25.0; 4]);
        let d = build_design(&panel, &cov, &spec(0)).unwrap();
        assert_eq!(d.rows.iter().map(|r| r.1).collect::<Vec<_>>(), vec![2]);
        let smooth = ModelSpec {
            zero_policy: ZeroPolicy::AddOne,
            ..spec(0)
        };
        let d = build_design(&panel, &cov, &smooth).unwrap();
        assert_eq!(d.n_rows(), 3);
        assert!((d.y[0] - (1f64.ln() + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn lag_skips_leading_biweeks() {
        let (panel, cov) = one_unit(vec![10.0; 6], vec![20.0, 21.0, 22.0, 23.0, 24.0, 25.0]);
        let d = build_design(&panel, &cov, &spec(2)).unwrap();
        assert_eq!(
            d.rows.iter().map(|r| r.1).collect::<Vec<_>>(),
            vec![2, 3, 4]
        );
        assert_eq!(d.x.get(0, 1), 20.0);
        assert_eq!(d.x.get(2, 1), 22.0);
    }

    #[test]
    fn errors() {
        let (panel, cov) = one_unit(vec![0.0, 0.0, 0.0], vec![25.0; 3]);
        assert!(matches!(
            build_design(&panel, &cov, &spec(0)),
            Err(EpiError::NoRows)
        ));
        let (panel, cov) = one_unit(vec![1.0; 3], vec![25.0; 3]);
        assert!(matches!(
            build_design(
                &panel,
                &cov,
                &ModelSpec {
                    lags: vec![],
                    ..spec(0)
                }
            ),
            Err(EpiError::LagCount {
                expected: 1,
                got: 0
            })
        ));
        assert!(matches!(
            build_design(
                &panel,
                &cov,
                &spec(0).with_classes(&[LandscapeClass::Crops])
            ),
            Err(EpiError::MissingClass(LandscapeClass::Crops))
        ));
        assert!(matches!(
            build_design(&panel, &cov, &spec(0).with_units(Some(vec!["zz".into()]))),
            Err(EpiError::UnknownUnit(_))
        ));
    }

    #[test]
    fn zero_susceptibles_rejected() {
        let u = UnitSeries {
            id: "u1".into(),
            infected: vec![1.0, 1.0],
            susceptible: vec![0.0, 0.0],
            population: vec![10.0, 10.0],
            area_km2: 1.0,
        };
        let panel = EpidemicPanel::new(
            "2014-01-01".parse().unwrap(),
            vec![u],
            vec![Covariate {
                name: "temperature".into(),
                values: vec![1.0, 1.0],
            }],
        )
        .unwrap();
        let (_, cov) = one_unit(vec![1.0], vec![1.0]);
        assert!(matches!(
            build_design(&panel, &cov, &spec(0)),
            Err(EpiError::NonPositiveSusceptible { t: 0, .. })
        ));
    }
}
