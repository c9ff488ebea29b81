use chrono::NaiveDate;

use super::{reconstruct_susceptibles, EpiError, Result, SusceptibleRule, WeatherBin};
use crate::Real;

pub const TEMPERATURE: &str = "temperature";
pub const RAIN_DAYS: &str = "rain_days";

/// A city-wide time-varying covariate `E_j(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Covariate<T> {
    pub name: String,
    pub values: Vec<T>,
}

impl<T: Real> Covariate<T> {
    /// The temperature and rain-day covariates, in that order.
    pub fn from_weather(bins: &[WeatherBin<T>]) -> Vec<Covariate<T>> {
        vec![
            Covariate {
                name: TEMPERATURE.into(),
                values: bins.iter().map(|b| b.mean_temp).collect(),
            },
            Covariate {
                name: RAIN_DAYS.into(),
                values: bins.iter().map(|b| b.rain_days).collect(),
            },
        ]
    }
}

/// Series of one spatial unit.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitSeries<T> {
    pub id: String,
    pub infected: Vec<T>,
    pub susceptible: Vec<T>,
    pub population: Vec<T>,
    pub area_km2: T,
}

/// Aligned biweekly series for every unit plus the shared covariates.
/// Density is derived as population / area.
#[derive(Clone, Debug, PartialEq)]
pub struct EpidemicPanel<T> {
    start: NaiveDate,
    n_biweeks: usize,
    units: Vec<UnitSeries<T>>,
    density: Vec<Vec<T>>,
    covariates: Vec<Covariate<T>>,
}

impl<T: Real> EpidemicPanel<T> {
    pub fn new(
        start: NaiveDate,
        units: Vec<UnitSeries<T>>,
        covariates: Vec<Covariate<T>>,
    ) -> Result<Self> {
        let n = covariates
            .first()
            .map(|c| c.values.len())
            .or_else(|| units.first().map(|u| u.infected.len()))
            .unwrap_or(0);
        let bad = |m: String| Err(EpiError::Panel(m));
        for c in &covariates {
            if c.values.len() != n {
                return bad(format!(
                    "covariate {} has {} values, expected {n}",
                    c.name,
                    c.values.len()
                ));
            }
        }
        let mut ids: Vec<&str> = units.iter().map(|u| u.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != units.len() {
            return bad("duplicate unit ids".into());
        }
        for u in &units {
            if u.infected.len() != n || u.susceptible.len() != n || u.population.len() != n {
                return bad(format!("unit {:?}: series lengths differ from {n}", u.id));
            }
            if !(u.area_km2 > T::zero()) {
                return bad(format!("unit {:?}: area must be positive", u.id));
            }
            for t in 0..n {
                let (i, s, p) = (u.infected[t], u.susceptible[t], u.population[t]);
                if !(p > T::zero()) {
                    return bad(format!(
                        "unit {:?}, biweek {t}: population {p} must be positive",
                        u.id
                    ));
                }
                if !(i >= T::zero()) || !(s >= T::zero()) || s > p {
                    return bad(format!(
                        "unit {:?}, biweek {t}: need I ≥ 0 and 0 ≤ S ≤ N (I={i}, S={s}, N={p})",
                        u.id
                    ));
                }
            }
        }
        let density = units
            .iter()
            .map(|u| u.population.iter().map(|p| *p / u.area_km2).collect())
            .collect();
        Ok(Self {
            start,
            n_biweeks: n,
            units,
            density,
            covariates,
        })
    }

    /// Builds a panel from incidence and population, reconstructing the
    /// susceptibles with `rule`.
    pub fn assemble(
        start: NaiveDate,
        ids: &[String],
        infected: Vec<Vec<T>>,
        population: Vec<Vec<T>>,
        areas: &[T],
        covariates: Vec<Covariate<T>>,
        rule: &SusceptibleRule,
    ) -> Result<Self> {
        if infected.len() != ids.len() || population.len() != ids.len() || areas.len() != ids.len()
        {
            return Err(EpiError::Panel("per-unit inputs differ in length".into()));
        }
        let units = ids
            .iter()
            .zip(infected.into_iter().zip(population))
            .zip(areas)
            .map(|((id, (inf, pop)), area)| {
                let susceptible = reconstruct_susceptibles(id, &inf, &pop, rule)?;
                Ok(UnitSeries {
                    id: id.clone(),
                    infected: inf,
                    susceptible,
                    population: pop,
                    area_km2: *area,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(start, units, covariates)
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn n_biweeks(&self) -> usize {
        self.n_biweeks
    }

    pub fn units(&self) -> &[UnitSeries<T>] {
        &self.units
    }

    pub fn unit_ids(&self) -> Vec<String> {
        self.units.iter().map(|u| u.id.clone()).collect()
    }

    pub fn unit_index(&self, id: &str) -> Option<usize> {
        self.units.iter().position(|u| u.id == id)
    }

    pub fn density(&self, unit: usize) -> &[T] {
        &self.density[unit]
    }

    pub fn covariates(&self) -> &[Covariate<T>] {
        &self.covariates
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn date() -> NaiveDate {
        "2014-01-01".parse().unwrap()
    }

    #[test]
    fn density_is_population_over_area() {
        let p = EpidemicPanel::assemble(
            date(),
            &["a".into()],
            vec![vec![1.0, 2.0]],
            vec![vec![1000.0, 1200.0]],
            &[4.0],
            vec![],
            &SusceptibleRule::default(),
        )
        .unwrap();
        assert_eq!(p.density(0), &[250.0, 300.0]);
        assert_eq!(p.units()[0].susceptible, vec![100.0, 99.0]);
    }

    #[test]
    fn rejects_susceptibles_above_population() {
        let u = UnitSeries {
            id: "a".into(),
            infected: vec![1.0],
            susceptible: vec![20.0],
            population: vec![10.0],
            area_km2: 1.0,
        };
        assert!(EpidemicPanel::new(date(), vec![u], vec![]).is_err());
    }

    #[test]
    fn rejects_misaligned_covariates() {
        let u = UnitSeries {
            id: "a".into(),
            infected: vec![1.0, 1.0],
            susceptible: vec![5.0, 5.0],
            population: vec![10.0, 10.0],
            area_km2: 1.0,
        };
        let c = Covariate {
            name: "temperature".into(),
            values: vec![1.0],
        };
        assert!(EpidemicPanel::new(date(), vec![u], vec![c]).is_err());
    }
}
