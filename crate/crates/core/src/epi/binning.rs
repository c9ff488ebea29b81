use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};

use super::{EpiError, Result};
use crate::Real;

pub const BIWEEK_DAYS: u64 = 14;

/// Complete biweeks in the inclusive range `start ..= end`.
pub fn biweek_count(start: NaiveDate, end: NaiveDate) -> usize {
    if end < start {
        return 0;
    }
    let days = (end - start).num_days() as u64 + 1;
    (days / BIWEEK_DAYS) as usize
}

pub fn biweek_start(start: NaiveDate, k: usize) -> NaiveDate {
    start + Days::new(k as u64 * BIWEEK_DAYS)
}

fn retained(start: NaiveDate, end: NaiveDate) -> Result<usize> {
    match biweek_count(start, end) {
        0 => Err(EpiError::EmptyRange { start, end }),
        n => Ok(n),
    }
}

/// Per-unit biweekly case counts. Interval `k` covers days
/// `[start + 14k, start + 14(k+1))`; events in a trailing partial interval
/// are dropped, events outside `start ..= end` are an error.
pub fn bin_cases<T: Real>(
    events: &[(String, NaiveDate, T)],
    units: &[String],
    start: NaiveDate,
    end: NaiveDate,
) -> Result<Vec<Vec<T>>> {
    let n = retained(start, end)?;
    let index: BTreeMap<&str, usize> = units
        .iter()
        .enumerate()
        .map(|(i, u)| (u.as_str(), i))
        .collect();
    let mut bins = vec![vec![T::zero(); n]; units.len()];
    for (unit, date, count) in events {
        let i = *index
            .get(unit.as_str())
            .ok_or_else(|| EpiError::UnknownUnit(unit.clone()))?;
        if *date < start || *date > end {
            return Err(EpiError::OutOfRange {
                unit: unit.clone(),
                date: *date,
                start,
                end,
            });
        }
        let k = ((*date - start).num_days() as u64 / BIWEEK_DAYS) as usize;
        if k < n {
            bins[i][k] = bins[i][k] + *count;
        }
    }
    Ok(bins)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeatherBin<T> {
    pub mean_temp: T,
    /// Days with precipitation above 0 mm.
    pub rain_days: T,
}

/// Biweekly mean temperature and rain-day count. Every day of every retained
/// biweek must be present in both series.
pub fn bin_weather<T: Real>(
    daily_temp: &[(NaiveDate, T)],
    daily_rain: &[(NaiveDate, T)],
    start: NaiveDate,
    end: NaiveDate,
) -> Result<Vec<WeatherBin<T>>> {
    let n = retained(start, end)?;
    let index = |series: &[(NaiveDate, T)]| -> Result<BTreeMap<NaiveDate, T>> {
        let mut m = BTreeMap::new();
        for (d, v) in series {
            if m.insert(*d, *v).is_some() {
                return Err(EpiError::DuplicateWeatherDay(*d));
            }
        }
        Ok(m)
    };
    let temp = index(daily_temp)?;
    let rain = index(daily_rain)?;
    let fourteen = T::from_count(BIWEEK_DAYS as usize);
    (0..n)
        .map(|k| {
            let mut sum = T::zero();
            let mut wet = 0usize;
            for d in 0..BIWEEK_DAYS {
                let day = biweek_start(start, k) + Days::new(d);
                sum = sum + *temp.get(&day).ok_or(EpiError::MissingWeatherDay(day))?;
                if *rain.get(&day).ok_or(EpiError::MissingWeatherDay(day))? > T::zero() {
                    wet += 1;
                }
            }
            Ok(WeatherBin {
                mean_temp: sum / fourteen,
                rain_days: T::from_count(wet),
            })
        })
        .collect()
}

/// Population per unit and biweek: the latest record dated on or before the
/// biweek's first day.
pub fn population_series<T: Real>(
    records: &[(String, NaiveDate, T)],
    units: &[String],
    start: NaiveDate,
    n_biweeks: usize,
) -> Result<Vec<Vec<T>>> {
    let mut by_unit: BTreeMap<&str, BTreeMap<NaiveDate, T>> = units
        .iter()
        .map(|u| (u.as_str(), BTreeMap::new()))
        .collect();
    for (unit, date, pop) in records {
        by_unit
            .get_mut(unit.as_str())
            .ok_or_else(|| EpiError::UnknownUnit(unit.clone()))?
            .insert(*date, *pop);
    }
    units
        .iter()
        .map(|u| {
            let series = &by_unit[u.as_str()];
            (0..n_biweeks)
                .map(|k| {
                    let day = biweek_start(start, k);
                    series
                        .range(..=day)
                        .next_back()
                        .map(|(_, v)| *v)
                        .ok_or_else(|| EpiError::MissingPopulation {
                            unit: u.clone(),
                            date: day,
                        })
                })
                .collect()
        })
        .collect()
}
