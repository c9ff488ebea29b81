use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{GeoError, Result, SpatialUnit};
use crate::raster::{LandscapeClass, ProbabilityRaster};
use crate::Real;

/// How a unit's pixels are turned into a coverage fraction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageMode {
    /// Share of pixels whose probability is at least the threshold.
    #[default]
    Threshold,
    /// Mean probability over the unit's pixels.
    MeanProbability,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coverage<T> {
    pub fraction: T,
    pub positive: u64,
    pub total: u64,
}

/// Fails on the first pair of rasters whose boxes share positive area.
pub fn detect_overlap<T: Real>(rasters: &[ProbabilityRaster<T>]) -> Result<()> {
    let mut order: Vec<usize> = (0..rasters.len()).collect();
    order.sort_by(|&a, &b| {
        let (ga, gb) = (rasters[a].georef(), rasters[b].georef());
        ga.lon_min.total_cmp(&gb.lon_min).then(a.cmp(&b))
    });
    for (k, &i) in order.iter().enumerate() {
        let gi = rasters[i].georef();
        for &j in &order[k + 1..] {
            let gj = rasters[j].georef();
            if gj.lon_min >= gi.lon_max {
                break;
            }
            if gi.overlaps(gj) {
                let (first, second) = (i.min(j), i.max(j));
                return Err(GeoError::Overlap {
                    first,
                    second,
                    first_bbox: rasters[first].georef().bbox(),
                    second_bbox: rasters[second].georef().bbox(),
                });
            }
        }
    }
    Ok(())
}

fn check_threshold<T: Real>(threshold: T) -> Result<()> {
    if threshold >= T::zero() && threshold <= T::one() {
        Ok(())
    } else {
        Err(GeoError::Threshold(threshold.as_f64()))
    }
}

// Tallies without the overlap check; shared by `coverage` and
// `coverage_matrix`, which checks once per class.
fn tally<T: Real>(
    rasters: &[ProbabilityRaster<T>],
    unit: &SpatialUnit<T>,
    threshold: T,
) -> (u64, u64, T) {
    let [ux0, uy0, ux1, uy1] = unit.bbox().map(|v| v.as_f64());
    let mut positive = 0u64;
    let mut total = 0u64;
    let mut prob_sum = T::zero();
    for r in rasters {
        let g = r.georef();
        if ux1 < g.lon_min || ux0 > g.lon_max || uy1 < g.lat_min || uy0 > g.lat_max {
            continue;
        }
        let (pw, ph) = (g.pixel_width(), g.pixel_height());
        // candidate window, widened by one pixel; membership is decided per pixel below
        let col_lo = (((ux0 - g.lon_min) / pw - 0.5).floor() - 1.0).max(0.0) as usize;
        let col_hi = (((ux1 - g.lon_min) / pw - 0.5).ceil() + 1.0).min(g.width as f64 - 1.0);
        let row_lo = (((g.lat_max - uy1) / ph - 0.5).floor() - 1.0).max(0.0) as usize;
        let row_hi = (((g.lat_max - uy0) / ph - 0.5).ceil() + 1.0).min(g.height as f64 - 1.0);
        if col_hi < 0.0 || row_hi < 0.0 {
            continue;
        }
        for row in row_lo..=row_hi as usize {
            for col in col_lo..=col_hi as usize {
                let (lon, lat) = g.pixel_center(col, row);
                if unit.contains((T::lit(lon), T::lit(lat))) {
                    let p = r.get(col, row);
                    total += 1;
                    prob_sum = prob_sum + p;
                    if p >= threshold {
                        positive += 1;
                    }
                }
            }
        }
    }
    (positive, total, prob_sum)
}

/// Coverage of one class over one unit, counting pixels by centre
/// containment.
pub fn coverage<T: Real>(
    rasters: &[ProbabilityRaster<T>],
    unit: &SpatialUnit<T>,
    threshold: T,
    mode: CoverageMode,
) -> Result<Coverage<T>> {
    check_threshold(threshold)?;
    detect_overlap(rasters)?;
    finish(tally(rasters, unit, threshold), unit, mode)
}

fn finish<T: Real>(
    (positive, total, prob_sum): (u64, u64, T),
    unit: &SpatialUnit<T>,
    mode: CoverageMode,
) -> Result<Coverage<T>> {
    if total == 0 {
        return Err(GeoError::ZeroTotal(unit.id().to_string()));
    }
    let denom = T::lit(total as f64);
    let fraction = match mode {
        CoverageMode::Threshold => T::lit(positive as f64) / denom,
        CoverageMode::MeanProbability => prob_sum / denom,
    };
    Ok(Coverage {
        fraction,
        positive,
        total,
    })
}

/// `L[i][a]`: fraction of unit `i` covered by class `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverageMatrix<T> {
    units: Vec<String>,
    classes: Vec<LandscapeClass>,
    values: Vec<Vec<T>>,
    counts: Vec<Vec<(u64, u64)>>,
}

impl<T: Real> CoverageMatrix<T> {
    /// `values[i][a]` must lie in [0, 1] and every total must be positive.
    pub fn new(
        units: Vec<String>,
        classes: Vec<LandscapeClass>,
        values: Vec<Vec<T>>,
        counts: Vec<Vec<(u64, u64)>>,
    ) -> Result<Self> {
        let err = |m: String| Err(GeoError::Matrix(m));
        if values.len() != units.len() || counts.len() != units.len() {
            return err(format!(
                "{} units but {} value rows",
                units.len(),
                values.len()
            ));
        }
        for (i, (row, crow)) in values.iter().zip(&counts).enumerate() {
            if row.len() != classes.len() || crow.len() != classes.len() {
                return err(format!(
                    "row {i} has {} entries for {} classes",
                    row.len(),
                    classes.len()
                ));
            }
            for (a, (v, (pos, tot))) in row.iter().zip(crow).enumerate() {
                if !(*v >= T::zero() && *v <= T::one()) {
                    return err(format!(
                        "L[{}][{}] = {v} outside [0, 1]",
                        units[i], classes[a]
                    ));
                }
                if *tot == 0 || pos > tot {
                    return err(format!(
                        "bad tallies {pos}/{tot} for {}/{}",
                        units[i], classes[a]
                    ));
                }
            }
        }
        let mut seen = units.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != units.len() {
            return err("duplicate unit ids".into());
        }
        Ok(Self {
            units,
            classes,
            values,
            counts,
        })
    }

    /// Thresholded matrix built from exact `positive / total` ratios.
    pub fn from_counts(
        units: Vec<String>,
        classes: Vec<LandscapeClass>,
        counts: Vec<Vec<(u64, u64)>>,
    ) -> Result<Self> {
        let values = counts
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&(p, t)| T::lit(p as f64) / T::lit(t.max(1) as f64))
                    .collect()
            })
            .collect();
        Self::new(units, classes, values, counts)
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    pub fn classes(&self) -> &[LandscapeClass] {
        &self.classes
    }

    pub fn values(&self) -> &[Vec<T>] {
        &self.values
    }

    pub fn counts(&self) -> &[Vec<(u64, u64)>] {
        &self.counts
    }

    pub fn unit_index(&self, unit: &str) -> Option<usize> {
        self.units.iter().position(|u| u == unit)
    }

    pub fn class_index(&self, class: LandscapeClass) -> Option<usize> {
        self.classes.iter().position(|c| *c == class)
    }

    pub fn get(&self, unit: &str, class: LandscapeClass) -> Option<T> {
        Some(self.values[self.unit_index(unit)?][self.class_index(class)?])
    }

    /// Copy with column `class` multiplied by `factor`; tallies are kept.
    /// Values may leave [0, 1], so this bypasses validation.
    pub fn scaled_class(&self, class: LandscapeClass, factor: T) -> Self {
        let mut out = self.clone();
        if let Some(a) = self.class_index(class) {
            for row in &mut out.values {
                row[a] = row[a] * factor;
            }
        }
        out
    }
}

/// Coverage for every (unit, class). Units that contain no pixel centre are
/// dropped with a warning.
pub fn coverage_matrix<T: Real>(
    rasters_by_class: &BTreeMap<LandscapeClass, Vec<ProbabilityRaster<T>>>,
    classes: &[LandscapeClass],
    units: &[SpatialUnit<T>],
    threshold: T,
    mode: CoverageMode,
) -> Result<CoverageMatrix<T>> {
    check_threshold(threshold)?;
    for &class in classes {
        let rasters = rasters_by_class
            .get(&class)
            .filter(|r| !r.is_empty())
            .ok_or(GeoError::MissingClass(class))?;
        if let Some(r) = rasters.iter().find(|r| r.class() != class) {
            return Err(GeoError::ClassMismatch {
                expected: class,
                found: r.class(),
            });
        }
        detect_overlap(rasters)?;
    }

    let rows: Vec<Option<Vec<Coverage<T>>>> = units
        .par_iter()
        .map(|unit| {
            let mut row = Vec::with_capacity(classes.len());
            for class in classes {
                let counts = tally(&rasters_by_class[class], unit, threshold);
                match finish(counts, unit, mode) {
                    Ok(c) => row.push(c),
                    Err(_) => return None,
                }
            }
            Some(row)
        })
        .collect();

    let mut ids = Vec::new();
    let mut values = Vec::new();
    let mut counts = Vec::new();
    for (unit, row) in units.iter().zip(rows) {
        match row {
            Some(row) => {
                ids.push(unit.id().to_string());
                values.push(row.iter().map(|c| c.fraction).collect());
                counts.push(row.iter().map(|c| (c.positive, c.total)).collect());
            }
            None => log::warn!("unit {} covers no raster pixels; dropped", unit.id()),
        }
    }
    CoverageMatrix::new(ids, classes.to_vec(), values, counts)
}
