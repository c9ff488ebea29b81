use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::Rng;

use super::{
    rng, Result, ScenarioConfig, SynthError, STREAM_LANDSCAPE, STREAM_RASTERS, STREAM_UNITS,
};
use crate::geo::CoverageMatrix;
use crate::raster::{GeoReference, ImageTensor, LandscapeClass, ProbabilityRaster};
use crate::SpatialUnit;

/// Square units laid out row by row on a grid `ceil(sqrt(n))` wide, with
/// areas drawn from the configured range.
pub fn gen_units(config: &ScenarioConfig) -> Result<Vec<SpatialUnit>> {
    let mut rng = rng(config.seed, STREAM_UNITS);
    let cols = (config.n_units as f64).sqrt().ceil() as usize;
    let r = &config.raster;
    let a = &config.area;
    config
        .unit_ids()
        .into_iter()
        .enumerate()
        .map(|(k, id)| {
            let lon0 = r.origin_lon + (k % cols) as f64 * r.unit_size_deg;
            let lat0 = r.origin_lat + (k / cols) as f64 * r.unit_size_deg;
            let area = rng.random_range(a.min_km2..=a.max_km2);
            SpatialUnit::rectangle(
                id,
                [lon0, lat0, lon0 + r.unit_size_deg, lat0 + r.unit_size_deg],
                area,
            )
            .map_err(SynthError::from)
        })
        .collect()
}

/// Coverage fractions drawn uniformly in [0, 1] and quantised to the pixel
/// grid of one tile, so that rasterising them reproduces the matrix exactly.
pub fn gen_landscape(
    config: &ScenarioConfig,
    units: &[SpatialUnit],
) -> Result<CoverageMatrix<f64>> {
    let mut rng = rng(config.seed, STREAM_LANDSCAPE);
    let total = (config.raster.tile_pixels * config.raster.tile_pixels) as u64;
    let counts = units
        .iter()
        .map(|_| {
            LandscapeClass::ALL
                .iter()
                .map(|_| {
                    let f: f64 = rng.random();
                    (((f * total as f64).round() as u64).min(total), total)
                })
                .collect()
        })
        .collect();
    let ids = units.iter().map(|u| u.id().to_string()).collect();
    Ok(CoverageMatrix::from_counts(
        ids,
        LandscapeClass::ALL.to_vec(),
        counts,
    )?)
}

/// A `width × height` probability grid with exactly `round(fraction · w · h)`
/// pixels at or above 0.5, at positions chosen by `rng`. Values are multiples
/// of 1/255 so the grid survives a PGM round trip unchanged.
pub fn rasterize_fraction(
    fraction: f64,
    width: usize,
    height: usize,
    rng: &mut impl Rng,
) -> ImageTensor<f64> {
    let n = width * height;
    let k = ((fraction.clamp(0.0, 1.0) * n as f64).round() as usize).min(n);
    let mut positive = vec![false; n];
    for i in sample(rng, n, k) {
        positive[i] = true;
    }
    let values = positive
        .into_iter()
        .map(|p| {
            let byte: u8 = if p {
                rng.random_range(128..=255)
            } else {
                rng.random_range(0..=127)
            };
            byte as f64 / 255.0
        })
        .collect();
    ImageTensor::new(width, height, 1, values).expect("shape matches")
}

/// One tile per unit and class, georeferenced to the unit's bounding box.
pub fn gen_rasters(
    config: &ScenarioConfig,
    units: &[SpatialUnit],
    coverage: &CoverageMatrix<f64>,
) -> Result<BTreeMap<LandscapeClass, Vec<ProbabilityRaster<f64>>>> {
    let mut rng = rng(config.seed, STREAM_RASTERS);
    let px = config.raster.tile_pixels;
    let mut out: BTreeMap<LandscapeClass, Vec<ProbabilityRaster<f64>>> = BTreeMap::new();
    for &class in coverage.classes() {
        let list = out.entry(class).or_default();
        for unit in units {
            let fraction = coverage
                .get(unit.id(), class)
                .ok_or_else(|| SynthError::Config(format!("no coverage for unit {}", unit.id())))?;
            let grid = rasterize_fraction(fraction, px, px, &mut rng);
            let georef = GeoReference::new(unit.bbox(), px, px)?;
            list.push(ProbabilityRaster::new(grid, georef, class)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{coverage_matrix, CoverageMode};

    #[test]
    fn quarter_fraction_gives_exact_pixel_count() {
        let mut r = rng(7, 0);
        let g = rasterize_fraction(0.25, 32, 32, &mut r);
        assert_eq!(g.values().iter().filter(|&&v| v >= 0.5).count(), 256);
        assert!(g.values().iter().all(|&v| (v * 255.0).round() == v * 255.0));
    }

    #[test]
    fn rasters_reproduce_matrix() {
        let config = ScenarioConfig {
            n_units: 5,
            ..Default::default()
        };
        let units = gen_units(&config).unwrap();
        let m = gen_landscape(&config, &units).unwrap();
        let rasters = gen_rasters(&config, &units, &m).unwrap();
        let back = coverage_matrix(
            &rasters,
            &LandscapeClass::ALL,
            &units,
            0.5,
            CoverageMode::Threshold,
        )
        .unwrap();
        assert_eq!(back.counts(), m.counts());
        assert_eq!(back.values(), m.values());
    }

    #[test]
    fn deterministic() {
        let config = ScenarioConfig::default();
        let units = gen_units(&config).unwrap();
        assert_eq!(
            gen_landscape(&config, &units).unwrap().values(),
            gen_landscape(&config, &units).unwrap().values()
        );
        let other = ScenarioConfig {
            seed: 43,
            ..Default::default()
        };
        assert_ne!(
            gen_landscape(&other, &units).unwrap().values(),
            gen_landscape(&config, &units).unwrap().values()
        );
    }
}
