use std::collections::BTreeMap;

use landscape_tsir::geo::{coverage, coverage_matrix, CoverageMode, GeoError};
use landscape_tsir::raster::ImageTensor;
use landscape_tsir::{GeoReference, LandscapeClass, ProbabilityRaster, SpatialUnit};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Star-shaped ring around `(cx, cy)`, optionally with a hole.
fn random_unit(rng: &mut ChaCha8Rng, id: &str, cx: f64, cy: f64, r: f64) -> SpatialUnit {
    let k = rng.random_range(3..9);
    let mut angles: Vec<f64> = (0..k)
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect();
    angles.sort_by(f64::total_cmp);
    let outer: Vec<(f64, f64)> = angles
        .iter()
        .map(|a| {
            let rad = rng.random_range(0.5 * r..r);
            (cx + rad * a.cos(), cy + rad * a.sin())
        })
        .collect();
    let mut rings = vec![outer];
    if rng.random_bool(0.3) {
        let h = 0.2 * r;
        rings.push(vec![
            (cx - h, cy - h),
            (cx + h, cy - h),
            (cx + h, cy + h),
            (cx - h, cy + h),
        ]);
    }
    SpatialUnit::new(id, rings, 1.0).expect("non-degenerate ring")
}

/// A row of non-overlapping rasters with random sizes and values.
fn random_rasters(rng: &mut ChaCha8Rng, class: LandscapeClass) -> Vec<ProbabilityRaster> {
    let n = rng.random_range(1..4);
    let mut lon = 0.0;
    (0..n)
        .map(|_| {
            let (w, h) = (rng.random_range(4..24), rng.random_range(4..24));
            let (dx, dy) = (rng.random_range(0.2..1.0), rng.random_range(0.5..1.5));
            let values = (0..w * h)
                .map(|_| {
                    if rng.random_bool(0.2) {
                        1.0
                    } else {
                        rng.random::<f64>()
                    }
                })
                .collect();
            let g = GeoReference::new([lon, 0.0, lon + dx, dy], w, h).unwrap();
            lon += dx;
            ProbabilityRaster::new(ImageTensor::new(w, h, 1, values).unwrap(), g, class).unwrap()
        })
        .collect()
}

/// Every pixel of every raster, tested one by one.
fn naive(rasters: &[ProbabilityRaster], unit: &SpatialUnit, threshold: f64) -> (u64, u64, f64) {
    let (mut pos, mut tot, mut sum) = (0, 0, 0.0);
    for r in rasters {
        for row in 0..r.height() {
            for col in 0..r.width() {
                if unit.contains(r.georef().pixel_center(col, row)) {
                    tot += 1;
                    sum += r.get(col, row);
                    if r.get(col, row) >= threshold {
                        pos += 1;
                    }
                }
            }
        }
    }
    (pos, tot, sum)
}

fn instance(seed: u64) -> (Vec<ProbabilityRaster>, SpatialUnit, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rasters = random_rasters(&mut rng, LandscapeClass::Buildings);
    let extent = rasters.last().unwrap().georef().lon_max;
    let cx = rng.random_range(0.0..extent);
    let cy = rng.random_range(0.0..1.0);
    let r = rng.random_range(0.05..0.8);
    let unit = random_unit(&mut rng, "u", cx, cy, r);
    let threshold = rng.random_range(0.05..1.0);
    (rasters, unit, threshold)
}

#[test]
fn matches_naive_enumeration_on_random_instances() {
    let mut nonempty = 0;
    for seed in 0..100 {
        let (rasters, unit, threshold) = instance(seed);
        let (pos, tot, sum) = naive(&rasters, &unit, threshold);
        match coverage(&rasters, &unit, threshold, CoverageMode::Threshold) {
            Ok(c) => {
                nonempty += 1;
                assert_eq!((c.positive, c.total), (pos, tot), "seed {seed}");
                assert_eq!(c.fraction, pos as f64 / tot as f64);
                let m =
                    coverage(&rasters, &unit, threshold, CoverageMode::MeanProbability).unwrap();
                assert!((m.fraction - sum / tot as f64).abs() < 1e-12);
            }
            Err(GeoError::ZeroTotal(_)) => assert_eq!(tot, 0, "seed {seed}"),
            Err(e) => panic!("seed {seed}: {e}"),
        }
    }
    assert!(
        nonempty > 50,
        "too few instances touched any pixel: {nonempty}"
    );
}

proptest! {
    #[test]
    fn naive_equivalence_prop(seed in any::<u64>()) {
        let (rasters, unit, threshold) = instance(seed);
        let (pos, tot, _) = naive(&rasters, &unit, threshold);
        if let Ok(c) = coverage(&rasters, &unit, threshold, CoverageMode::Threshold) {
            prop_assert_eq!((c.positive, c.total), (pos, tot));
        } else {
            prop_assert_eq!(tot, 0);
        }
    }

    #[test]
    fn raster_order_does_not_matter(seed in any::<u64>()) {
        let (mut rasters, unit, threshold) = instance(seed);
        let a = coverage(&rasters, &unit, threshold, CoverageMode::Threshold).ok();
        rasters.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        let b = coverage(&rasters, &unit, threshold, CoverageMode::Threshold).ok();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn joint_translation_preserves_tallies(seed in any::<u64>(), kx in -64i32..64, ky in -64i32..64) {
        // dyadic shifts keep every coordinate exactly representable
        let (rasters, unit, threshold) = instance(seed);
        let (dx, dy) = (f64::from(kx) * 0.125, f64::from(ky) * 0.125);
        let moved: Vec<ProbabilityRaster> = rasters
            .iter()
            .map(|r| r.clone().with_georef(r.georef().translated(dx, dy)).unwrap())
            .collect();
        let a = coverage(&rasters, &unit, threshold, CoverageMode::Threshold).ok().map(|c| (c.positive, c.total));
        let b = coverage(&moved, &unit.translated(dx, dy), threshold, CoverageMode::Threshold).ok().map(|c| (c.positive, c.total));
        prop_assert_eq!(a, b);
    }
}

#[test]
fn matrix_agrees_with_per_cell_coverage() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let classes = [LandscapeClass::Buildings, LandscapeClass::Crops];
    let mut by_class = BTreeMap::new();
    for c in classes {
        by_class.insert(c, random_rasters(&mut rng, c));
    }
    let units: Vec<SpatialUnit> = (0..6)
        .map(|k| random_unit(&mut rng, &format!("u{k}"), 0.3 + 0.1 * k as f64, 0.5, 0.3))
        .collect();
    let m = coverage_matrix(&by_class, &classes, &units, 0.5, CoverageMode::Threshold).unwrap();
    for (i, id) in m.units().iter().enumerate() {
        let unit = units.iter().find(|u| u.id() == id).unwrap();
        for (a, c) in classes.iter().enumerate() {
            let cell = coverage(&by_class[c], unit, 0.5, CoverageMode::Threshold).unwrap();
            assert_eq!(m.counts()[i][a], (cell.positive, cell.total));
            assert_eq!(m.values()[i][a], cell.fraction);
        }
    }
}

#[test]
fn missing_class_is_named() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let by_class = BTreeMap::from([(
        LandscapeClass::Buildings,
        random_rasters(&mut rng, LandscapeClass::Buildings),
    )]);
    let unit = SpatialUnit::rectangle("u", [0.0, 0.0, 0.5, 0.5], 1.0).unwrap();
    let e = coverage_matrix(
        &by_class,
        &LandscapeClass::ALL,
        &[unit],
        0.5,
        CoverageMode::Threshold,
    )
    .unwrap_err();
    assert!(e.to_string().contains("roads"), "{e}");
}
