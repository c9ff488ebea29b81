//! Spatial units and landscape coverage fractions.

mod coverage;
mod geojson;
mod polygon;

use thiserror::Error;

pub use coverage::{
    coverage, coverage_matrix, detect_overlap, Coverage, CoverageMatrix, CoverageMode,
};
pub use geojson::{parse_units, read_units, units_to_geojson, write_units};
pub use polygon::SpatialUnit;

use crate::raster::{LandscapeClass, RasterError};

#[derive(Debug, Error)]
pub enum GeoError {
    #[error("unit {unit:?}: ring {ring} has {distinct} distinct vertices, need at least 3")]
    DegenerateRing {
        unit: String,
        ring: usize,
        distinct: usize,
    },
    #[error("unit {unit:?}: {message}")]
    InvalidUnit { unit: String, message: String },
    #[error("rasters {first} and {second} overlap: {first_bbox:?} vs {second_bbox:?}")]
    Overlap {
        first: usize,
        second: usize,
        first_bbox: [f64; 4],
        second_bbox: [f64; 4],
    },
    #[error("unit {0:?} contains no raster pixel centres")]
    ZeroTotal(String),
    #[error("no rasters supplied for class {0}")]
    MissingClass(LandscapeClass),
    #[error("raster of class {found} supplied under class {expected}")]
    ClassMismatch {
        expected: LandscapeClass,
        found: LandscapeClass,
    },
    #[error("threshold {0} outside [0, 1]")]
    Threshold(f64),
    #[error("coverage matrix: {0}")]
    Matrix(String),
    #[error("GeoJSON: {0}")]
    GeoJson(String),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = GeoError> = std::result::Result<T, E>;
