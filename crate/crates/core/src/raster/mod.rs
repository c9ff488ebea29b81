//! Segmentation rasters: tiling, normalization, binarization, metrics and
//! the PGM + JSON sidecar exchange format.

mod io;
mod metrics;
mod stats;
mod tensor;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Real;

pub use io::{load_raster, read_pgm, read_sidecar, save_raster, write_pgm, Sidecar};
pub use metrics::{
    binarize, binary_cross_entropy, jaccard, segmentation_loss, JaccardMode, MetricSums,
    BCE_EPSILON, JACCARD_FLOOR,
};
pub use stats::{compute_stats, normalize, ChannelStats, STD_EPSILON};
pub use tensor::{tile, untile, ImageTensor};

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("invalid image shape: {0}")]
    Shape(String),
    #[error("{width}x{height} image is not divisible into {tile_size}-pixel tiles")]
    NotDivisible {
        width: usize,
        height: usize,
        tile_size: usize,
    },
    #[error("tile {index} is {got_w}x{got_h}x{got_c}, expected {want_w}x{want_h}x{want_c}")]
    TileMismatch {
        index: usize,
        got_w: usize,
        got_h: usize,
        got_c: usize,
        want_w: usize,
        want_h: usize,
        want_c: usize,
    },
    #[error("expected {expected} tiles for the grid, got {got}")]
    TileCount { expected: usize, got: usize },
    #[error("empty image collection")]
    EmptyCollection,
    #[error("channel mismatch: {0} vs {1}")]
    ChannelMismatch(usize, usize),
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("probability {value} at index {index} outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("hard Jaccard needs binary maps; found {value} at index {index}")]
    NotBinary { index: usize, value: f64 },
    #[error("threshold {0} outside [0, 1]")]
    Threshold(f64),
    #[error("unknown landscape class {0:?}")]
    UnknownClass(String),
    #[error("invalid georeference: {0}")]
    GeoReference(String),
    #[error("malformed PGM: {0}")]
    Pgm(String),
    #[error("sidecar {path}: {message}")]
    Sidecar { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = RasterError> = std::result::Result<T, E>;

/// The six landscape classes, in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LandscapeClass {
    Buildings,
    Roads,
    Trees,
    Crops,
    Waterway,
    StandingWater,
}

impl LandscapeClass {
    pub const ALL: [LandscapeClass; 6] = [
        LandscapeClass::Buildings,
        LandscapeClass::Roads,
        LandscapeClass::Trees,
        LandscapeClass::Crops,
        LandscapeClass::Waterway,
        LandscapeClass::StandingWater,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LandscapeClass::Buildings => "buildings",
            LandscapeClass::Roads => "roads",
            LandscapeClass::Trees => "trees",
            LandscapeClass::Crops => "crops",
            LandscapeClass::Waterway => "waterway",
            LandscapeClass::StandingWater => "standing_water",
        }
    }
}

impl fmt::Display for LandscapeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LandscapeClass {
    type Err = RasterError;

    fn from_str(s: &str) -> Result<Self> {
        LandscapeClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| RasterError::UnknownClass(s.to_string()))
    }
}

/// Axis-aligned linear mapping between pixel indices and lon/lat degrees.
/// Pixel (0, 0) is the north-west corner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeoReference {
    pub lon_min: f64,
    pub lat_min: f64,
    pub lon_max: f64,
    pub lat_max: f64,
    pub width: usize,
    pub height: usize,
}

impl GeoReference {
    pub fn new(bbox: [f64; 4], width: usize, height: usize) -> Result<Self> {
        let [lon_min, lat_min, lon_max, lat_max] = bbox;
        if !bbox.iter().all(|v| v.is_finite()) {
            return Err(RasterError::GeoReference("non-finite bbox".into()));
        }
        if lon_min >= lon_max || lat_min >= lat_max {
            return Err(RasterError::GeoReference(format!(
                "bbox {bbox:?} must have min < max on both axes"
            )));
        }
        if width == 0 || height == 0 {
            return Err(RasterError::GeoReference("zero-sized grid".into()));
        }
        Ok(Self {
            lon_min,
            lat_min,
            lon_max,
            lat_max,
            width,
            height,
        })
    }

    pub fn bbox(&self) -> [f64; 4] {
        [self.lon_min, self.lat_min, self.lon_max, self.lat_max]
    }

    pub fn pixel_width(&self) -> f64 {
        (self.lon_max - self.lon_min) / self.width as f64
    }

    pub fn pixel_height(&self) -> f64 {
        (self.lat_max - self.lat_min) / self.height as f64
    }

    /// (lon, lat) of the centre of pixel (`col`, `row`).
    pub fn pixel_center(&self, col: usize, row: usize) -> (f64, f64) {
        let lon = self.lon_min + (col as f64 + 0.5) * self.pixel_width();
        let lat = self.lat_max - (row as f64 + 0.5) * self.pixel_height();
        (lon, lat)
    }

    /// Same grid shifted by (`dlon`, `dlat`).
    pub fn translated(&self, dlon: f64, dlat: f64) -> Self {
        Self {
            lon_min: self.lon_min + dlon,
            lon_max: self.lon_max + dlon,
            lat_min: self.lat_min + dlat,
            lat_max: self.lat_max + dlat,
            ..*self
        }
    }

    /// True when the two boxes share a region of positive area.
    pub fn overlaps(&self, other: &GeoReference) -> bool {
        let dx = self.lon_max.min(other.lon_max) - self.lon_min.max(other.lon_min);
        let dy = self.lat_max.min(other.lat_max) - self.lat_min.max(other.lat_min);
        dx > 0.0 && dy > 0.0
    }
}

/// One-channel grid of per-pixel class probabilities with its georeference.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityRaster<T> {
    grid: ImageTensor<T>,
    georef: GeoReference,
    class: LandscapeClass,
}

impl<T: Real> ProbabilityRaster<T> {
    pub fn new(grid: ImageTensor<T>, georef: GeoReference, class: LandscapeClass) -> Result<Self> {
        if grid.channels() != 1 {
            return Err(RasterError::Shape(format!(
                "probability raster needs 1 channel, got {}",
                grid.channels()
            )));
        }
        if grid.width() != georef.width || grid.height() != georef.height {
            return Err(RasterError::DimensionMismatch(
                grid.width(),
                grid.height(),
                georef.width,
                georef.height,
            ));
        }
        if let Some((index, v)) = grid
            .values()
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= T::zero() && **v <= T::one()))
        {
            return Err(RasterError::OutOfRange {
                index,
                value: v.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self {
            grid,
            georef,
            class,
        })
    }

    /// Builds a raster whose values are already known to lie in [0, 1].
    pub(crate) fn from_parts_unchecked(
        grid: ImageTensor<T>,
        georef: GeoReference,
        class: LandscapeClass,
    ) -> Self {
        Self {
            grid,
            georef,
            class,
        }
    }

    pub fn grid(&self) -> &ImageTensor<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        self.grid.values()
    }

    pub fn georef(&self) -> &GeoReference {
        &self.georef
    }

    pub fn class(&self) -> LandscapeClass {
        self.class
    }

    pub fn width(&self) -> usize {
        self.grid.width()
    }

    pub fn height(&self) -> usize {
        self.grid.height()
    }

    pub fn get(&self, col: usize, row: usize) -> T {
        self.grid.get(col, row, 0)
    }

    pub fn with_georef(mut self, georef: GeoReference) -> Result<Self> {
        if georef.width != self.width() || georef.height != self.height() {
            return Err(RasterError::DimensionMismatch(
                self.width(),
                self.height(),
                georef.width,
                georef.height,
            ));
        }
        self.georef = georef;
        Ok(self)
    }
}
