//! Landscape coverage aggregation and TSIR epidemic modelling.
//!
//! The crate turns per-class segmentation rasters into per-unit landscape
//! coverage fractions, assembles them with incidence, weather and population
//! series into the log-linear TSIR regression, and fits it by least squares.
//! A seeded forward simulator produces synthetic inputs with known
//! parameters so every stage can be checked against ground truth.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the pipeline uses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod epi;
pub mod geo;
pub mod linalg;
pub mod raster;
mod scalar;
pub mod synth;

pub use scalar::Real;

pub use raster::{GeoReference, LandscapeClass};

pub type ImageTensor = raster::ImageTensor<f64>;
pub type ImageTensorF32 = raster::ImageTensor<f32>;
pub type ProbabilityRaster = raster::ProbabilityRaster<f64>;
pub type ProbabilityRasterF32 = raster::ProbabilityRaster<f32>;
pub type ChannelStats = raster::ChannelStats<f64>;

pub type SpatialUnit = geo::SpatialUnit<f64>;
pub type CoverageMatrix = geo::CoverageMatrix<f64>;
pub type EpidemicPanel = epi::EpidemicPanel<f64>;
pub type Design = epi::Design<f64>;
pub type TsirFit = epi::TsirFit<f64>;
pub type OlsFit = linalg::OlsFit<f64>;
pub type AblationTable = epi::AblationTable<f64>;
