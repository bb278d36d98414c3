//! Circle detection by Discrete Differential Evolution over edge-point triplets.
//!
//! An image is reduced to a binary edge map whose pixels, enumerated in
//! row-major order, form the search space. Each individual of the population
//! is a triplet of indices into that array; the three pixels define a unique
//! circle, which is rasterized with the midpoint circle algorithm and scored
//! by the fraction of its raster that is *not* supported by edge pixels.
//!
//! Modules, bottom-up:
//!
//! * [`pnm`] – Netpbm (PGM/PBM) codecs and the [`GrayImage`] type.
//! * [`edges`] – [`EdgeMap`] and the built-in Canny detector.
//! * [`geometry`] – three-point circles and midpoint rasterization.
//! * [`dde`] – the generic integer optimizer.
//! * [`detector`] – the circle objective and single/multi-circle detection.
//! * [`evaluation`] – error score, synthetic scenes and the benchmark runner.
//!
//! With the default `parallel` feature, per-generation objective evaluations
//! and independent benchmark runs are fanned out with rayon. Disabling the
//! feature (or setting `parallel = false` in the configs) runs everything on
//! the calling thread with bit-identical results.

pub mod dde;
pub mod detector;
pub mod edges;
pub mod evaluation;
pub mod geometry;
pub mod par;
pub mod pnm;

pub use dde::{evolve, DdeConfig, DdeError, EvolutionResult, Objective};
pub use detector::{
    approximate_shape, detect_circle, detect_multiple, DetectError, Detection, DetectorConfig,
};
pub use edges::{canny_edges, load_edge_map, save_edge_map, CannyParams, EdgeMap};
pub use evaluation::{error_score, is_success, BenchReport, GroundTruth, ScoreWeights};
pub use geometry::{circle_from_points, rasterize_circle, Circle, GeometryError, TestPointSet};
pub use pnm::{load_gray_image, GrayImage, PnmError};

/// Integer pixel coordinate `(x, y)`: x is the column, y the row, origin top-left.
pub type Pixel = (i32, i32);
