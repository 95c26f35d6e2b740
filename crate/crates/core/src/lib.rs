//! Gowers uniformity norms of sets and nonnegative functions on discretized
//! `R^d` (d = 1, 2, 3), together with the rearrangement machinery needed to
//! compare a set with its symmetric decreasing rearrangement.
//!
//! Everything works on cell-centred grids ([`grid_core::GridSpec`]) holding
//! nonnegative samples ([`grid_core::GridFunction`]). Shapes are described
//! analytically ([`grid_core::ShapeSpec`]) and rasterized on demand.
//!
//! ```
//! use gowers_lab::grid_core::{rasterize, GridSpec, RasterOptions, ShapeSpec};
//! use gowers_lab::gowers::{gowers_norm, GowersOptions};
//!
//! let grid = GridSpec::new(1, 1.0, 512).unwrap();
//! let interval = rasterize(&ShapeSpec::interval(-0.5, 0.5), &grid, &RasterOptions::default()).unwrap();
//! let u2 = gowers_norm(&interval, 2, &GowersOptions::default()).unwrap();
//! assert!((u2.power_value - 2.0 / 3.0).abs() < 5e-3);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod autocorr;
pub mod error;
pub mod gowers;
pub mod grid_core;
pub mod multilinear;
pub mod numeric;
pub mod rearrange;
pub mod stability;

pub use error::{Error, Result};
