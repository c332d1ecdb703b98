//! Photomapping from downward-looking aerial image sequences.

// `!(x > 0.0)` is used on purpose so NaN falls into the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod imageio;
pub mod preprocess;
pub mod raster;
pub mod registration;
pub mod texture;
pub mod flightsim;
pub mod photomap;
pub mod cli;
