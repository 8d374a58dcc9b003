//! Command-line front end and HTTP service for the alternated Julia
//! connectivity atlas. The binary `altjulia` is a thin wrapper over [`cli::run`].

pub mod cli;
pub mod complex;
pub mod png_out;
pub mod server;

use altjulia_core::{Gradient, Rgb};

pub use complex::parse_complex;

/// Color of points whose orbit stays bounded in Julia renders.
pub const JULIA_INTERIOR: Rgb = [0, 0, 0];

/// Escape-time coloring for Julia renders: fast escapes are white, slow
/// escapes near the filled set shade towards deep blue.
pub const JULIA_GRADIENT: Gradient = Gradient {
    low: [255, 255, 255],
    high: [20, 40, 140],
    saturation: 32,
};
