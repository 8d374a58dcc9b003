//! Connectivity atlas for alternated quadratic Julia sets.
//!
//! The system `z -> z^2 + c1` on even steps and `z -> z^2 + c2` on odd steps
//! has a filled Julia set that is connected, disconnected, or totally
//! disconnected depending on the fates of the critical orbits of the
//! two-step quartic. This crate classifies parameter pairs, samples the 4D
//! parameter space over axis-aligned slices, renders filled Julia sets and
//! serializes the results.

pub mod cycle;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod julia;
pub mod parallel;
pub mod sampler;

pub use num_complex::Complex64;

pub use cycle::detect_cycle;
pub use dynamics::{
    alternated_step, classify, critical_points, escape_radius, orbit_fate, quartic_step, ClassificationResult,
    ComplexValue, ConnectivityClass, IterationConfig, MapParams, OrbitFate,
};
pub use error::{Error, Result};
pub use export::{
    parse_ppm, read_raw_volume, write_atomic, write_escape_ppm, write_mask_ppm, write_ppm, write_raw_volume, Gradient,
    Palette, PpmImage, Rgb, VolumeFilePair, VolumeSidecar,
};
pub use julia::{membership, render_filled_julia, render_filled_julia_with, EscapeGrid, Membership, Viewport};
pub use parallel::{CancelToken, Parallelism};
pub use sampler::{
    params_from_coords, project_volume, sample_slice2d, sample_volume3d, Axis4, AxisRange, ClassGrid2D, ClassVolume,
    ProjectionMask, Sampler, SliceSpec, VolumeSpec, DEFAULT_MAX, DEFAULT_MIN, DEFAULT_VOXEL_LIMIT,
};
