use std::path::PathBuf;

use thiserror::Error;

use crate::sampler::Axis4;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid iteration config: {0}")]
    InvalidConfig(String),

    #[error("escape radius override {given} is below the sound bound {required} for these parameters")]
    RadiusOverrideTooSmall { given: f64, required: f64 },

    #[error("invalid viewport: {0}")]
    InvalidViewport(String),

    #[error("axis {0} appears more than once")]
    DuplicateAxis(Axis4),

    #[error("invalid range on axis {axis}: min {min} must be finite and below max {max}")]
    InvalidRange { axis: Axis4, min: f64, max: f64 },

    #[error("resolution must be positive on axis {0}")]
    ZeroResolution(Axis4),

    #[error("fixed value for axis {0} is not finite")]
    NonFiniteFixed(Axis4),

    #[error("volume of {requested} voxels exceeds the limit of {limit}")]
    VoxelLimit { requested: u64, limit: u64 },

    #[error("axis {0} is not a free axis of this volume")]
    NotFreeAxis(Axis4),

    #[error("unknown axis name {0:?} (expected re1, im1, re2 or im2)")]
    UnknownAxis(String),

    #[error("palette colors must be pairwise distinct")]
    DegeneratePalette,

    #[error("computation cancelled")]
    Cancelled,

    #[error("thread pool: {0}")]
    ThreadPool(String),

    #[error("malformed volume sidecar {path}: {message}")]
    Sidecar { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
