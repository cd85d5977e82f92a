use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the feature pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("gabor index (u={u}, v={v}) outside bank of {directions}x{scales}")]
    InvalidIndex {
        u: usize,
        v: usize,
        directions: usize,
        scales: usize,
    },

    #[error("image {width}x{height} is smaller than the required {required}x{required}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        required: usize,
    },

    #[error("pixel value {value} outside [0, 1]")]
    OutOfRange { value: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("block size {block_size} does not fit a {width}x{height} image")]
    BlockTooLarge {
        block_size: usize,
        width: usize,
        height: usize,
    },

    #[error("too few samples for a covariance estimate: {0}")]
    TooFewSamples(usize),

    #[error("training set has rank 0")]
    DegenerateTrainingSet,

    #[error("vector standard deviation {std:e} is too small to standardize")]
    DegenerateVector { std: f64 },

    #[error("feature configuration does not match the gallery")]
    ConfigMismatch,

    #[error("match result for probe '{0}' has no ground-truth subject")]
    MissingGroundTruth(String),

    #[error("keypoints: {0}")]
    Keypoints(String),

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("malformed image: {0}")]
    Image(String),

    #[error("unsupported model format version {found} (expected {expected})")]
    FormatVersionMismatch { found: u16, expected: u16 },

    #[error("model checksum mismatch (file truncated or corrupted)")]
    ChecksumMismatch,

    #[error("malformed model file: {0}")]
    ModelFormat(String),

    #[error("{}: {source}", path.display())]
    Record {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at(path: impl Into<PathBuf>, source: Error) -> Self {
        Error::Record {
            path: path.into(),
            source: Box::new(source),
        }
    }

    /// The innermost error, skipping `Record` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Record { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
