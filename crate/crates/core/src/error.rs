use std::path::PathBuf;

use thiserror::Error;

/// Broad failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad configuration or arguments.
    Usage,
    /// Inputs that cannot be processed (wrong sizes, missing files, degenerate geometry).
    Data,
    /// Numerical breakdown (divergence, non-finite values).
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        what: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("{what} too small: {height}x{width}, need at least {min}x{min}")]
    TooSmall {
        what: &'static str,
        height: usize,
        width: usize,
        min: usize,
    },

    #[error("need at least {required} correspondences, got {found}")]
    InsufficientMatches { found: usize, required: usize },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("no homography reached the consensus threshold ({required} inliers); best had {best}")]
    NoConsensus { best: usize, required: usize },

    #[error("homography is not invertible")]
    NotInvertible,

    #[error("canvas of {area} pixels exceeds the limit of {max}")]
    CanvasTooLarge { area: usize, max: usize },

    #[error("overlap region is empty")]
    EmptyOverlap,

    #[error("overlap is not traversable: {0}")]
    NotTraversable(String),

    #[error("seam endpoints undefined: overlap does not touch the {0} exclusive region")]
    SeamEndpointsUndefined(&'static str),

    #[error("{0} exclusive region is empty")]
    EmptyExclusiveRegion(&'static str),

    #[error("malformed flow network: {0}")]
    InvalidNetwork(String),

    #[error("degenerate canvas: no pixels")]
    DegenerateCanvas,

    #[error("optimization diverged at epoch {epoch}: non-finite loss")]
    Diverged { epoch: usize },

    #[error("soft masks violate the partition of unity by {max_error:e}")]
    PartitionViolation { max_error: f64 },

    #[error("object {index} does not fit inside the scene")]
    ObjectOutsideCanvas { index: usize },

    #[error("configuration error: {0}")]
    Config(String),

    /// An error tagged with the pair, stage or method it came from.
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("{} has {channels} channels, expected a single-channel mask", path.display())]
    MultiChannel { path: PathBuf, channels: u8 },

    #[error("no resolvable pairs in {0}")]
    NoPairs(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image codec error: {0}")]
    Image(#[from] image::ImageError),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) => ErrorClass::Usage,
            Error::Diverged { .. } | Error::PartitionViolation { .. } => ErrorClass::Numeric,
            Error::Context { source, .. } => source.class(),
            _ => ErrorClass::Data,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
