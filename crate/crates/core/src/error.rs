use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value at position {position}")]
    NonFiniteValue { position: usize },

    #[error("invalid label {label} at index {index} (num_classes = {num_classes})")]
    InvalidLabel {
        index: usize,
        label: usize,
        num_classes: usize,
    },

    #[error("invalid tensor: {0}")]
    InvalidTensor(String),

    #[error("class {class} has no samples")]
    EmptyClass { class: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("confident joint is all zero")]
    AllZeroJoint,

    #[error("noise rate {0} outside [0, 1]")]
    InvalidTau(f64),

    #[error("agreement m = {m} invalid for {members} members")]
    InvalidM { m: usize, members: usize },

    #[error("missing input for {algorithm}: {what}")]
    MissingInput {
        algorithm: &'static str,
        what: &'static str,
    },

    #[error("unknown algorithm '{0}'")]
    UnknownAlgorithm(String),

    #[error("sequence has zero variance")]
    DegenerateVariance,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("correlation {0} must satisfy |r| < 1")]
    ROutOfRange(f64),

    #[error("degrees of freedom must be >= 1, got {0}")]
    InvalidDf(usize),

    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    #[error("infeasible parameters: {0}")]
    InfeasibleParameters(String),

    #[error("training diverged at epoch {epoch} (non-finite loss)")]
    Divergence { epoch: usize },

    #[error("infeasible stratification: {0}")]
    InfeasibleStratification(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
