use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cyclic order {0} is invalid (each order must be at least 2)")]
    InvalidOrder(usize),

    #[error("group of size {size} exceeds the size cap {cap}")]
    GroupTooLarge { size: u128, cap: usize },

    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinate {coord} out of range for cyclic factor of order {order}")]
    CoordinateOutOfRange { coord: usize, order: usize },

    #[error("functions live on different groups")]
    GroupMismatch,

    #[error("length {got} does not match group size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("cannot parse group spec {spec:?}: {reason}")]
    GroupSpecParse { spec: String, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("size {size} exceeds the oracle cap {cap}")]
    SizeCapExceeded { size: usize, cap: usize },

    #[error("sample is empty")]
    EmptySample,

    #[error("need at least {needed} trials, got {got}")]
    InsufficientTrials { needed: usize, got: usize },

    #[error("involution fraction {0} is impossible: 1/p must be an integer, so p <= 1/2 or p = 1")]
    ImpossibleInvolutionFraction(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
