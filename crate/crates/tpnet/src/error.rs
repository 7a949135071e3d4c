//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A cubic spline fit needs at least two knots.
    #[error("spline fit requires at least 2 knots, got {0}")]
    InsufficientKnots(usize),

    /// Knot times must be strictly increasing.
    #[error("knot times are not strictly increasing at index {0}")]
    NonMonotonicTimes(usize),

    /// Spline evaluation outside the fitted knot range.
    #[error("t = {t} is outside the knot range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    /// An operation received an empty sequence.
    #[error("empty sequence")]
    EmptySequence,

    /// A length argument was zero or otherwise unusable.
    #[error("invalid length: {0}")]
    InvalidLength(String),

    /// A pyramid or model configuration is infeasible.
    #[error("config error: {0}")]
    ConfigError(String),

    /// Tensor or sequence shapes do not line up.
    #[error("shape error: {0}")]
    ShapeError(String),

    /// A forward op or a training step produced a non-finite value.
    #[error("numeric error: {0}")]
    NumericError(String),

    /// A scene with no pedestrians was passed to the model.
    #[error("empty scene")]
    EmptyScene,

    /// A dataset line could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    ParseError { line: usize, msg: String },

    /// Two observations share the same (frame, pedestrian) key.
    #[error("duplicate observation for frame {frame}, pedestrian {ped_id}")]
    DuplicateObservation { frame: i64, ped_id: i64 },

    /// Best-of-K evaluation with an empty sample list.
    #[error("best-of-k requires at least one sample")]
    InvalidK,

    /// Checkpoint file is missing, corrupt, or has the wrong version.
    #[error("checkpoint error: {0}")]
    CheckpointError(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
