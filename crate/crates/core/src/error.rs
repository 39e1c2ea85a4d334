use thiserror::Error;

/// Errors raised by the distribution, limit and experiment constructors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShrinkError {
    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("invalid tuning: {0}")]
    InvalidTuning(String),

    #[error("probability {0} outside the open interval (0, 1)")]
    ProbabilityOutOfRange(f64),

    #[error("undefined extended-real arithmetic: {0}")]
    UndefinedArithmetic(String),

    #[error("regime underdetermined: {0}")]
    Underdetermined(String),

    #[error("invalid regime: {0}")]
    InvalidRegime(String),

    #[error("objective unavailable; argmin verified against closed form only")]
    ObjectiveUnavailable,

    #[error("grid point {x} collides with atom at {atom} (CDF discontinuity)")]
    GridCollision { x: f64, atom: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, ShrinkError>;
