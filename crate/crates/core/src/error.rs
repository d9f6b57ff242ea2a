use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("curve set is empty")]
    EmptySet,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("curve {id} has {got} values but the grid has {expected} points")]
    LengthMismatch { id: usize, expected: usize, got: usize },

    #[error("curve {id} contains a non-finite value")]
    NonFinite { id: usize },

    #[error("duplicate curve id {0}")]
    DuplicateId(usize),

    #[error("curve sets are sampled on different grids")]
    GridMismatch,

    /// Raised by the central-curve selectors; callers should switch to the
    /// conventional Ward fallback.
    #[error("need at least {needed} curves, got {got}; use the fallback linkage")]
    TooFewCurves { needed: usize, got: usize },

    #[error("quantile level tau must lie in (0, 1), got {0}")]
    InvalidTau(f64),

    #[error("requested {requested} clusters but only {available} units are available")]
    InvalidClusterCount { requested: usize, available: usize },

    #[error("AR(2) coefficients ({phi1}, {phi2}) are not stationary")]
    NonStationary { phi1: f64, phi2: f64 },

    #[error("periodogram is identically zero (constant series)")]
    DegeneratePeriodogram,

    #[error("label vectors differ in length: {left} vs {right}")]
    LabelLengthMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
