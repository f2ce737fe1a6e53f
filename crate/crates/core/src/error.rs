use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A rational function was evaluated at one of its poles.
    #[error("pole encountered: {0}")]
    PoleEncountered(String),

    /// A regulated value has a genuine pole at ε = 0.
    #[error("regulated value has a pole at ε = 0")]
    PoleAtZero,

    /// Regulated numerator or denominator grew past the configured degree cap.
    #[error("regulated degree {degree} exceeds cap {cap}")]
    DegreeCapExceeded { degree: usize, cap: usize },

    /// A truncated series lost too many terms to decide the limit.
    #[error("regulator precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("deformation parameter q must avoid 0, 1 and -1")]
    DegenerateQ,

    #[error("sampling exhausted after {0} attempts")]
    ExhaustedSampling(u32),

    #[error("part sizes sum to {got}, set has {expected} elements")]
    SizeMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("shape error: {0}")]
    ShapeError(String),

    #[error("spectral parameters are not pairwise distinct")]
    NotDistinct,

    #[error("Newton iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
