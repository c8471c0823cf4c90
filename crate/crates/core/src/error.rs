use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A covariance matrix that violates symmetry, finiteness or the
    /// uncertainty bound.
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("mode index {index} out of range for {n_modes}-mode state")]
    ModeOutOfRange { index: usize, n_modes: usize },

    /// Propagation exceeded the configured matrix-norm bound.
    #[error("dynamics overflow at t = {time}")]
    DynamicsOverflow { time: f64 },

    #[error("model has no period")]
    NotPeriodic,

    #[error("model is time dependent; constant-generator spectrum unavailable")]
    NotTimeIndependent,

    #[error("eigen-decomposition failed: {0}")]
    Eigen(String),

    /// Fewer than the required number of tail samples satisfy the
    /// asymptotic gate.
    #[error("not in asymptotic regime: {found} of {required} tail samples usable")]
    NotAsymptotic { found: usize, required: usize },

    #[error("horizon cap {cap} reached without entering the asymptotic regime")]
    HorizonCap { cap: f64 },
}
