use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A cost function violates one of the instance promises.
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("secular function has a pole at x = {0}")]
    Pole(f64),

    #[error("size cap exceeded: {what} = {got} > {cap}")]
    SizeCap {
        what: &'static str,
        got: usize,
        cap: usize,
    },

    #[error("root solver did not converge: {0}")]
    Convergence(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    /// The integrator could not meet its tolerance within the substep cap.
    #[error("integrator: {0}")]
    Integrator(String),

    #[error("state norm drifted by {0:e}")]
    NormDrift(f64),

    #[error("oracle returned a non-positive gap {gamma} at s = {s}")]
    NonPositiveGap { s: f64, gamma: f64 },

    #[error("sampling: {0}")]
    Sampling(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad inputs rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInstance(_)
                | Error::InvalidParameter(_)
                | Error::DimensionMismatch { .. }
                | Error::SizeCap { .. }
                | Error::InvalidSchedule(_)
                | Error::Json(_)
        )
    }
}
