use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("singular matrix")]
    Singular,
    #[error("matrix is not expansive: smallest eigenvalue modulus is {0}")]
    NotExpansive(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no r in (1, lambda_minus) passed sampled boundary containment")]
    ContainmentFailure,
    #[error("level search window {0} exceeded")]
    WindowExceeded(i32),
    #[error("no bracket found after {0} doublings")]
    NonConvergence(u32),
    #[error("moment projection annihilated the profile after {0} attempts")]
    DegenerateProfile(u32),
    #[error("property violation: {0}")]
    PropertyViolation(String),
    #[error("weighted tail bound diverges: {0}")]
    TailDivergence(String),
}
