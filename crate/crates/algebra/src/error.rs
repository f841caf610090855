use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid dilation structure: {0}")]
    Dilation(String),
    #[error("invalid truncation policy: {0}")]
    Policy(String),
    #[error("arity mismatch: {0} vs {1}")]
    Arity(usize, usize),
    #[error("map is not the identity at t = 0 (component {0})")]
    NotIdentityAtZero(usize),
    #[error("incompatible series: {0}")]
    Incompatible(String),
    #[error("cannot parse rational '{0}'")]
    ParseRational(String),
}
