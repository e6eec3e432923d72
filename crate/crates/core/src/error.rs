use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CqmsError {
    #[error("algebra mismatch: expected block dims {expected:?}, found {found:?}")]
    AlgebraMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid homomorphism: {0}")]
    InvalidHom(String),
    #[error("invalid seminorm: {0}")]
    InvalidSeminorm(String),
    #[error("solver method {method} cannot be used with a {seminorm} seminorm")]
    IncompatibleMethod {
        method: &'static str,
        seminorm: &'static str,
    },
    #[error("stage {stage} out of range 1..={depth}")]
    StageOutOfRange { stage: usize, depth: usize },
    #[error("undefined: {0}")]
    Undefined(String),
    #[error("inconsistent ladder: {0}")]
    InconsistentLadder(String),
    #[error("linear program: {0}")]
    Lp(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = CqmsError> = std::result::Result<T, E>;
