use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("no convergence after {iterations} iterations (stationarity residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("no nonnegative support weighting exists (residual {residual:e})")]
    InfeasibleWeights { residual: f64 },

    #[error("dual point is infeasible: {0}")]
    InfeasibleCertificate(String),

    #[error("certificate check failed: {0}")]
    CertificateFailure(String),

    #[error("POVM is not complete (residual {residual:e})")]
    IncompletePovm { residual: f64 },

    #[error("ensemble {0} does not have equal priors")]
    PriorMismatch(&'static str),

    #[error("expected {expected} states, got {got}")]
    WrongArity { expected: usize, got: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("unknown scenario kind `{0}`")]
    UnknownKind(String),

    #[error("bad parameters for `{kind}`: {reason}")]
    BadParams { kind: String, reason: String },
}
