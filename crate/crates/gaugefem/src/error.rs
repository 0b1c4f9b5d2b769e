//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unsupported Lie algebra for this operation")]
    UnsupportedAlgebra,

    #[error("form rank overflow: rank {0} + rank {1} exceeds the ambient dimension 2")]
    RankOverflow(u8, u8),

    #[error("form rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: u8, got: u8 },

    #[error("quadrature exactness {0} exceeds the supported maximum 10")]
    ExactnessBeyondTable(usize),

    #[error("matrix factorization failed at pivot {pivot}")]
    FactorizationFailure { pivot: usize },

    #[error("linear solve did not reach tolerance: relative residual {residual:e}")]
    SolveResidual { residual: f64 },

    #[error(
        "hybrid constraint system inconsistent: relative residual {residual:e} \
         (multiplier space too small; raise degree_s)"
    )]
    ConstraintInconsistent { residual: f64 },

    #[error("broken space degree {have} cannot represent an update of degree {need}")]
    DegreeOverflow { have: usize, need: usize },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("config parse error at line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },

    #[error("config validation error for key `{key}`: {msg}")]
    ConfigValidation { key: &'static str, msg: String },

    #[error("non-finite field value detected at step {step}")]
    NonFinite { step: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
