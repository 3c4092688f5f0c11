//! Crate-wide error type. Variants are grouped by how the CLI reports them:
//! parameter errors, input/parse errors, and numerical failures.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not symmetric: max asymmetry {max_dev:.3e} exceeds {tol:.3e}")]
    NotSymmetric { max_dev: f64, tol: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("operator has no factored data form: {0}")]
    NotFactored(String),

    #[error("exhaustive search budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("start point is infeasible: {0}")]
    InfeasibleStart(String),

    #[error("objective decreased by {drop:.3e} at iteration {iter}; the oracle or objective is inconsistent")]
    MonotonicityViolated { iter: usize, drop: f64 },

    #[error("trivial solution: {0}")]
    TrivialSolution(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the CLI: 2 for bad parameters, 3 for input
    /// errors, 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DimensionMismatch(_)
            | Error::InvalidParameter(_)
            | Error::NotFactored(_)
            | Error::BudgetExceeded(_)
            | Error::InfeasibleStart(_) => 2,
            Error::NotSymmetric { .. }
            | Error::NonFinite(_)
            | Error::Parse { .. }
            | Error::Io(_)
            | Error::Serialize(_) => 3,
            Error::MonotonicityViolated { .. } | Error::TrivialSolution(_) => 4,
        }
    }
}
