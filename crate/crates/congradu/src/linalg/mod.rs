//! Dense vectors, symmetric linear operators, thresholding maps, norms, and
//! data preprocessing. Everything downstream is assembled from these pieces.

mod norms;
mod operator;
mod preprocess;
mod threshold;
mod types;

pub use norms::{l0_norm, matrix_norms, vector_norms, MatrixNorms, VectorNorms, SUPPORT_TOL};
pub use operator::SymmetricOperator;
pub use preprocess::{mean_center, row_normalize, RowNorm};
pub use threshold::{
    hard_threshold, project_linf_ball, soft_threshold, soft_threshold_scalar, top_k_indices,
};
pub use types::{IndexSet, Weights};

/// Column vector of 64-bit reals.
pub type Vector = nalgebra::DVector<f64>;
/// Dense column-major matrix of 64-bit reals.
pub type Matrix = nalgebra::DMatrix<f64>;

use crate::error::{Error, Result};

/// Rejects NaN/Inf entries; `what` names the offending input in the error.
pub fn ensure_finite(x: &Vector, what: &str) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

pub fn ensure_finite_matrix(m: &Matrix, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}
