//! Vector norms (with a tolerance-based l0 count) and the two matrix norms
//! used for penalty-parameter bounds.

use super::operator::SymmetricOperator;
use super::Vector;

/// Magnitudes at or below this count as zero for support/l0 purposes.
pub const SUPPORT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VectorNorms {
    pub l0: usize,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Number of entries with |x_i| > tol.
pub fn l0_norm(x: &Vector, tol: f64) -> usize {
    x.iter().filter(|v| v.abs() > tol).count()
}

pub fn vector_norms(x: &Vector, l0_tol: f64) -> VectorNorms {
    VectorNorms {
        l0: l0_norm(x, l0_tol),
        l1: x.iter().map(|v| v.abs()).sum(),
        l2: x.norm(),
        linf: x.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatrixNorms {
    /// Largest entry, no absolute value. Coincides with max|entry| for the
    /// PSD matrices the penalty bounds apply to.
    pub max_entry: f64,
    pub frobenius: f64,
}

pub fn matrix_norms(op: &SymmetricOperator) -> MatrixNorms {
    MatrixNorms {
        max_entry: op.max_entry(),
        frobenius: op.frobenius_norm(),
    }
}
