//! Small validated value types: strictly positive weight vectors and sorted
//! index sets.

use super::Vector;
use crate::error::{Error, Result};

/// Strictly positive, finite weights, e.g. the soft-threshold levels w in
/// S_w(a) or the diagonal metric of an ellipsoid.
#[derive(Clone, Debug)]
pub struct Weights(Vector);

impl Weights {
    pub fn new(w: Vector) -> Result<Self> {
        if !w.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::InvalidParameter(
                "weights must be finite and strictly positive".into(),
            ));
        }
        Ok(Weights(w))
    }

    pub fn uniform(n: usize, w: f64) -> Result<Self> {
        Self::new(Vector::from_element(n, w))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.len() == 0
    }

    pub fn as_vector(&self) -> &Vector {
        &self.0
    }
}

impl std::ops::Index<usize> for Weights {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Sorted, distinct, in-bounds indices; the support of a sparse vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    /// Validates that `idx` is strictly increasing and within `[0, n)`.
    pub fn new(idx: Vec<usize>, n: usize) -> Result<Self> {
        let sorted = idx.windows(2).all(|w| w[0] < w[1]);
        let in_bounds = idx.iter().all(|&i| i < n);
        if !sorted || !in_bounds {
            return Err(Error::InvalidParameter(format!(
                "index set must be strictly increasing within [0, {n})"
            )));
        }
        Ok(IndexSet(idx))
    }

    /// Indices of entries of `x` with magnitude above `tol`.
    pub fn support_of(x: &Vector, tol: f64) -> Self {
        IndexSet(
            x.iter()
                .enumerate()
                .filter(|(_, v)| v.abs() > tol)
                .map(|(i, _)| i)
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}
