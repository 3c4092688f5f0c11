//! Hard thresholding T_k, soft thresholding S_w, and the box projection
//! Pi_{B_inf^w}. T_k selection runs in expected O(n); the soft/box pair
//! satisfies S_w(a) + Pi(a) = a exactly.

use super::types::Weights;
use super::Vector;
use crate::error::{Error, Result};

/// Indices (sorted ascending) of the k largest-magnitude entries of `a`,
/// ties broken toward the smallest index. Expected O(n) via quickselect.
pub fn top_k_indices(a: &Vector, k: usize) -> Vec<usize> {
    let n = a.len();
    assert!(k <= n, "k = {k} exceeds length {n}");
    if k == 0 {
        return Vec::new();
    }
    let mut idx: Vec<usize> = (0..n).collect();
    if k < n {
        // Order: larger magnitude first, then smaller index first.
        idx.select_nth_unstable_by(k - 1, |&i, &j| {
            a[j].abs().total_cmp(&a[i].abs()).then(i.cmp(&j))
        });
        idx.truncate(k);
    }
    idx.sort_unstable();
    idx
}

/// T_k(a): the best k-sparse approximation of `a`; keeps the k largest
/// magnitudes (smallest indices on ties), zeroes the rest.
pub fn hard_threshold(a: &Vector, k: usize) -> Result<Vector> {
    if k == 0 || k > a.len() {
        return Err(Error::InvalidParameter(format!(
            "sparsity level k = {k} out of range [1, {}]",
            a.len()
        )));
    }
    let mut y = Vector::zeros(a.len());
    for i in top_k_indices(a, k) {
        y[i] = a[i];
    }
    Ok(y)
}

/// S_w(a) componentwise: (|a_i| - w_i)_+ sgn(a_i).
pub fn soft_threshold(a: &Vector, w: &Weights) -> Result<Vector> {
    if a.len() != w.len() {
        return Err(Error::DimensionMismatch(format!(
            "vector length {} vs weight length {}",
            a.len(),
            w.len()
        )));
    }
    Ok(Vector::from_fn(a.len(), |i, _| shrink(a[i], w[i])))
}

/// S_{se}(a) with a uniform level s >= 0 (s = 0 is the identity, used by the
/// dual search where the multiplier may vanish).
pub fn soft_threshold_scalar(a: &Vector, s: f64) -> Vector {
    debug_assert!(s >= 0.0 && s.is_finite());
    Vector::from_fn(a.len(), |i, _| shrink(a[i], s))
}

#[inline]
fn shrink(a: f64, w: f64) -> f64 {
    if a > w {
        a - w
    } else if a < -w {
        a + w
    } else {
        0.0
    }
}

/// Pi_{B_inf^w}(a): the Euclidean projection of `a` onto the box
/// [-w_1, w_1] x ... x [-w_n, w_n], i.e. a componentwise clamp. Computed as
/// a - S_w(a) so the split identity S_w(a) + Pi(a) = a holds exactly.
pub fn project_linf_ball(a: &Vector, w: &Weights) -> Result<Vector> {
    let s = soft_threshold(a, w)?;
    Ok(a - s)
}
