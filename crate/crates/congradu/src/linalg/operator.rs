//! Symmetric linear operators A_sigma = A + sigma*I, stored either as an
//! explicit symmetric matrix or as a Gram form B^T B of a data matrix (never
//! materialized). Projection deflation wraps either form implicitly.

use super::{ensure_finite_matrix, Matrix, Vector};
use crate::error::{Error, Result};

const SYMMETRY_RTOL: f64 = 1e-12;

#[derive(Clone, Debug)]
enum Kind {
    /// n x n symmetric matrix A.
    Explicit(Matrix),
    /// m x n data matrix B; acts as B^T B.
    Gram(Matrix),
}

/// A positive-shiftable symmetric operator with optional projection
/// deflations: x -> P A P x + sigma x, where P projects out previously
/// extracted unit directions. The shift applies on top of the deflated
/// operator, so a PSD-making sigma stays valid after deflation.
#[derive(Clone, Debug)]
pub struct SymmetricOperator {
    kind: Kind,
    shift: f64,
    deflations: Vec<Vector>,
    dim: usize,
}

impl SymmetricOperator {
    /// Wraps an explicit symmetric matrix. Symmetry is validated to a
    /// relative tolerance of 1e-12 against the largest magnitude entry.
    pub fn explicit(a: Matrix) -> Result<Self> {
        if a.nrows() != a.ncols() || a.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "explicit operator must be square and nonempty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        ensure_finite_matrix(&a, "explicit symmetric matrix")?;
        let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
        let mut max_dev = 0.0_f64;
        for i in 0..a.nrows() {
            for j in (i + 1)..a.ncols() {
                max_dev = max_dev.max((a[(i, j)] - a[(j, i)]).abs());
            }
        }
        let tol = SYMMETRY_RTOL * scale;
        if max_dev > tol {
            return Err(Error::NotSymmetric { max_dev, tol });
        }
        let dim = a.nrows();
        Ok(SymmetricOperator { kind: Kind::Explicit(a), shift: 0.0, deflations: Vec::new(), dim })
    }

    /// Wraps an m x n data matrix B as the Gram operator B^T B (always PSD).
    pub fn gram(b: Matrix) -> Result<Self> {
        if b.nrows() == 0 || b.ncols() == 0 {
            return Err(Error::DimensionMismatch("data matrix must be nonempty".into()));
        }
        ensure_finite_matrix(&b, "data matrix")?;
        let dim = b.ncols();
        Ok(SymmetricOperator { kind: Kind::Gram(b), shift: 0.0, deflations: Vec::new(), dim })
    }

    /// Replaces the diagonal shift sigma (must be finite and >= 0).
    pub fn with_shift(mut self, sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "shift must be finite and nonnegative, got {sigma}"
            )));
        }
        self.shift = sigma;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Same operator with sigma = 0; used when reporting unshifted variance.
    pub fn unshifted(&self) -> Self {
        let mut op = self.clone();
        op.shift = 0.0;
        op
    }

    pub fn is_factored(&self) -> bool {
        matches!(self.kind, Kind::Gram(_))
    }

    /// Projection deflation: returns the operator (I-xx^T) A (I-xx^T) + sigma I
    /// applied implicitly. `x` must be unit length.
    pub fn deflate(&self, x: &Vector) -> Result<Self> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "deflation direction has length {}, operator dimension is {}",
                x.len(),
                self.dim
            )));
        }
        if (x.norm() - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidParameter(
                "deflation direction must have unit length".into(),
            ));
        }
        let mut op = self.clone();
        op.deflations.push(x.clone());
        Ok(op)
    }

    /// Computes A_sigma x. Cost O(nnz(x)*n) for sparse x on an explicit
    /// matrix, O(mn) for the Gram form. Panics on dimension mismatch (all
    /// public entry points validate dimensions up front).
    pub fn apply(&self, x: &Vector) -> Vector {
        assert_eq!(
            x.len(),
            self.dim,
            "operator of dimension {} applied to vector of length {}",
            self.dim,
            x.len()
        );
        let mut y = if self.deflations.is_empty() {
            self.kind_apply(x)
        } else {
            // (I - d1 d1^T)...(I - dF dF^T) applied right-to-left on input,
            // left-to-right on output.
            let mut u = x.clone();
            for d in self.deflations.iter().rev() {
                let c = d.dot(&u);
                u.axpy(-c, d, 1.0);
            }
            let mut y = self.kind_apply(&u);
            for d in self.deflations.iter() {
                let c = d.dot(&y);
                y.axpy(-c, d, 1.0);
            }
            y
        };
        if self.shift != 0.0 {
            y.axpy(self.shift, x, 1.0);
        }
        y
    }

    fn kind_apply(&self, x: &Vector) -> Vector {
        match &self.kind {
            Kind::Explicit(a) => sparse_aware_mul(a, x),
            Kind::Gram(b) => {
                let t = sparse_aware_mul(b, x);
                b.tr_mul(&t)
            }
        }
    }

    /// x^T A_sigma x.
    pub fn quadratic_form(&self, x: &Vector) -> f64 {
        x.dot(&self.apply(x))
    }

    /// The underlying data matrix with deflations folded in:
    /// B (I-d1 d1^T)...(I-dF dF^T), so that its Gram equals the deflated
    /// operator (shift excluded). `None` for explicit operators.
    pub fn factored_data(&self) -> Option<Matrix> {
        match &self.kind {
            Kind::Explicit(_) => None,
            Kind::Gram(b) => {
                let mut b = b.clone();
                for d in &self.deflations {
                    let bd = &b * d;
                    // b -= (B d) d^T, a rank-one update.
                    b.ger(-1.0, &bd, d, 1.0);
                }
                Some(b)
            }
        }
    }

    /// Materializes the full shifted matrix A + sigma I (with deflations
    /// applied). O(n^2) memory; intended for small n or one-off bounds.
    pub fn to_dense(&self) -> Matrix {
        let mut a = match &self.kind {
            Kind::Explicit(a) => a.clone(),
            Kind::Gram(b) => b.tr_mul(b),
        };
        for d in &self.deflations {
            // A <- (I - dd^T) A (I - dd^T), expanded as two rank updates.
            let ad: Vector = &a * d;
            let c = d.dot(&ad);
            a.ger(-1.0, &ad, d, 1.0);
            a.ger(-1.0, d, &ad, 1.0);
            a.ger(c, d, d, 1.0);
        }
        for i in 0..self.dim {
            a[(i, i)] += self.shift;
        }
        a
    }

    /// Largest entry (no absolute value) of the represented shifted matrix.
    /// For Gram forms this is the largest diagonal entry, which dominates all
    /// off-diagonal entries of a PSD matrix by Cauchy-Schwarz.
    pub fn max_entry(&self) -> f64 {
        match (&self.kind, self.deflations.is_empty()) {
            (Kind::Explicit(a), true) => {
                let mut m = f64::NEG_INFINITY;
                for j in 0..self.dim {
                    for i in 0..self.dim {
                        let v = if i == j { a[(i, j)] + self.shift } else { a[(i, j)] };
                        m = m.max(v);
                    }
                }
                m
            }
            (Kind::Gram(_), _) => {
                let b = self.factored_data().expect("gram kind has factored data");
                b.column_iter().map(|c| c.norm_squared()).fold(f64::NEG_INFINITY, f64::max)
                    + self.shift
            }
            (Kind::Explicit(_), false) => {
                let dense = self.to_dense();
                dense.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v))
            }
        }
    }

    /// Frobenius norm of the represented shifted matrix. For Gram forms this
    /// is computed through the small m x m Gram B B^T instead of B^T B.
    pub fn frobenius_norm(&self) -> f64 {
        match (&self.kind, self.deflations.is_empty()) {
            (Kind::Explicit(a), true) => {
                let mut sq = 0.0;
                for j in 0..self.dim {
                    for i in 0..self.dim {
                        let v = if i == j { a[(i, j)] + self.shift } else { a[(i, j)] };
                        sq += v * v;
                    }
                }
                sq.sqrt()
            }
            (Kind::Gram(_), _) => {
                let b = self.factored_data().expect("gram kind has factored data");
                let g = &b * b.transpose();
                let fro_sq = g.iter().map(|v| v * v).sum::<f64>();
                let tr = g.trace();
                (fro_sq + 2.0 * self.shift * tr + self.dim as f64 * self.shift * self.shift)
                    .sqrt()
            }
            (Kind::Explicit(_), false) => {
                let dense = self.to_dense();
                dense.iter().map(|v| v * v).sum::<f64>().sqrt()
            }
        }
    }

    /// A nonnegative sigma making A + sigma I positive definite, from
    /// Gershgorin discs: 0 when every disc already lies in the strict right
    /// half-line, otherwise -min_i(A_ii - sum_{j!=i}|A_ij|) plus a small
    /// margin 1e-9 * max(1, max|A_ij|). Gram forms are PSD, and deflation
    /// cannot lower the smallest eigenvalue below min(0, lambda_min), so the
    /// base matrix's bound is reused.
    pub fn gershgorin_shift(&self) -> f64 {
        match &self.kind {
            Kind::Gram(_) => 0.0,
            Kind::Explicit(a) => {
                let mut min_disc = f64::INFINITY;
                let mut scale = 1.0_f64;
                for i in 0..self.dim {
                    let mut off = 0.0;
                    for j in 0..self.dim {
                        scale = scale.max(a[(i, j)].abs());
                        if i != j {
                            off += a[(i, j)].abs();
                        }
                    }
                    min_disc = min_disc.min(a[(i, i)] - off);
                }
                if min_disc > 0.0 {
                    0.0
                } else {
                    -min_disc + 1e-9 * scale
                }
            }
        }
    }

    /// Dense principal submatrix (A_sigma)[S, S] for a small index set S.
    /// Explicit: direct gather. Gram: (B_S)^T B_S over the selected columns.
    /// Deflated: |S| full applies to unit vectors.
    pub fn principal_submatrix(&self, support: &[usize]) -> Matrix {
        let k = support.len();
        assert!(support.iter().all(|&i| i < self.dim), "support index out of range");
        if !self.deflations.is_empty() {
            let mut sub = Matrix::zeros(k, k);
            for (cj, &j) in support.iter().enumerate() {
                let mut e = Vector::zeros(self.dim);
                e[j] = 1.0;
                let col = self.apply(&e);
                for (ci, &i) in support.iter().enumerate() {
                    sub[(ci, cj)] = col[i];
                }
            }
            // Symmetrize away the last-bit asymmetry of independent applies.
            let subt = sub.transpose();
            return (sub + subt) * 0.5;
        }
        let mut sub = Matrix::zeros(k, k);
        match &self.kind {
            Kind::Explicit(a) => {
                for (cj, &j) in support.iter().enumerate() {
                    for (ci, &i) in support.iter().enumerate() {
                        sub[(ci, cj)] = a[(i, j)];
                    }
                }
            }
            Kind::Gram(b) => {
                for (cj, &j) in support.iter().enumerate() {
                    for (ci, &i) in support.iter().enumerate() {
                        if ci <= cj {
                            let v = b.column(i).dot(&b.column(j));
                            sub[(ci, cj)] = v;
                            sub[(cj, ci)] = v;
                        }
                    }
                }
            }
        }
        for i in 0..k {
            sub[(i, i)] += self.shift;
        }
        sub
    }
}

/// y = M x, accumulating over columns of M when x is sparse enough for the
/// column pass to win over the dense product.
fn sparse_aware_mul(m: &Matrix, x: &Vector) -> Vector {
    let n = x.len();
    let nnz = x.iter().filter(|v| **v != 0.0).count();
    if nnz * 4 <= n {
        let mut y = Vector::zeros(m.nrows());
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                y.axpy(xj, &m.column(j), 1.0);
            }
        }
        y
    } else {
        m * x
    }
}
