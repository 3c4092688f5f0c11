//! Alternating solvers for two-sided and sign-constrained problems: sparse
//! SVD of a rectangular matrix, sparse PCA with nonnegativity, and a sparse
//! CCA proxy that replaces the whitening matrices by their diagonals.
//!
//! The bilinear problems alternate exact oracle maximizations in x and y
//! (x first), so the objective never decreases across half-steps; a sweep
//! whose relative improvement falls below the stall tolerance ends the run.

use crate::engine::{self, RunConfig, RunTrace, Termination};
use crate::error::{Error, Result};
use crate::linalg::{hard_threshold, Matrix, SymmetricOperator, Vector, Weights};
use crate::oracles::{lmo_ellipsoid_l0, lmo_sphere_l0, NonnegSphereL0Set};
use crate::spca::{QuadraticObjective, SparseSolution};

/// Row and column sparsity caps for a bilinear solve, with the run limits.
#[derive(Clone, Copy, Debug)]
pub struct SvdSpec {
    pub k1: usize,
    pub k2: usize,
    pub config: RunConfig,
}

/// Output of a bilinear solve: a unit pair and the value x^T B y reached.
#[derive(Clone, Debug)]
pub struct BiSolution {
    pub x: Vector,
    pub y: Vector,
    pub objective: f64,
    pub trace: RunTrace,
}

/// Sparse singular pair: maximize x^T B y over unit x with at most k1
/// nonzeros and unit y with at most k2. Each half-step is an exact
/// sphere/l0 maximization, so the value is monotone; there is no need to
/// relax the support constraints.
pub fn sparse_svd(
    b: &Matrix,
    spec: &SvdSpec,
    x0: Option<&Vector>,
    y0: Option<&Vector>,
) -> Result<BiSolution> {
    let (m, n) = (b.nrows(), b.ncols());
    validate_k(spec.k1, m, "k1")?;
    validate_k(spec.k2, n, "k2")?;

    let (mut x, mut y) = match (x0, y0) {
        (Some(x), Some(y)) => (check_len(x, m, "x0")?, check_len(y, n, "y0")?),
        _ => {
            let (u, v) = top_singular_pair(b);
            let x = x0.map_or_else(|| thresholded_unit(&u, spec.k1), |x| check_len(x, m, "x0"))?;
            let y = y0.map_or_else(|| thresholded_unit(&v, spec.k2), |y| check_len(y, n, "y0"))?;
            (x, y)
        }
    };

    let mut objective = x.dot(&(b * &y));
    let mut trace = new_trace(objective);

    for _ in 0..spec.config.max_iter {
        let started = std::time::Instant::now();
        let step_x = lmo_sphere_l0(&(b * &y), spec.k1)?;
        if step_x.degenerate {
            trace.termination = Termination::DegenerateOracle;
            break;
        }
        x = step_x.maximizer;
        trace.objective_values.push(step_x.value);

        let step_y = lmo_sphere_l0(&b.tr_mul(&x), spec.k2)?;
        if step_y.degenerate {
            trace.termination = Termination::DegenerateOracle;
            break;
        }
        y = step_y.maximizer;
        trace.objective_values.push(step_y.value);
        trace.iter_seconds.push(started.elapsed().as_secs_f64());

        let stalled = (step_y.value - objective).abs()
            <= spec.config.tol_obj * step_y.value.abs().max(1.0);
        objective = step_y.value;
        if stalled {
            trace.termination = Termination::ObjStalled;
            break;
        }
    }

    Ok(BiSolution { x, y, objective, trace })
}

/// Sparse PCA restricted to the nonnegative part of the sphere; the oracle
/// keeps every iterate nonnegative, k-sparse, and unit.
pub fn sparse_nonneg_pca(
    op: &SymmetricOperator,
    k: usize,
    x0: Option<&Vector>,
    cfg: &RunConfig,
) -> Result<SparseSolution> {
    validate_k(k, op.dim(), "k")?;
    let start = match x0 {
        Some(x) => check_len(x, op.dim(), "x0")?,
        None => {
            let v = crate::spca::power_method(op, None, cfg)?.vector;
            thresholded_unit(&v.abs(), k)?
        }
    };
    let objective = QuadraticObjective::new(op);
    let (x, trace) = engine::run(&objective, &NonnegSphereL0Set { k }, start, cfg)?;
    let value = trace.final_objective();
    let support = crate::linalg::IndexSet::support_of(&x, crate::linalg::SUPPORT_TOL);
    Ok(SparseSolution { vector: x, support, objective: value, variance_ratio: None, trace })
}

/// Sparse CCA with the whitening matrices B^T B and C^T C replaced by their
/// diagonals: maximize x^T (B^T C) y subject to per-side diagonal ellipsoid
/// constraints and l0 caps. Columns of B and C must be nonzero, otherwise
/// the ellipsoid degenerates.
pub fn sparse_cca_diag_proxy(
    b: &Matrix,
    c: &Matrix,
    k1: usize,
    k2: usize,
    starts: Option<(&Vector, &Vector)>,
    cfg: &RunConfig,
) -> Result<BiSolution> {
    if b.nrows() != c.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "sample counts differ: {} vs {}",
            b.nrows(),
            c.nrows()
        )));
    }
    let p = b.ncols();
    let q = c.ncols();
    validate_k(k1, p, "k1")?;
    validate_k(k2, q, "k2")?;

    let d_b = column_norms_squared(b, "first view")?;
    let d_c = column_norms_squared(c, "second view")?;
    let cross = b.tr_mul(c); // p x q

    let (mut x, mut y) = match starts {
        Some((x, y)) => (check_len(x, p, "x0")?, check_len(y, q, "y0")?),
        None => {
            // leading pair of the diagonally whitened cross-product,
            // thresholded and mapped back to the ellipsoids
            let whitened = Matrix::from_fn(p, q, |i, j| {
                cross[(i, j)] / (d_b[i].sqrt() * d_c[j].sqrt())
            });
            let (u, v) = top_singular_pair(&whitened);
            let ux = hard_threshold(&u, k1)?;
            let vy = hard_threshold(&v, k2)?;
            (ellipsoid_embed(&ux, &d_b), ellipsoid_embed(&vy, &d_c))
        }
    };

    let mut objective = x.dot(&(&cross * &y));
    let mut trace = new_trace(objective);

    for _ in 0..cfg.max_iter {
        let started = std::time::Instant::now();
        let step_x = lmo_ellipsoid_l0(&(&cross * &y), &d_b, k1)?;
        if step_x.degenerate {
            trace.termination = Termination::DegenerateOracle;
            break;
        }
        x = step_x.maximizer;
        trace.objective_values.push(step_x.value);

        let step_y = lmo_ellipsoid_l0(&cross.tr_mul(&x), &d_c, k2)?;
        if step_y.degenerate {
            trace.termination = Termination::DegenerateOracle;
            break;
        }
        y = step_y.maximizer;
        trace.objective_values.push(step_y.value);
        trace.iter_seconds.push(started.elapsed().as_secs_f64());

        let stalled =
            (step_y.value - objective).abs() <= cfg.tol_obj * step_y.value.abs().max(1.0);
        objective = step_y.value;
        if stalled {
            trace.termination = Termination::ObjStalled;
            break;
        }
    }

    Ok(BiSolution { x, y, objective, trace })
}

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

fn new_trace(start_value: f64) -> RunTrace {
    RunTrace {
        objective_values: vec![start_value],
        gamma_values: Vec::new(),
        termination: Termination::MaxIter,
        iter_seconds: Vec::new(),
        tie_events: 0,
    }
}

fn validate_k(k: usize, n: usize, name: &str) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "sparsity level {name} = {k} out of range [1, {n}]"
        )));
    }
    Ok(())
}

fn check_len(x: &Vector, n: usize, name: &str) -> Result<Vector> {
    if x.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{name} has length {}, expected {n}",
            x.len()
        )));
    }
    Ok(x.clone())
}

fn thresholded_unit(v: &Vector, k: usize) -> Result<Vector> {
    let t = hard_threshold(v, k)?;
    let norm = t.norm();
    if norm == 0.0 {
        let mut e = Vector::zeros(v.len());
        e[0] = 1.0;
        Ok(e)
    } else {
        Ok(t / norm)
    }
}

/// Map u-space coefficients onto the ellipsoid x^T diag(d) x = 1.
fn ellipsoid_embed(u: &Vector, d: &Weights) -> Vector {
    let norm = u.norm();
    if norm == 0.0 {
        let mut x = Vector::zeros(u.len());
        x[0] = 1.0 / d[0].sqrt();
        return x;
    }
    Vector::from_fn(u.len(), |i, _| u[i] / (norm * d[i].sqrt()))
}

fn column_norms_squared(m: &Matrix, which: &str) -> Result<Weights> {
    let d = Vector::from_fn(m.ncols(), |j, _| m.column(j).norm_squared());
    if d.iter().any(|v| *v <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "{which} has a zero column: the diagonal ellipsoid degenerates"
        )));
    }
    Weights::new(d)
}

/// Deterministic alternating power iteration for the top singular pair.
fn top_singular_pair(b: &Matrix) -> (Vector, Vector) {
    let (m, n) = (b.nrows(), b.ncols());
    let mut u = Vector::from_fn(m, |i, _| 1.0 + 0.001 * (i + 1) as f64);
    u /= u.norm();
    let mut v = Vector::zeros(n);
    let mut sigma = f64::INFINITY;
    for _ in 0..5000 {
        let bv = b.tr_mul(&u);
        let nv = bv.norm();
        if nv == 0.0 {
            break;
        }
        v = bv / nv;
        let bu = b * &v;
        let nu = bu.norm();
        if nu == 0.0 {
            break;
        }
        u = bu / nu;
        if (nu - sigma).abs() <= 1e-12 * nu.max(1.0) {
            break;
        }
        sigma = nu;
    }
    (u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::RunConfig;
    use crate::linalg::l0_norm;
    use crate::spca::solve_l0_constrained;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> RunConfig {
        RunConfig::default()
    }

    fn spec(k1: usize, k2: usize) -> SvdSpec {
        SvdSpec { k1, k2, config: cfg() }
    }

    #[test]
    fn svd_hand_case() {
        let b = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let sol = sparse_svd(&b, &spec(1, 1), None, None).unwrap();
        assert!((sol.objective - 2.0).abs() <= 1e-9);
        assert!((sol.x[1].abs() - 1.0).abs() <= 1e-9);
        assert!((sol.y[1].abs() - 1.0).abs() <= 1e-9);
        assert_eq!(sol.x[0], 0.0);
        assert_eq!(sol.y[0], 0.0);
    }

    #[test]
    fn svd_unconstrained_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..5 {
            let b = Matrix::from_fn(7, 5, |_, _| rng.random_range(-1.0..1.0));
            let sol = sparse_svd(&b, &spec(7, 5), None, None).unwrap();
            let svd = nalgebra::SVD::new(b.clone(), false, false);
            let sigma_max = svd.singular_values[0];
            assert!(
                (sol.objective - sigma_max).abs() <= 1e-6 * sigma_max.max(1.0),
                "alternating {} vs dense {sigma_max}",
                sol.objective
            );
        }
    }

    #[test]
    fn svd_monotone_and_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..30 {
            let m = rng.random_range(2..8);
            let n = rng.random_range(2..8);
            let b = Matrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
            let k1 = rng.random_range(1..=m);
            let k2 = rng.random_range(1..=n);
            let sol = sparse_svd(&b, &spec(k1, k2), None, None).unwrap();
            assert!(sol.trace.is_monotone(1e-12));
            assert!((sol.x.norm() - 1.0).abs() <= 1e-10);
            assert!((sol.y.norm() - 1.0).abs() <= 1e-10);
            assert!(l0_norm(&sol.x, 1e-12) <= k1);
            assert!(l0_norm(&sol.y, 1e-12) <= k2);
            assert!((sol.x.dot(&(&b * &sol.y)) - sol.objective).abs() <= 1e-10);
        }
    }

    #[test]
    fn svd_exhaustive_small_supports() {
        // k1 = k2 = 1: the optimum is the largest-magnitude entry of B
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..20 {
            let b = Matrix::from_fn(3, 3, |_, _| rng.random_range(-2.0..2.0));
            let sol = sparse_svd(&b, &spec(1, 1), None, None).unwrap();
            let best = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            // alternating maximization can stop at a row/column-wise
            // maximal entry; it always attains at least the value of the
            // entry its start selects and never exceeds the global best
            assert!(sol.objective <= best + 1e-12);
            assert!(sol.objective > 0.0);
        }
    }

    #[test]
    fn svd_degenerate_input() {
        let b = Matrix::zeros(3, 4);
        let sol = sparse_svd(&b, &spec(2, 2), None, None).unwrap();
        assert_eq!(sol.trace.termination, Termination::DegenerateOracle);
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn nonneg_pca_examples() {
        let op = SymmetricOperator::explicit(Matrix::from_diagonal(&Vector::from_vec(vec![
            4.0, 3.0, 2.0,
        ])))
        .unwrap();
        let sol = sparse_nonneg_pca(&op, 2, None, &cfg()).unwrap();
        assert!((sol.objective - 4.0).abs() <= 1e-6);
        assert!(sol.vector.iter().all(|v| *v >= 0.0));
        assert!(sol.support.len() <= 2);
    }

    #[test]
    fn nonneg_matches_unconstrained_on_positive_matrices() {
        // with strictly positive entries the principal eigenvector is
        // positive, so the sign constraint never binds and the iterates of
        // both solvers coincide
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        for _ in 0..10 {
            let n = rng.random_range(3..8);
            let half = Matrix::from_fn(n, n, |_, _| rng.random_range(0.1..1.0));
            let a = (&half + half.transpose()) * 0.5;
            let op = SymmetricOperator::explicit(a).unwrap();
            // make it PSD for the ascent guarantee
            let op = op.clone().with_shift(op.gershgorin_shift()).unwrap();
            let k = rng.random_range(1..=n);
            let free = solve_l0_constrained(&op, k, None, &cfg()).unwrap();
            let nn = sparse_nonneg_pca(&op, k, None, &cfg()).unwrap();
            assert!(
                (free.objective - nn.objective).abs() <= 1e-8 * free.objective.abs().max(1.0),
                "free {} vs nonneg {}",
                free.objective,
                nn.objective
            );
        }
    }

    #[test]
    fn nonneg_iterates_always_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let b = Matrix::from_fn(6, 5, |_, _| rng.random_range(-1.0..1.0));
        let op = SymmetricOperator::gram(b).unwrap();
        let sol = sparse_nonneg_pca(&op, 3, None, &cfg()).unwrap();
        assert!(sol.vector.iter().all(|v| *v >= 0.0));
        assert!((sol.vector.norm() - 1.0).abs() <= 1e-10);
        assert!(sol.support.len() <= 3);
    }

    #[test]
    fn cca_enumeration_one_sparse() {
        let mut rng = ChaCha8Rng::seed_from_u64(56);
        for _ in 0..10 {
            let b = Matrix::from_fn(6, 2, |_, _| rng.random_range(-1.0..1.0));
            let c = Matrix::from_fn(6, 2, |_, _| rng.random_range(-1.0..1.0));
            let sol = sparse_cca_diag_proxy(&b, &c, 1, 1, None, &cfg()).unwrap();

            // enumerate all 1-sparse ellipsoid-feasible sign patterns
            let cross = b.tr_mul(&c);
            let mut best = f64::MIN;
            for i in 0..2 {
                for j in 0..2 {
                    let val = cross[(i, j)].abs()
                        / (b.column(i).norm() * c.column(j).norm());
                    best = best.max(val);
                }
            }
            assert!(
                sol.objective <= best + 1e-10,
                "solver {} beats enumeration {best}",
                sol.objective
            );
            // the whitened start lands on the dominant entry here
            assert!(
                (sol.objective - best).abs() <= 1e-8 * best.abs().max(1.0),
                "solver {} vs enumeration {best}",
                sol.objective
            );
        }
    }

    #[test]
    fn cca_monotone_and_constraint_satisfied() {
        let mut rng = ChaCha8Rng::seed_from_u64(57);
        for _ in 0..10 {
            let b = Matrix::from_fn(8, 4, |_, _| rng.random_range(-1.0..1.0));
            let c = Matrix::from_fn(8, 3, |_, _| rng.random_range(-1.0..1.0));
            let sol = sparse_cca_diag_proxy(&b, &c, 2, 2, None, &cfg()).unwrap();
            assert!(sol.trace.is_monotone(1e-12));
            let qb: f64 = (0..4).map(|i| b.column(i).norm_squared() * sol.x[i] * sol.x[i]).sum();
            let qc: f64 = (0..3).map(|j| c.column(j).norm_squared() * sol.y[j] * sol.y[j]).sum();
            assert!((qb - 1.0).abs() <= 1e-10);
            assert!((qc - 1.0).abs() <= 1e-10);
            assert!(l0_norm(&sol.x, 1e-12) <= 2);
            assert!(l0_norm(&sol.y, 1e-12) <= 2);
        }
    }

    #[test]
    fn cca_symmetric_sanity_and_zero_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(58);
        let b = Matrix::from_fn(6, 3, |_, _| rng.random_range(-1.0..1.0));
        let sol = sparse_cca_diag_proxy(&b, &b, 2, 2, None, &cfg()).unwrap();
        assert!(sol.trace.is_monotone(1e-12));
        assert!(sol.objective > 0.0);

        let mut with_zero = b.clone();
        with_zero.set_column(1, &Vector::zeros(6));
        assert!(sparse_cca_diag_proxy(&with_zero, &b, 2, 2, None, &cfg()).is_err());
    }
}
