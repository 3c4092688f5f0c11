//! Closed-form maximizers of a linear form over each sparsity constraint
//! set. Every solver iteration is one of these calls; all run in O(n) or
//! O(n log n) time.
//!
//! The sets covered: the unit sphere/ball, sphere with an l0 cap, the ball
//! with a weighted l1 penalty, the sphere/l1-ball intersection (solved
//! through its one-dimensional dual), the nonnegative sphere with an l0 cap,
//! and a diagonal ellipsoid with an l0 cap.

use crate::engine::{LinearOracle, WeightedL1Oracle};
use crate::error::{Error, Result};
use crate::linalg::{
    hard_threshold, l0_norm, soft_threshold, soft_threshold_scalar, Vector,
    Weights, SUPPORT_TOL,
};

/// Outcome of a linear-maximization oracle. `degenerate` marks inputs (a = 0,
/// or an all-clipped penalty) where the formulas lose uniqueness; the stated
/// conventional maximizer is still returned and callers treat the flag as a
/// stationarity signal.
#[derive(Clone, Debug)]
pub struct OracleResult {
    pub maximizer: Vector,
    pub value: f64,
    pub degenerate: bool,
}

/// Outcome of the sphere/l1-ball oracle: primal maximizer plus the dual
/// multiplier certifying it.
#[derive(Clone, Debug)]
pub struct DualSolveResult {
    pub maximizer: Vector,
    pub primal_value: f64,
    pub lambda_star: f64,
    pub dual_value: f64,
}

/// max { <a,x> : ||x||_2 <= 1 }: a/||a|| with value ||a||; degenerate at
/// a = 0 (returns e_1 by convention).
pub fn lmo_sphere(a: &Vector) -> OracleResult {
    let norm = a.norm();
    if norm == 0.0 {
        return OracleResult { maximizer: unit_coordinate(a.len(), 0), value: 0.0, degenerate: true };
    }
    OracleResult { maximizer: a / norm, value: norm, degenerate: false }
}

/// max { <a,x> : ||x||_2 = 1, ||x||_0 <= k }: T_k(a)/||T_k(a)|| with value
/// ||T_k(a)||.
pub fn lmo_sphere_l0(a: &Vector, k: usize) -> Result<OracleResult> {
    let t = hard_threshold(a, k)?;
    let norm = t.norm();
    if norm == 0.0 {
        return Ok(OracleResult {
            maximizer: unit_coordinate(a.len(), 0),
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(OracleResult { maximizer: t / norm, value: norm, degenerate: false })
}

/// max { <a,x>^2 - s*||x||_0 : ||x||_2 = 1 }: value sum_i (a_i^2 - s)_+ with
/// maximizer proportional to a restricted to { i : a_i^2 > s }. When every
/// a_i^2 <= s the formula's maximizer collapses to 0, which is infeasible on
/// the sphere; flagged degenerate with value 0.
pub fn solve_sq_l0_pen(a: &Vector, s: f64) -> Result<OracleResult> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("penalty s must be positive, got {s}")));
    }
    let mut value = 0.0;
    let mut masked = Vector::zeros(a.len());
    for i in 0..a.len() {
        let excess = a[i] * a[i] - s;
        if excess > 0.0 {
            value += excess;
            masked[i] = a[i];
        }
    }
    let norm = masked.norm();
    if norm == 0.0 {
        return Ok(OracleResult { maximizer: masked, value: 0.0, degenerate: true });
    }
    Ok(OracleResult { maximizer: masked / norm, value, degenerate: false })
}

/// max { <a,x> - sum_i w_i |x_i| : ||x||_2 <= 1 }: value ||S_w(a)|| with
/// maximizer S_w(a)/||S_w(a)||; degenerate (x* = 0, value 0) when the
/// soft threshold clips everything.
pub fn solve_weighted_l1_pen(a: &Vector, w: &Weights) -> Result<OracleResult> {
    let s = soft_threshold(a, w)?;
    let norm = s.norm();
    if norm == 0.0 {
        return Ok(OracleResult { maximizer: s, value: 0.0, degenerate: true });
    }
    Ok(OracleResult { maximizer: s / norm, value: norm, degenerate: false })
}

/// max { <a,x> : ||x||_2 <= 1, ||x||_1 <= radius } through its dual
/// min_{lambda >= 0} { lambda*radius + ||S_{lambda e}(a)||_2 }.
///
/// lambda* = 0 iff ||a||_1/||a||_2 <= radius. Otherwise the dual derivative
/// changes sign on exactly one interval between consecutive sorted
/// magnitudes; the interior zero solves a quadratic, with a bisection
/// fallback to width 1e-12 when the quadratic is degenerate or its roots are
/// numerically inconsistent. Flat stretches of the dual take the smallest
/// minimizer.
pub fn solve_l2_l1(a: &Vector, radius: f64) -> Result<DualSolveResult> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    let norm2 = a.norm();
    if norm2 == 0.0 {
        return Err(Error::InvalidParameter("sphere/l1 oracle input a = 0 (degenerate)".into()));
    }
    let norm1: f64 = a.iter().map(|v| v.abs()).sum();
    if norm1 / norm2 <= radius {
        // l1 constraint inactive at the sphere maximizer
        let x = a / norm2;
        return Ok(DualSolveResult {
            maximizer: x,
            primal_value: norm2,
            lambda_star: 0.0,
            dual_value: norm2,
        });
    }

    // Sorted magnitudes descending: mu_1 >= ... >= mu_n >= 0, with the dual
    // smooth between consecutive values and g'(0) < 0 here.
    let mut mu: Vec<f64> = a.iter().map(|v| v.abs()).collect();
    mu.sort_unstable_by(|x, y| y.total_cmp(x));
    let n = mu.len();

    // Kink case: with t magnitudes tied at the top, the derivative on the
    // piece just below mu_1 is radius - sqrt(t). When that stays negative
    // the minimizer sits exactly at mu_1, where the shrinkage vanishes and
    // the primal optimum is the l1 vertex spread evenly over the tied
    // coordinates: x_i = (radius/t) sgn(a_i), feasible since radius/sqrt(t)
    // < 1, with matching value radius*mu_1 on both sides.
    let ties = mu.iter().take_while(|m| **m == mu[0]).count();
    if radius < (ties as f64).sqrt() {
        let mut x = Vector::zeros(n);
        for i in 0..n {
            if a[i].abs() == mu[0] {
                x[i] = radius / ties as f64 * a[i].signum();
            }
        }
        let value = radius * mu[0];
        return Ok(DualSolveResult {
            maximizer: x,
            primal_value: value,
            lambda_star: mu[0],
            dual_value: value,
        });
    }

    let deriv = |lam: f64| -> f64 {
        let mut active_sum = 0.0;
        let mut active_cnt = 0.0;
        let mut shrunk_sq = 0.0;
        for &m in &mu {
            let t = m - lam;
            if t > 0.0 {
                active_sum += m;
                active_cnt += 1.0;
                shrunk_sq += t * t;
            }
        }
        if shrunk_sq == 0.0 {
            return radius;
        }
        radius + (active_cnt * lam - active_sum) / shrunk_sq.sqrt()
    };

    // Locate the first interval [lo, hi] (lambda increasing) whose right
    // endpoint has nonnegative derivative.
    let mut lambda_star = mu[0];
    let mut prefix_sum = vec![0.0; n + 1]; // prefix_sum[p] = mu_1 + .. + mu_p
    let mut prefix_sq = vec![0.0; n + 1];
    for p in 0..n {
        prefix_sum[p + 1] = prefix_sum[p] + mu[p];
        prefix_sq[p + 1] = prefix_sq[p] + mu[p] * mu[p];
    }
    // Intervals in increasing lambda: [mu_{p+1}, mu_p] has the top p
    // magnitudes active, p = n down to 1 (mu_{n+1} := 0).
    'scan: for p in (1..=n).rev() {
        let lo = if p == n { 0.0 } else { mu[p] };
        let hi = mu[p - 1];
        if lo >= hi {
            continue; // empty interval from tied magnitudes
        }
        if deriv(hi) < 0.0 {
            continue;
        }
        // sign change inside (lo, hi]
        let s1 = prefix_sum[p];
        let s2 = prefix_sq[p];
        let pf = p as f64;
        let qa = pf * (radius * radius - pf);
        let qb = 2.0 * s1 * (pf - radius * radius);
        let qc = radius * radius * s2 - s1 * s1;
        let mut candidates: Vec<f64> = Vec::new();
        if qa.abs() > 1e-300 {
            let disc = qb * qb - 4.0 * qa * qc;
            if disc >= 0.0 {
                let root = disc.sqrt();
                candidates.push((-qb - root) / (2.0 * qa));
                candidates.push((-qb + root) / (2.0 * qa));
            }
        } else if qb.abs() > 1e-300 {
            candidates.push(-qc / qb);
        } else if qc.abs() <= 1e-12 * (1.0 + s1 * s1) {
            // derivative identically zero on the interval: flat dual,
            // smallest minimizer is the left endpoint
            lambda_star = lo;
            break 'scan;
        }
        candidates.retain(|&lam| {
            lam >= lo - 1e-12 && lam <= hi + 1e-12 && s1 - pf * lam >= 0.0
        });
        candidates.sort_by(f64::total_cmp);
        for lam in candidates {
            let lam = lam.clamp(lo, hi);
            if deriv(lam).abs() <= 1e-9 * (1.0 + radius) {
                lambda_star = lam;
                break 'scan;
            }
        }
        // quadratic ill-conditioned: bisect on the derivative sign
        let (mut blo, mut bhi) = (lo, hi);
        while bhi - blo > 1e-12 {
            let mid = 0.5 * (blo + bhi);
            if deriv(mid) < 0.0 {
                blo = mid;
            } else {
                bhi = mid;
            }
        }
        lambda_star = bhi;
        break 'scan;
    }

    let shrunk = soft_threshold_scalar(a, lambda_star);
    let shrunk_norm = shrunk.norm();
    let dual_value = lambda_star * radius + shrunk_norm;
    if shrunk_norm == 0.0 {
        // only reachable if lambda* collapsed onto mu_1 numerically
        return Err(Error::InvalidParameter(
            "sphere/l1 dual collapsed to the largest magnitude".into(),
        ));
    }
    let maximizer = shrunk / shrunk_norm;
    let primal_value = a.dot(&maximizer);
    Ok(DualSolveResult { maximizer, primal_value, lambda_star, dual_value })
}

/// max { <a,x> : ||x||_2 = 1, x >= 0, ||x||_0 <= k }: T_k of the positive
/// part when one exists, otherwise the single best coordinate (the least
/// negative entry, smallest index on ties). Degenerate only at a = 0.
pub fn lmo_sphere_l0_nonneg(a: &Vector, k: usize) -> Result<OracleResult> {
    if k == 0 || k > a.len() {
        return Err(Error::InvalidParameter(format!(
            "sparsity level k = {k} out of range [1, {}]",
            a.len()
        )));
    }
    let plus = a.map(|v| if v > 0.0 { v } else { 0.0 });
    if plus.iter().any(|v| *v > 0.0) {
        let t = hard_threshold(&plus, k)?;
        let norm = t.norm();
        return Ok(OracleResult { maximizer: t / norm, value: norm, degenerate: false });
    }
    // all entries nonpositive: a vertex is optimal
    let mut best = 0usize;
    for i in 1..a.len() {
        if a[i] > a[best] {
            best = i;
        }
    }
    Ok(OracleResult {
        maximizer: unit_coordinate(a.len(), best),
        value: a[best],
        degenerate: a.iter().all(|v| *v == 0.0),
    })
}

/// max { <a,x> : x^T diag(d) x = 1, ||x||_0 <= k } via u = sqrt(d) x, which
/// reduces to the sphere/l0 oracle for the scaled coefficients a_i/sqrt(d_i):
/// x* = diag(1/sqrt(d)) T_k(a/sqrt(d)) / ||T_k(a/sqrt(d))||.
pub fn lmo_ellipsoid_l0(a: &Vector, d: &Weights, k: usize) -> Result<OracleResult> {
    if a.len() != d.len() {
        return Err(Error::DimensionMismatch(format!(
            "vector length {} vs metric length {}",
            a.len(),
            d.len()
        )));
    }
    let scaled = Vector::from_fn(a.len(), |i, _| a[i] / d[i].sqrt());
    let t = hard_threshold(&scaled, k)?;
    let norm = t.norm();
    if norm == 0.0 {
        let mut x = Vector::zeros(a.len());
        x[0] = 1.0 / d[0].sqrt();
        return Ok(OracleResult { maximizer: x, value: 0.0, degenerate: true });
    }
    let x = Vector::from_fn(a.len(), |i, _| t[i] / (d[i].sqrt() * norm));
    Ok(OracleResult { maximizer: x, value: norm, degenerate: false })
}

fn unit_coordinate(n: usize, i: usize) -> Vector {
    let mut e = Vector::zeros(n);
    e[i] = 1.0;
    e
}

// ---------------------------------------------------------------------------
// Constraint-set adapters for the ascent engine: each couples an oracle with
// its feasibility predicate.
// ---------------------------------------------------------------------------

/// The unit sphere (used by the power method; the oracle is the same as for
/// the ball since a linear form is maximized on the boundary).
pub struct SphereSet;

impl LinearOracle for SphereSet {
    fn maximize(&self, a: &Vector) -> OracleResult {
        lmo_sphere(a)
    }
    fn is_feasible(&self, x: &Vector, tol: f64) -> bool {
        (x.norm() - 1.0).abs() <= tol
    }
}

/// The unit ball in the sample space (GPower iterations live here).
pub struct UnitBallSet;

impl LinearOracle for UnitBallSet {
    fn maximize(&self, a: &Vector) -> OracleResult {
        lmo_sphere(a)
    }
    fn is_feasible(&self, x: &Vector, tol: f64) -> bool {
        x.norm() <= 1.0 + tol
    }
}

/// Unit sphere intersected with { ||x||_0 <= k }.
pub struct SphereL0Set {
    pub k: usize,
}

impl LinearOracle for SphereL0Set {
    fn maximize(&self, a: &Vector) -> OracleResult {
        lmo_sphere_l0(a, self.k).expect("k validated at construction")
    }
    fn is_feasible(&self, x: &Vector, tol: f64) -> bool {
        (x.norm() - 1.0).abs() <= tol && l0_norm(x, SUPPORT_TOL) <= self.k
    }
}

/// Unit ball intersected with { ||x||_1 <= radius }.
pub struct L2L1Set {
    pub radius: f64,
}

impl LinearOracle for L2L1Set {
    fn maximize(&self, a: &Vector) -> OracleResult {
        match solve_l2_l1(a, self.radius) {
            Ok(r) => OracleResult {
                maximizer: r.maximizer,
                value: r.primal_value,
                degenerate: false,
            },
            // a = 0: every feasible point is optimal; signal stationarity
            Err(_) => OracleResult {
                maximizer: Vector::zeros(a.len()),
                value: 0.0,
                degenerate: true,
            },
        }
    }
    fn is_feasible(&self, x: &Vector, tol: f64) -> bool {
        x.norm() <= 1.0 + tol && x.iter().map(|v| v.abs()).sum::<f64>() <= self.radius + tol
    }
}

/// Nonnegative part of the sphere with an l0 cap.
pub struct NonnegSphereL0Set {
    pub k: usize,
}

impl LinearOracle for NonnegSphereL0Set {
    fn maximize(&self, a: &Vector) -> OracleResult {
        lmo_sphere_l0_nonneg(a, self.k).expect("k validated at construction")
    }
    fn is_feasible(&self, x: &Vector, tol: f64) -> bool {
        (x.norm() - 1.0).abs() <= tol
            && l0_norm(x, SUPPORT_TOL) <= self.k
            && x.iter().all(|v| *v >= -tol)
    }
}

/// Diagonal ellipsoid { x^T diag(d) x = 1 } with an l0 cap.
pub struct EllipsoidL0Set {
    pub d: Weights,
    pub k: usize,
}

impl LinearOracle for EllipsoidL0Set {
    fn maximize(&self, a: &Vector) -> OracleResult {
        lmo_ellipsoid_l0(a, &self.d, self.k).expect("k and d validated at construction")
    }
    fn is_feasible(&self, x: &Vector, tol: f64) -> bool {
        let q: f64 = (0..x.len()).map(|i| self.d[i] * x[i] * x[i]).sum();
        (q - 1.0).abs() <= tol && l0_norm(x, SUPPORT_TOL) <= self.k
    }
}

/// The unit ball as the constraint set of composite (weighted-l1-penalized)
/// iterations.
pub struct BallWeightedL1Set;

impl WeightedL1Oracle for BallWeightedL1Set {
    fn maximize_weighted(&self, a: &Vector, w: &Weights) -> OracleResult {
        solve_weighted_l1_pen(a, w).expect("dimensions fixed by the solver")
    }
    fn is_feasible(&self, x: &Vector, tol: f64) -> bool {
        x.norm() <= 1.0 + tol
    }
}
