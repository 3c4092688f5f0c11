//! Reference solvers: exhaustive support enumeration, exact forward greedy,
//! and the proposition validator that pits every closed-form oracle against
//! brute force. These exist to certify the fast algorithms, so they stay
//! deliberately simple and are guarded by explicit budgets.

pub mod enumeration;

use rayon::prelude::*;

use crate::engine::{RunTrace, Termination};
use crate::error::{Error, Result};
use crate::linalg::{IndexSet, SymmetricOperator, Vector, Weights, SUPPORT_TOL};
use crate::oracles;
use crate::spca::{dense_symmetric_max_eigen, SparseSolution};

/// Guard rails for combinatorial searches.
#[derive(Clone, Copy, Debug)]
pub struct OracleBudget {
    /// Largest dimension exhaustive search accepts.
    pub max_dimension: usize,
    /// Largest number of supports a single search may enumerate.
    pub max_support_enumerations: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_dimension: 16, max_support_enumerations: 1_000_000 }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Global optimum of the k-sparse quadratic maximization by enumerating all
/// size-k supports and taking the principal eigenvalue of each submatrix.
/// Size-k supports suffice: eigenvalue interlacing makes the submatrix
/// maximum nondecreasing as a support grows. Ties between supports resolve
/// to the lexicographically smallest, independent of evaluation order.
pub fn exhaustive_l0(
    op: &SymmetricOperator,
    k: usize,
    budget: &OracleBudget,
) -> Result<SparseSolution> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "sparsity level k = {k} out of range [1, {n}]"
        )));
    }
    if n > budget.max_dimension {
        return Err(Error::BudgetExceeded(format!(
            "exhaustive search over dimension {n} exceeds the cap {}",
            budget.max_dimension
        )));
    }
    let count = binomial(n, k);
    if count > budget.max_support_enumerations {
        return Err(Error::BudgetExceeded(format!(
            "{count} supports of size {k} exceed the enumeration cap {}",
            budget.max_support_enumerations
        )));
    }

    let mut supports: Vec<Vec<usize>> = Vec::with_capacity(count);
    enumeration::for_each_support(n, k, |s| supports.push(s.to_vec()));

    let best = supports
        .par_iter()
        .map(|support| {
            let sub = op.principal_submatrix(support);
            let (value, u) = dense_symmetric_max_eigen(&sub);
            (value, support, u)
        })
        .reduce_with(|a, b| {
            // larger value wins; exact ties go to the lexicographically
            // smaller support so parallel reduction stays deterministic
            if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                a
            } else {
                b
            }
        })
        .expect("at least one support of size k exists");

    let (value, support, u) = best;
    let mut x = Vector::zeros(n);
    for (j, &i) in support.iter().enumerate() {
        x[i] = u[j];
    }
    let trace = RunTrace {
        objective_values: vec![value],
        gamma_values: Vec::new(),
        termination: Termination::ObjStalled,
        iter_seconds: Vec::new(),
        tie_events: 0,
    };
    Ok(SparseSolution {
        support: IndexSet::support_of(&x, SUPPORT_TOL),
        vector: x,
        objective: value,
        variance_ratio: None,
        trace,
    })
}

/// Exact forward greedy: grow the support one index at a time, always
/// adding the coordinate whose augmented principal submatrix has the
/// largest maximal eigenvalue (smallest index on ties). Returns the whole
/// path for k = 1..=k_max; nested supports make the objectives
/// nondecreasing.
pub fn exact_greedy(op: &SymmetricOperator, k_max: usize) -> Result<Vec<SparseSolution>> {
    let n = op.dim();
    if k_max == 0 || k_max > n {
        return Err(Error::InvalidParameter(format!(
            "path length k_max = {k_max} out of range [1, {n}]"
        )));
    }

    let mut support: Vec<usize> = Vec::with_capacity(k_max);
    let mut path = Vec::with_capacity(k_max);
    for _ in 0..k_max {
        let mut best: Option<(f64, usize, Vector)> = None;
        for i in 0..n {
            if support.contains(&i) {
                continue;
            }
            let mut candidate = support.clone();
            candidate.push(i);
            candidate.sort_unstable();
            let sub = op.principal_submatrix(&candidate);
            let (value, u) = dense_symmetric_max_eigen(&sub);
            let better = match &best {
                None => true,
                Some((bv, bi, _)) => value > *bv || (value == *bv && i < *bi),
            };
            if better {
                best = Some((value, i, u));
            }
        }
        let (value, chosen, u) = best.expect("k_max <= n leaves a candidate");
        support.push(chosen);
        support.sort_unstable();

        let mut x = Vector::zeros(n);
        for (j, &i) in support.iter().enumerate() {
            x[i] = u[j];
        }
        let trace = RunTrace {
            objective_values: vec![value],
            gamma_values: Vec::new(),
            termination: Termination::ObjStalled,
            iter_seconds: Vec::new(),
            tie_events: 0,
        };
        path.push(SparseSolution {
            support: IndexSet::support_of(&x, SUPPORT_TOL),
            vector: x,
            objective: value,
            variance_ratio: None,
            trace,
        });
    }
    Ok(path)
}

/// Outcome of one proposition check: the largest deviation brute force
/// found against the closed form, and whether it stayed within tolerance.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ValidationReport {
    pub proposition: String,
    pub trials: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: {} trials, max deviation {:.3e} (tolerance {:.1e}) -> {}",
            self.proposition,
            self.trials,
            self.max_deviation,
            self.tolerance,
            if self.pass { "pass" } else { "FAIL" }
        )
    }
}

/// Check one closed-form oracle against its enumeration or sampling
/// counterpart on random instances of dimension 2..=dimension_cap.
/// Recognized names: sphere_l0, sq_l0_pen, weighted_l1_pen, l2_l1,
/// nonneg_l0, ellipsoid_l0.
pub fn validate_proposition(
    name: &str,
    trials: usize,
    dimension_cap: usize,
) -> Result<ValidationReport> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x0facade);
    if trials == 0 || dimension_cap < 2 {
        return Err(Error::InvalidParameter(
            "validation needs at least one trial and dimension cap >= 2".into(),
        ));
    }

    let mut max_dev = 0.0_f64;
    let mut record = |d: f64| {
        if d > max_dev {
            max_dev = d;
        }
    };
    let tolerance = match name {
        "l2_l1" => 1e-8,
        _ => 1e-10,
    };

    for _ in 0..trials {
        let n = rng.random_range(2..=dimension_cap);
        let a = Vector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
        match name {
            "sphere_l0" => {
                let k = rng.random_range(1..=n);
                let closed = oracles::lmo_sphere_l0(&a, k)?;
                let brute = enumeration::max_linear_sphere_l0(&a, k);
                record((closed.value - brute).abs());
            }
            "sq_l0_pen" => {
                let top = a.iter().map(|v| v * v).fold(0.0_f64, f64::max);
                if top <= 0.0 {
                    continue;
                }
                let s = rng.random_range(0.05..0.95) * top;
                let closed = oracles::solve_sq_l0_pen(&a, s)?;
                let brute = enumeration::max_sq_l0_penalized(&a, s);
                record((closed.value - brute).abs());
            }
            "weighted_l1_pen" => {
                let w = Weights::new(Vector::from_fn(n, |_, _| rng.random_range(0.05..2.0)))?;
                let closed = oracles::solve_weighted_l1_pen(&a, &w)?;
                let sampled = enumeration::sample_weighted_l1_penalized(&a, &w, 2000, &mut rng);
                record((sampled - closed.value).max(0.0));
            }
            "l2_l1" => {
                if a.norm() < 1e-9 {
                    continue;
                }
                let radius = rng.random_range(0.8..(n as f64).sqrt() + 0.3);
                let dual = oracles::solve_l2_l1(&a, radius)?;
                record((dual.dual_value - dual.primal_value).abs());
                let grid = enumeration::l2_l1_dual_grid_min(&a, radius, 4000);
                record((dual.dual_value - grid).max(0.0));
                let sampled = enumeration::sample_l2_l1_feasible(&a, radius, 1000, &mut rng);
                record((sampled - dual.dual_value).max(0.0));
            }
            "nonneg_l0" => {
                let k = rng.random_range(1..=n);
                let closed = oracles::lmo_sphere_l0_nonneg(&a, k)?;
                let brute = enumeration::max_linear_sphere_l0_nonneg(&a, k);
                record((closed.value - brute).abs());
            }
            "ellipsoid_l0" => {
                let k = rng.random_range(1..=n);
                let d = Weights::new(Vector::from_fn(n, |_, _| rng.random_range(0.1..4.0)))?;
                let closed = oracles::lmo_ellipsoid_l0(&a, &d, k)?;
                let brute = enumeration::max_linear_ellipsoid_l0(&a, &d, k);
                record((closed.value - brute).abs());
            }
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown proposition '{other}' (expected sphere_l0, sq_l0_pen, \
                     weighted_l1_pen, l2_l1, nonneg_l0, or ellipsoid_l0)"
                )));
            }
        }
    }

    Ok(ValidationReport {
        proposition: name.to_string(),
        trials,
        max_deviation: max_dev,
        tolerance,
        pass: max_dev <= tolerance,
    })
}
