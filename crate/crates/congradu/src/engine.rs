//! Generic conditional-gradient ascent for maximizing a convex objective
//! over a compact (possibly nonconvex) feasible set.
//!
//! Each iteration linearizes the objective at the current point and jumps to
//! a global maximizer of that linear form over the set, supplied by an
//! oracle. Convexity of the objective makes every step monotone: the ascent
//! gap `gamma = <x' - x, F'(x)>` is nonnegative and lower-bounds the actual
//! objective increase, so it doubles as the stationarity certificate.
//!
//! `run` handles smooth-plus-hidden-structure objectives through a plain
//! linear oracle; `run_composite` handles objectives of the form
//! `f(x) + g(x)` with `g` separable and concave in `|x_i|`, reweighting the
//! penalty at each iterate and delegating to a weighted-l1 oracle.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Vector, Weights};
use crate::oracles::OracleResult;

/// A convex objective with subgradients. `value_and_subgradient` exists so
/// implementations can share one operator application per iteration.
pub trait Objective {
    fn value(&self, x: &Vector) -> f64;
    fn subgradient(&self, x: &Vector) -> Vector;
    fn value_and_subgradient(&self, x: &Vector) -> (f64, Vector) {
        (self.value(x), self.subgradient(x))
    }
}

/// A feasible set exposing exact linear maximization and a membership test.
pub trait LinearOracle {
    /// argmax { <a, x> : x in the set }, with its value.
    fn maximize(&self, a: &Vector) -> OracleResult;
    fn is_feasible(&self, x: &Vector, tol: f64) -> bool;
}

/// A feasible set exposing exact maximization of `<a, x> - sum_i w_i |x_i|`.
pub trait WeightedL1Oracle {
    fn maximize_weighted(&self, a: &Vector, w: &Weights) -> OracleResult;
    fn is_feasible(&self, x: &Vector, tol: f64) -> bool;
}

/// A penalty `g(x) = sum_i h(|x_i|)` with `h` concave increasing is handled
/// by linearizing `h` at the current magnitudes, which yields positive
/// weights `w_i = -g'` for the weighted oracle.
pub trait SeparablePenalty {
    /// g(x), a nonpositive concave term added to the smooth part.
    fn value(&self, x: &Vector) -> f64;
    /// Linearization weights at x; all strictly positive.
    fn weights(&self, x: &Vector) -> Weights;
}

#[derive(Clone, Copy, Debug)]
pub struct RunConfig {
    pub max_iter: usize,
    /// Relative objective-stall tolerance.
    pub tol_obj: f64,
    /// Relative ascent-gap tolerance.
    pub tol_gamma: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { max_iter: 1000, tol_obj: 1e-9, tol_gamma: 1e-9 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Ascent gap within tolerance: the iterate is stationary.
    GammaZero,
    /// Objective increase fell below the stall tolerance.
    ObjStalled,
    /// Iteration budget exhausted.
    MaxIter,
    /// The oracle lost uniqueness (zero subgradient or fully clipped
    /// penalty); the current iterate is kept.
    DegenerateOracle,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Termination::GammaZero => "gamma_zero",
            Termination::ObjStalled => "obj_stalled",
            Termination::MaxIter => "max_iter",
            Termination::DegenerateOracle => "degenerate_oracle",
        };
        f.write_str(s)
    }
}

/// Trajectory of one ascent run. `objective_values` holds one entry per kept
/// iterate including the start; `gamma_values` holds one entry per oracle
/// call; `iter_seconds` times the full iterations (oracle plus operator
/// application). `tie_events` counts tie-induced fallbacks in solvers that
/// track them, and is zero for plain runs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunTrace {
    pub objective_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub termination: Termination,
    pub iter_seconds: Vec<f64>,
    pub tie_events: usize,
}

impl RunTrace {
    pub fn final_objective(&self) -> f64 {
        *self.objective_values.last().expect("trace always holds the starting value")
    }

    pub fn iterations(&self) -> usize {
        self.objective_values.len() - 1
    }

    /// Objective increases monotonically up to `slack` per step, relative to
    /// the running magnitude.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.objective_values
            .windows(2)
            .all(|w| w[1] >= w[0] - slack * w[0].abs().max(1.0))
    }
}

/// Maximize `objective` over `set` by repeated linearization, starting from
/// the feasible point `x0`.
pub fn run<O, S>(objective: &O, set: &S, x0: Vector, config: &RunConfig) -> Result<(Vector, RunTrace)>
where
    O: Objective + ?Sized,
    S: LinearOracle + ?Sized,
{
    if !set.is_feasible(&x0, 1e-10) {
        return Err(Error::InfeasibleStart(format!(
            "starting point violates the feasible set (norm {:.6e})",
            x0.norm()
        )));
    }

    let mut x = x0;
    let (mut value, mut grad) = objective.value_and_subgradient(&x);
    let mut trace = RunTrace {
        objective_values: vec![value],
        gamma_values: Vec::new(),
        termination: Termination::MaxIter,
        iter_seconds: Vec::new(),
        tie_events: 0,
    };

    for iter in 0..config.max_iter {
        let started = Instant::now();
        let step = set.maximize(&grad);
        if step.degenerate {
            trace.termination = Termination::DegenerateOracle;
            return Ok((x, trace));
        }
        let gamma = grad.dot(&step.maximizer) - grad.dot(&x);
        trace.gamma_values.push(gamma);
        if gamma <= config.tol_gamma * value.abs().max(1.0) {
            trace.termination = Termination::GammaZero;
            return Ok((x, trace));
        }

        let x_next = step.maximizer;
        debug_assert!(set.is_feasible(&x_next, 1e-10), "oracle produced an infeasible point");
        let (value_next, grad_next) = objective.value_and_subgradient(&x_next);
        trace.iter_seconds.push(started.elapsed().as_secs_f64());
        if value_next < value - 1e-12 * value.abs().max(1.0) {
            return Err(Error::MonotonicityViolated { iter, drop: value - value_next });
        }
        trace.objective_values.push(value_next);
        let stalled = (value_next - value).abs() <= config.tol_obj * value_next.abs().max(1.0);
        x = x_next;
        value = value_next;
        grad = grad_next;
        if stalled {
            trace.termination = Termination::ObjStalled;
            return Ok((x, trace));
        }
    }

    Ok((x, trace))
}

/// Maximize `smooth(x) + penalty(x)` over `set` by linearizing both parts:
/// the smooth part through its subgradient, the concave separable penalty
/// through positive weights on `|x_i|`. The trace records the full composite
/// objective.
pub fn run_composite<O, P, S>(
    smooth: &O,
    penalty: &P,
    set: &S,
    x0: Vector,
    config: &RunConfig,
) -> Result<(Vector, RunTrace)>
where
    O: Objective + ?Sized,
    P: SeparablePenalty + ?Sized,
    S: WeightedL1Oracle + ?Sized,
{
    if !set.is_feasible(&x0, 1e-10) {
        return Err(Error::InfeasibleStart(format!(
            "starting point violates the feasible set (norm {:.6e})",
            x0.norm()
        )));
    }

    let mut x = x0;
    let (smooth_value, mut grad) = smooth.value_and_subgradient(&x);
    let mut value = smooth_value + penalty.value(&x);
    let mut trace = RunTrace {
        objective_values: vec![value],
        gamma_values: Vec::new(),
        termination: Termination::MaxIter,
        iter_seconds: Vec::new(),
        tie_events: 0,
    };

    for iter in 0..config.max_iter {
        let started = Instant::now();
        let weights = penalty.weights(&x);
        let step = set.maximize_weighted(&grad, &weights);
        if step.degenerate {
            trace.termination = Termination::DegenerateOracle;
            return Ok((x, trace));
        }
        // gap of the linearized model: the oracle value minus the model at x
        let model_at_x: f64 =
            grad.dot(&x) - (0..x.len()).map(|i| weights[i] * x[i].abs()).sum::<f64>();
        let gamma = step.value - model_at_x;
        trace.gamma_values.push(gamma);
        if gamma <= config.tol_gamma * value.abs().max(1.0) {
            trace.termination = Termination::GammaZero;
            return Ok((x, trace));
        }

        let x_next = step.maximizer;
        debug_assert!(set.is_feasible(&x_next, 1e-10), "oracle produced an infeasible point");
        let (smooth_next, grad_next) = smooth.value_and_subgradient(&x_next);
        let value_next = smooth_next + penalty.value(&x_next);
        trace.iter_seconds.push(started.elapsed().as_secs_f64());
        if value_next < value - 1e-12 * value.abs().max(1.0) {
            return Err(Error::MonotonicityViolated { iter, drop: value - value_next });
        }
        trace.objective_values.push(value_next);
        let stalled = (value_next - value).abs() <= config.tol_obj * value_next.abs().max(1.0);
        x = x_next;
        value = value_next;
        grad = grad_next;
        if stalled {
            trace.termination = Termination::ObjStalled;
            return Ok((x, trace));
        }
    }

    Ok((x, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymmetricOperator;
    use crate::oracles::{BallWeightedL1Set, SphereL0Set, SphereSet};

    /// x -> x^T A x with subgradient 2 A x, sharing one apply per call.
    struct Quadratic<'a>(&'a SymmetricOperator);

    impl Objective for Quadratic<'_> {
        fn value(&self, x: &Vector) -> f64 {
            self.0.quadratic_form(x)
        }
        fn subgradient(&self, x: &Vector) -> Vector {
            self.0.apply(x) * 2.0
        }
        fn value_and_subgradient(&self, x: &Vector) -> (f64, Vector) {
            let ax = self.0.apply(x);
            (x.dot(&ax), ax * 2.0)
        }
    }

    fn diag(entries: &[f64]) -> SymmetricOperator {
        SymmetricOperator::explicit(nalgebra::DMatrix::from_diagonal(
            &Vector::from_vec(entries.to_vec()),
        ))
        .unwrap()
    }

    fn e(n: usize, i: usize) -> Vector {
        let mut v = Vector::zeros(n);
        v[i] = 1.0;
        v
    }

    #[test]
    fn sphere_run_is_the_power_method() {
        let op = diag(&[3.0, 1.0]);
        let obj = Quadratic(&op);
        let x0 = Vector::from_vec(vec![0.6, 0.8]);
        let (x, trace) = run(&obj, &SphereSet, x0, &RunConfig::default()).unwrap();
        // the relative gap rule stops once the residual component is about
        // sqrt(tol), so the eigenvector error is 1e-4-ish while the
        // objective error is tol-ish
        assert!((x[0].abs() - 1.0).abs() <= 1e-8);
        assert!(x[1].abs() <= 1e-4);
        assert!((trace.final_objective() - 3.0).abs() <= 1e-8);
        assert!(trace.is_monotone(1e-12));
        assert_eq!(trace.objective_values.len(), trace.iterations() + 1);
        assert_eq!(trace.gamma_values.len(), trace.iterations() + 1);
    }

    #[test]
    fn stationary_start_stops_immediately() {
        let op = diag(&[3.0, 1.0]);
        let obj = Quadratic(&op);
        let (x, trace) = run(&obj, &SphereSet, e(2, 0), &RunConfig::default()).unwrap();
        assert_eq!(trace.termination, Termination::GammaZero);
        assert_eq!(trace.objective_values, vec![3.0]);
        assert_eq!(trace.gamma_values.len(), 1);
        assert!(trace.gamma_values[0].abs() <= 1e-15);
        assert_eq!(x.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn sparse_local_maximizer_is_a_fixed_point() {
        // with the l0 cap at 2 the coordinate point on the smallest
        // eigenvalue is stationary: the subgradient is parallel to it
        let op = diag(&[4.0, 3.0, 2.0]);
        let obj = Quadratic(&op);
        let set = SphereL0Set { k: 2 };
        let (x, trace) = run(&obj, &set, e(3, 2), &RunConfig::default()).unwrap();
        assert_eq!(trace.termination, Termination::GammaZero);
        assert_eq!(x.as_slice(), &[0.0, 0.0, 1.0]);
        assert_eq!(trace.final_objective(), 2.0);
        assert!(trace.gamma_values[0] <= 1e-12);
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let op = diag(&[2.0, 1.0]);
        let obj = Quadratic(&op);
        let bad = Vector::from_vec(vec![2.0, 0.0]);
        assert!(run(&obj, &SphereSet, bad, &RunConfig::default()).is_err());
    }

    #[test]
    fn gap_lower_bounds_the_objective_increase() {
        // convexity gives F(x') - F(x) >= gamma for every accepted step
        let m = nalgebra::DMatrix::from_row_slice(
            4,
            4,
            &[
                5.0, 1.0, 0.5, 0.0, 1.0, 4.0, 0.2, 0.3, 0.5, 0.2, 3.0, 0.1, 0.0, 0.3, 0.1, 2.0,
            ],
        );
        let op = SymmetricOperator::explicit(m).unwrap();
        let obj = Quadratic(&op);
        let s3 = 3.0_f64.sqrt();
        let x0 = Vector::from_vec(vec![1.0 / s3, 1.0 / s3, 1.0 / s3, 0.0]);
        let (_, trace) = run(&obj, &SphereL0Set { k: 3 }, x0, &RunConfig::default()).unwrap();
        for j in 0..trace.iterations() {
            let increase = trace.objective_values[j + 1] - trace.objective_values[j];
            assert!(
                increase >= trace.gamma_values[j] - 1e-10,
                "step {j}: increase {increase} below gap {}",
                trace.gamma_values[j]
            );
        }
        // telescoping: the gaps of accepted steps sum to at most the total
        // objective gain
        let gained: f64 = trace.final_objective() - trace.objective_values[0];
        let gaps: f64 = trace.gamma_values[..trace.iterations()].iter().sum();
        assert!(gaps <= gained + 1e-9);
    }

    /// Constant-weight l1 penalty -s*||x||_1.
    struct PlainL1 {
        s: f64,
        n: usize,
    }

    impl SeparablePenalty for PlainL1 {
        fn value(&self, x: &Vector) -> f64 {
            -self.s * x.iter().map(|v| v.abs()).sum::<f64>()
        }
        fn weights(&self, _x: &Vector) -> Weights {
            Weights::uniform(self.n, self.s).unwrap()
        }
    }

    #[test]
    fn composite_run_is_monotone_and_sparse() {
        let m = nalgebra::DMatrix::from_row_slice(
            3,
            3,
            &[4.0, 1.0, 0.2, 1.0, 3.0, 0.1, 0.2, 0.1, 0.5],
        );
        let op = SymmetricOperator::explicit(m).unwrap();
        let obj = Quadratic(&op);
        let penalty = PlainL1 { s: 1.0, n: 3 };
        let x0 = Vector::from_vec(vec![0.5, 0.5, 0.5]);
        let (x, trace) =
            run_composite(&obj, &penalty, &BallWeightedL1Set, x0, &RunConfig::default()).unwrap();
        assert!(trace.is_monotone(1e-12));
        assert!(matches!(
            trace.termination,
            Termination::GammaZero | Termination::ObjStalled
        ));
        // the weak third coordinate is clipped away by the penalty
        assert!(x[2].abs() <= 1e-9, "x = {x:?}");
        assert!(x.norm() <= 1.0 + 1e-12);
        // trace records the composite objective
        let manual = obj.value(&x) - x.iter().map(|v| v.abs()).sum::<f64>();
        assert!((trace.final_objective() - manual).abs() <= 1e-10);
    }

    #[test]
    fn composite_degenerate_penalty_stops_cleanly() {
        // a penalty heavy enough to clip every subgradient entry
        let op = diag(&[0.5, 0.25]);
        let obj = Quadratic(&op);
        let penalty = PlainL1 { s: 50.0, n: 2 };
        let x0 = Vector::from_vec(vec![0.8, 0.1]);
        let (x, trace) =
            run_composite(&obj, &penalty, &BallWeightedL1Set, x0.clone(), &RunConfig::default())
                .unwrap();
        assert_eq!(trace.termination, Termination::DegenerateOracle);
        assert_eq!(x, x0);
        assert_eq!(trace.iterations(), 0);
    }
}
