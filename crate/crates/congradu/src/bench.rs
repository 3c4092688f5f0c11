//! Reproducible benchmark harness: seeded synthetic instances, a grid of
//! sparsity targets, several algorithms per cell, deterministic aggregation.
//! Wall-clock numbers are kept apart from the statistics so that fixed-seed
//! runs serialize identically.

use std::time::Instant;

use rayon::prelude::*;

use crate::engine::RunConfig;
use crate::error::{Error, Result};
use crate::linalg::{SymmetricOperator, Vector};
use crate::reference::{self, OracleBudget};
use crate::spca::{self, Kernel, KernelVariant, SparseSolution};
use crate::synth;

/// Algorithms the harness knows how to run on one (instance, k) cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchAlgo {
    L0Constrained,
    L1ConstrainedDual,
    L1ConstrainedEm,
    L0PenalizedGpower,
    L0PenalizedApprox,
    L1PenalizedDirect,
    L1PenalizedGpower,
    Threshold,
    Exhaustive,
    Greedy,
}

impl BenchAlgo {
    pub fn name(self) -> &'static str {
        match self {
            BenchAlgo::L0Constrained => "l0c",
            BenchAlgo::L1ConstrainedDual => "l1c-dual",
            BenchAlgo::L1ConstrainedEm => "l1c-em",
            BenchAlgo::L0PenalizedGpower => "l0p-gpower",
            BenchAlgo::L0PenalizedApprox => "l0p-approx",
            BenchAlgo::L1PenalizedDirect => "l1p-direct",
            BenchAlgo::L1PenalizedGpower => "l1p-gpower",
            BenchAlgo::Threshold => "threshold",
            BenchAlgo::Exhaustive => "exhaustive",
            BenchAlgo::Greedy => "greedy",
        }
    }

    /// Penalized modes take a penalty weight s instead of k and need the
    /// sparsity tuner to hit a target support size.
    pub fn is_penalized(self) -> bool {
        matches!(
            self,
            BenchAlgo::L0PenalizedGpower
                | BenchAlgo::L0PenalizedApprox
                | BenchAlgo::L1PenalizedDirect
                | BenchAlgo::L1PenalizedGpower
        )
    }

    pub const ALL: [BenchAlgo; 10] = [
        BenchAlgo::L0Constrained,
        BenchAlgo::L1ConstrainedDual,
        BenchAlgo::L1ConstrainedEm,
        BenchAlgo::L0PenalizedGpower,
        BenchAlgo::L0PenalizedApprox,
        BenchAlgo::L1PenalizedDirect,
        BenchAlgo::L1PenalizedGpower,
        BenchAlgo::Threshold,
        BenchAlgo::Exhaustive,
        BenchAlgo::Greedy,
    ];
}

impl std::fmt::Display for BenchAlgo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BenchAlgo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BenchAlgo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = BenchAlgo::ALL.iter().map(|a| a.name()).collect();
                Error::InvalidParameter(format!(
                    "unknown algorithm '{s}' (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

/// One benchmark campaign: sizes, seed, sparsity grid, algorithm list.
#[derive(Clone, Debug)]
pub struct BenchSpec {
    pub m: usize,
    pub n: usize,
    pub simulations: usize,
    pub seed: u64,
    pub k_grid: Vec<usize>,
    pub algos: Vec<BenchAlgo>,
    /// Run simulations one after another on the current thread; required for
    /// byte-identical timing-free reports and useful under profilers.
    pub sequential: bool,
    pub config: RunConfig,
    /// Kernel for the smoothed-penalty mode; ignored by the others.
    pub kernel: Kernel,
}

impl BenchSpec {
    pub fn new(
        m: usize,
        n: usize,
        simulations: usize,
        seed: u64,
        k_grid: Vec<usize>,
        algos: Vec<BenchAlgo>,
    ) -> Result<Self> {
        let spec = BenchSpec {
            m,
            n,
            simulations,
            seed,
            k_grid,
            algos,
            sequential: false,
            config: RunConfig::default(),
            kernel: Kernel::new(KernelVariant::Atan, 0.01)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 || self.simulations == 0 {
            return Err(Error::InvalidParameter(format!(
                "sizes and simulation count must be positive, got m={} n={} sims={}",
                self.m, self.n, self.simulations
            )));
        }
        if self.k_grid.is_empty() || self.algos.is_empty() {
            return Err(Error::InvalidParameter(
                "the sparsity grid and the algorithm list must be nonempty".into(),
            ));
        }
        if self.k_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "the sparsity grid must be strictly ascending".into(),
            ));
        }
        if self.k_grid[0] < 1 || *self.k_grid.last().unwrap() > self.n {
            return Err(Error::InvalidParameter(format!(
                "sparsity grid must stay within [1, {}]",
                self.n
            )));
        }
        Ok(())
    }
}

/// Aggregated statistics for one (algorithm, k) grid cell. Averages are over
/// the simulations that succeeded; `failures` counts the rest.
#[derive(Clone, Debug, serde::Serialize)]
pub struct CellStats {
    pub algorithm: String,
    pub k: usize,
    pub simulations: usize,
    pub failures: usize,
    pub tuning_misses: usize,
    pub mean_variance_ratio: f64,
    pub std_variance_ratio: f64,
    pub mean_iterations: f64,
    /// Mean over simulations of the time to produce the path up to this k
    /// (cumulative along the grid, excluding parameter tuning).
    pub mean_cumulative_seconds: f64,
}

/// Complete campaign output; `cells` covers the full algorithm x k grid in
/// declaration order.
#[derive(Clone, Debug, serde::Serialize)]
pub struct BenchReport {
    pub m: usize,
    pub n: usize,
    pub simulations: usize,
    pub seed: u64,
    pub version: String,
    pub sequential: bool,
    pub k_grid: Vec<usize>,
    pub algorithms: Vec<String>,
    /// Mean time to compute the dense principal eigenvector, reported once
    /// per simulation and kept out of the per-algorithm columns.
    pub svd_seconds_mean: f64,
    pub cells: Vec<CellStats>,
}

#[derive(Clone, Debug)]
struct CellOutcome {
    variance_ratio: f64,
    iterations: usize,
    seconds: f64,
    tuning_miss: bool,
    failed: Option<String>,
}

struct SimResult {
    svd_seconds: f64,
    /// outcomes[algo_index][k_index]
    outcomes: Vec<Vec<CellOutcome>>,
}

/// Run the campaign: per simulation draw a fresh seeded instance, compute
/// the dense principal eigenvector once, run every algorithm over the grid,
/// renormalize each support, then aggregate in fixed grid order.
pub fn run_bench(spec: &BenchSpec) -> Result<BenchReport> {
    spec.validate()?;
    let sims: Vec<SimResult> = if spec.sequential {
        (0..spec.simulations)
            .map(|i| run_simulation(spec, i))
            .collect::<Result<Vec<_>>>()?
    } else {
        (0..spec.simulations)
            .into_par_iter()
            .map(|i| run_simulation(spec, i))
            .collect::<Result<Vec<_>>>()?
    };
    Ok(aggregate(spec, &sims))
}

fn run_simulation(spec: &BenchSpec, index: usize) -> Result<SimResult> {
    let seed = synth::derive_seed(spec.seed, index as u64);
    let data = synth::synth_gaussian(spec.m, spec.n, seed)?;
    let op = SymmetricOperator::gram(data)?;

    let svd_started = Instant::now();
    let dense = spca::power_method(&op, None, &spec.config)?;
    let svd_seconds = svd_started.elapsed().as_secs_f64();
    let v = dense.vector;

    let mut outcomes = Vec::with_capacity(spec.algos.len());
    for &algo in &spec.algos {
        let mut row = Vec::with_capacity(spec.k_grid.len());
        for &k in &spec.k_grid {
            row.push(run_cell(&op, &v, algo, k, spec));
        }
        outcomes.push(row);
    }
    Ok(SimResult { svd_seconds, outcomes })
}

fn run_cell(op: &SymmetricOperator, v: &Vector, algo: BenchAlgo, k: usize, spec: &BenchSpec) -> CellOutcome {
    let failure = |msg: String| CellOutcome {
        variance_ratio: 0.0,
        iterations: 0,
        seconds: 0.0,
        tuning_miss: false,
        failed: Some(msg),
    };

    // parameter tuning happens outside the timed section
    let tuned = if algo.is_penalized() {
        match tune_penalty(op, algo, k, spec) {
            Ok(t) => Some(t),
            Err(e) => return failure(format!("tuning failed: {e}")),
        }
    } else {
        None
    };

    let started = Instant::now();
    let solved: Result<SparseSolution> = match algo {
        BenchAlgo::L0Constrained => spca::solve_l0_constrained(op, k, None, &spec.config),
        BenchAlgo::L1ConstrainedDual => spca::solve_l1_constrained_dual(op, k, None, &spec.config),
        BenchAlgo::L1ConstrainedEm => spca::solve_l1_constrained_em(op, k, None, &spec.config),
        BenchAlgo::Threshold => spca::threshold_baseline(op, k, &spec.config),
        BenchAlgo::Exhaustive => reference::exhaustive_l0(op, k, &OracleBudget::default()),
        BenchAlgo::Greedy => reference::exact_greedy(op, k)
            .map(|mut path| path.pop().expect("path has k entries")),
        BenchAlgo::L0PenalizedGpower => {
            spca::solve_l0_penalized_gpower(op, tuned.unwrap().0, None, &spec.config)
        }
        BenchAlgo::L0PenalizedApprox => {
            spca::solve_l0_penalized_approx(op, tuned.unwrap().0, &spec.kernel, None, &spec.config)
        }
        BenchAlgo::L1PenalizedDirect => {
            spca::solve_l1_penalized_direct(op, tuned.unwrap().0, None, &spec.config)
        }
        BenchAlgo::L1PenalizedGpower => {
            spca::solve_l1_penalized_gpower(op, tuned.unwrap().0, None, &spec.config)
        }
    };
    let solution = match solved {
        Ok(s) => s,
        Err(e) => return failure(e.to_string()),
    };
    if solution.support.is_empty() {
        return failure("solver returned an empty support".into());
    }
    let polished = match spca::postprocess_subspace(op, &solution.support) {
        Ok(p) => p,
        Err(e) => return failure(format!("postprocessing failed: {e}")),
    };
    let seconds = started.elapsed().as_secs_f64();

    let ratio = match spca::explained_variance_ratio(op, &polished.vector, v) {
        Ok(r) => r,
        Err(e) => return failure(e.to_string()),
    };
    CellOutcome {
        variance_ratio: ratio,
        iterations: solution.trace.iterations(),
        seconds,
        tuning_miss: tuned.map(|t| t.1).unwrap_or(false),
        failed: None,
    }
}

/// Bisection on the penalty weight s to land on a target support size.
/// Support size is nonincreasing in s, so each probe halves the bracket.
/// Returns (s, miss): miss is set when no probed s achieved exactly k, in
/// which case s is the probe with the nearest achievable size (ties resolve
/// to the sparser side).
fn tune_penalty(
    op: &SymmetricOperator,
    algo: BenchAlgo,
    k: usize,
    spec: &BenchSpec,
) -> Result<(f64, bool)> {
    let bound = match algo {
        BenchAlgo::L0PenalizedGpower | BenchAlgo::L0PenalizedApprox => op.max_entry(),
        _ => op.frobenius_norm(),
    };
    if !(bound > 0.0) {
        return Err(Error::InvalidParameter(
            "penalty bound is zero: the operator has no signal to penalize".into(),
        ));
    }

    let probe = |s: f64| -> Option<usize> {
        let solved = match algo {
            BenchAlgo::L0PenalizedGpower => spca::solve_l0_penalized_gpower(op, s, None, &spec.config),
            BenchAlgo::L0PenalizedApprox => {
                spca::solve_l0_penalized_approx(op, s, &spec.kernel, None, &spec.config)
            }
            BenchAlgo::L1PenalizedDirect => spca::solve_l1_penalized_direct(op, s, None, &spec.config),
            BenchAlgo::L1PenalizedGpower => spca::solve_l1_penalized_gpower(op, s, None, &spec.config),
            _ => unreachable!("only penalized modes are tuned"),
        };
        solved.ok().map(|sol| sol.support.len())
    };

    let mut lo = 0.0_f64;
    let mut hi = bound;
    // nearest-below and nearest-above candidates: (distance to k, nnz, s)
    let mut best_le: Option<(usize, usize, f64)> = None;
    let mut best_ge: Option<(usize, usize, f64)> = None;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        let nnz = probe(mid).unwrap_or(0);
        if nnz == k {
            return Ok((mid, false));
        }
        if nnz < k {
            // too sparse: shrink the penalty; prefer the smallest such s
            let cand = (k - nnz, nnz, mid);
            if best_le.map(|b| cand.0 < b.0 || (cand.0 == b.0 && mid < b.2)).unwrap_or(true) {
                best_le = Some(cand);
            }
            hi = mid;
        } else {
            // too dense: grow the penalty; prefer the largest such s
            let cand = (nnz - k, nnz, mid);
            if best_ge.map(|b| cand.0 < b.0 || (cand.0 == b.0 && mid > b.2)).unwrap_or(true) {
                best_ge = Some(cand);
            }
            lo = mid;
        }
    }
    let chosen = match (best_le, best_ge) {
        (Some(le), Some(ge)) => {
            if le.0 <= ge.0 {
                le.2
            } else {
                ge.2
            }
        }
        (Some(le), None) => le.2,
        (None, Some(ge)) => ge.2,
        (None, None) => {
            return Err(Error::InvalidParameter(format!(
                "no penalty weight in (0, {bound:.6e}) produced a usable solution"
            )));
        }
    };
    Ok((chosen, true))
}

fn aggregate(spec: &BenchSpec, sims: &[SimResult]) -> BenchReport {
    let svd_seconds_mean =
        sims.iter().map(|s| s.svd_seconds).sum::<f64>() / sims.len() as f64;

    let mut cells = Vec::with_capacity(spec.algos.len() * spec.k_grid.len());
    for (ai, &algo) in spec.algos.iter().enumerate() {
        // cumulative seconds per simulation along the grid
        let mut cumulative = vec![0.0_f64; sims.len()];
        for (ki, &k) in spec.k_grid.iter().enumerate() {
            let mut ratios = Vec::with_capacity(sims.len());
            let mut iterations = 0usize;
            let mut failures = 0usize;
            let mut misses = 0usize;
            for (si, sim) in sims.iter().enumerate() {
                let cell = &sim.outcomes[ai][ki];
                cumulative[si] += cell.seconds;
                if cell.failed.is_some() {
                    failures += 1;
                    continue;
                }
                ratios.push(cell.variance_ratio);
                iterations += cell.iterations;
                if cell.tuning_miss {
                    misses += 1;
                }
            }
            let count = ratios.len();
            let mean = if count > 0 {
                ratios.iter().sum::<f64>() / count as f64
            } else {
                0.0
            };
            let std = if count > 1 {
                (ratios.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>()
                    / (count - 1) as f64)
                    .sqrt()
            } else {
                0.0
            };
            cells.push(CellStats {
                algorithm: algo.name().to_string(),
                k,
                simulations: sims.len(),
                failures,
                tuning_misses: misses,
                mean_variance_ratio: mean,
                std_variance_ratio: std,
                mean_iterations: if count > 0 { iterations as f64 / count as f64 } else { 0.0 },
                mean_cumulative_seconds: cumulative.iter().sum::<f64>() / sims.len() as f64,
            });
        }
    }

    BenchReport {
        m: spec.m,
        n: spec.n,
        simulations: spec.simulations,
        seed: spec.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        sequential: spec.sequential,
        k_grid: spec.k_grid.clone(),
        algorithms: spec.algos.iter().map(|a| a.name().to_string()).collect(),
        svd_seconds_mean,
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec(algos: Vec<BenchAlgo>, k_grid: Vec<usize>, sims: usize) -> BenchSpec {
        BenchSpec::new(6, 10, sims, 77, k_grid, algos).unwrap()
    }

    #[test]
    fn algo_names_round_trip() {
        for algo in BenchAlgo::ALL {
            assert_eq!(algo.name().parse::<BenchAlgo>().unwrap(), algo);
        }
        assert!("pca".parse::<BenchAlgo>().is_err());
    }

    #[test]
    fn spec_validation_rejects_bad_grids() {
        assert!(BenchSpec::new(6, 10, 1, 0, vec![], vec![BenchAlgo::L0Constrained]).is_err());
        assert!(BenchSpec::new(6, 10, 1, 0, vec![3, 3], vec![BenchAlgo::L0Constrained]).is_err());
        assert!(BenchSpec::new(6, 10, 1, 0, vec![2, 11], vec![BenchAlgo::L0Constrained]).is_err());
        assert!(BenchSpec::new(6, 10, 0, 0, vec![2], vec![BenchAlgo::L0Constrained]).is_err());
        assert!(BenchSpec::new(6, 10, 1, 0, vec![2], vec![]).is_err());
    }

    #[test]
    fn smoke_run_covers_the_grid_and_orders_methods() {
        let spec = small_spec(
            vec![BenchAlgo::L0Constrained, BenchAlgo::Threshold, BenchAlgo::Exhaustive],
            vec![2, 4],
            5,
        );
        let report = run_bench(&spec).unwrap();
        assert_eq!(report.cells.len(), 6);
        for cell in &report.cells {
            assert_eq!(cell.failures, 0, "{}: {:?}", cell.algorithm, cell);
            assert!(cell.mean_variance_ratio > 0.0 && cell.mean_variance_ratio <= 1.0 + 1e-9);
        }
        // exhaustive dominates, thresholding trails it
        for ki in 0..2 {
            let l0c = &report.cells[ki];
            let exhaustive = &report.cells[4 + ki];
            assert!(l0c.mean_variance_ratio <= exhaustive.mean_variance_ratio + 1e-9);
        }
        // cumulative seconds never decrease along the grid
        assert!(report.cells[0].mean_cumulative_seconds <= report.cells[1].mean_cumulative_seconds);
        assert!(report.svd_seconds_mean > 0.0);
    }

    #[test]
    fn sequential_and_parallel_statistics_agree() {
        let mut spec = small_spec(vec![BenchAlgo::L0Constrained], vec![2, 3], 4);
        let seq_report = {
            spec.sequential = true;
            run_bench(&spec).unwrap()
        };
        spec.sequential = false;
        let par_report = run_bench(&spec).unwrap();
        for (a, b) in seq_report.cells.iter().zip(par_report.cells.iter()) {
            assert_eq!(a.mean_variance_ratio.to_bits(), b.mean_variance_ratio.to_bits());
            assert_eq!(a.std_variance_ratio.to_bits(), b.std_variance_ratio.to_bits());
            assert_eq!(a.mean_iterations.to_bits(), b.mean_iterations.to_bits());
        }
    }

    #[test]
    fn penalized_modes_hit_the_sparsity_target_or_flag_a_miss() {
        for algo in [
            BenchAlgo::L0PenalizedGpower,
            BenchAlgo::L0PenalizedApprox,
            BenchAlgo::L1PenalizedDirect,
            BenchAlgo::L1PenalizedGpower,
        ] {
            let spec = small_spec(vec![algo], vec![3], 3);
            let report = run_bench(&spec).unwrap();
            let cell = &report.cells[0];
            assert_eq!(cell.failures, 0, "{}", cell.algorithm);
            assert!(
                cell.tuning_misses <= cell.simulations,
                "{}: misses {} of {}",
                cell.algorithm,
                cell.tuning_misses,
                cell.simulations
            );
            assert!(cell.mean_variance_ratio > 0.3, "{}: {}", cell.algorithm, cell.mean_variance_ratio);
        }
    }

    #[test]
    fn tuner_lands_on_exact_support_sizes_for_gpower() {
        let data = synth::synth_gaussian(6, 10, 5).unwrap();
        let op = SymmetricOperator::gram(data).unwrap();
        let spec = small_spec(vec![BenchAlgo::L0PenalizedGpower], vec![3], 1);
        let (s, miss) = tune_penalty(&op, BenchAlgo::L0PenalizedGpower, 3, &spec).unwrap();
        let sol = spca::solve_l0_penalized_gpower(&op, s, None, &spec.config).unwrap();
        if !miss {
            assert_eq!(sol.support.len(), 3);
        } else {
            assert_ne!(sol.support.len(), 3);
        }
    }
}
