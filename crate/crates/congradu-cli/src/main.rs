//! Command-line front end: solve one instance, sweep a sparsity path, run
//! seeded benchmark campaigns, query the brute-force reference solvers, or
//! extract several deflated factors. Exit codes: 0 success, 2 bad
//! arguments or parameters, 3 input/parse errors, 4 numerical failures.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use congradu::bench::{run_bench, BenchAlgo, BenchSpec};
use congradu::engine::RunConfig;
use congradu::io::{
    load_matrix, write_report, write_solution, DatasetDescriptor, SolutionRecord, Source,
};
use congradu::linalg::{SymmetricOperator, Vector};
use congradu::reference::{exact_greedy, exhaustive_l0, validate_proposition, OracleBudget};
use congradu::spca::{
    self, Kernel, KernelVariant, Mode, PathAlgo, ProblemSpec, SigmaPolicy, SparseSolution,
};
use congradu::{Error, Result};

#[derive(Parser)]
#[command(
    name = "congradu",
    version,
    about = "Sparse principal-direction solvers built on a conditional-gradient engine"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one sparse-PCA instance with a chosen algorithm.
    Solve(SolveArgs),
    /// Solve across a grid of sparsity targets, optionally warm-started.
    Path(PathArgs),
    /// Run a seeded synthetic benchmark campaign and write a report.
    Bench(BenchArgs),
    /// Brute-force reference solvers and oracle validation.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Extract several factors by repeated solve + projection deflation.
    Deflate(DeflateArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Input matrix file.
    #[arg(long)]
    input: PathBuf,
    /// Input format: mm (Matrix Market) or csv.
    #[arg(long)]
    format: String,
    /// How to read the matrix: data (rows are observations) or cov.
    #[arg(long = "matrix-kind")]
    matrix_kind: String,
    /// Subtract each column mean (data matrices only).
    #[arg(long)]
    mean_center: bool,
    /// Scale each row to unit Euclidean length (data matrices only).
    #[arg(long)]
    row_normalize: bool,
}

impl InputArgs {
    fn load(&self) -> Result<SymmetricOperator> {
        load_matrix(&DatasetDescriptor {
            source: Source::File { path: self.input.clone(), format: self.format.parse()? },
            matrix_kind: self.matrix_kind.parse()?,
            mean_center: self.mean_center,
            row_normalize: self.row_normalize,
        })
    }
}

#[derive(Args)]
struct SolverArgs {
    /// Algorithm: l0c, l1c-dual, l1c-em, l0p-gpower, l0p-approx,
    /// l1p-direct, l1p-gpower, or threshold.
    #[arg(long)]
    algo: String,
    /// Target support size (constrained modes and threshold).
    #[arg(long)]
    k: Option<usize>,
    /// Penalty weight (penalized modes).
    #[arg(long)]
    s: Option<f64>,
    /// Smoothing kernel for l0p-approx: a (arctangent), b (logarithmic),
    /// c (rational), d (exponential).
    #[arg(long)]
    kernel: Option<String>,
    /// Kernel scale; smaller tracks the support count more closely.
    #[arg(long)]
    p: Option<f64>,
    /// Diagonal shift policy: zero, auto, or an explicit number.
    #[arg(long, default_value = "zero")]
    sigma: String,
    /// Stall and stationarity-gap tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration budget.
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// Seed for a randomized starting point (default: deterministic start).
    #[arg(long)]
    seed: Option<u64>,
}

impl SolverArgs {
    fn config(&self) -> RunConfig {
        let mut cfg = RunConfig { max_iter: self.max_iter, ..RunConfig::default() };
        if let Some(tol) = self.tol {
            cfg.tol_obj = tol;
            cfg.tol_gamma = tol;
        }
        cfg
    }

    fn mode(&self) -> Result<Mode> {
        let k = || {
            self.k.ok_or_else(|| {
                Error::InvalidParameter(format!("--algo {} needs --k", self.algo))
            })
        };
        let s = || {
            self.s.ok_or_else(|| {
                Error::InvalidParameter(format!("--algo {} needs --s", self.algo))
            })
        };
        let takes_k = matches!(self.algo.as_str(), "l0c" | "l1c-dual" | "l1c-em" | "threshold");
        if takes_k && self.s.is_some() {
            return Err(Error::InvalidParameter(format!(
                "--s does not apply to --algo {}",
                self.algo
            )));
        }
        if !takes_k && self.k.is_some() {
            return Err(Error::InvalidParameter(format!(
                "--k does not apply to --algo {}",
                self.algo
            )));
        }
        Ok(match self.algo.as_str() {
            "l0c" => Mode::L0Constrained { k: k()? },
            "l1c-dual" => Mode::L1ConstrainedDual { k: k()? },
            "l1c-em" => Mode::L1ConstrainedEm { k: k()? },
            "threshold" => Mode::Threshold { k: k()? },
            "l0p-gpower" => Mode::L0PenalizedGpower { s: s()? },
            "l0p-approx" => {
                Mode::ApproxL0Penalized { s: s()?, kernel: self.kernel_choice()? }
            }
            "l1p-direct" => Mode::L1PenalizedDirect { s: s()? },
            "l1p-gpower" => Mode::L1PenalizedGpower { s: s()? },
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown algorithm '{other}' for solve (see --help)"
                )))
            }
        })
    }

    fn kernel_choice(&self) -> Result<Kernel> {
        let variant = match self.kernel.as_deref().unwrap_or("a") {
            "a" => KernelVariant::Atan,
            "b" => KernelVariant::Log,
            "c" => KernelVariant::Ratio,
            "d" => KernelVariant::Exp,
            other => other.parse()?,
        };
        Kernel::new(variant, self.p.unwrap_or(0.1))
    }

    fn sigma_policy(&self) -> Result<SigmaPolicy> {
        match self.sigma.as_str() {
            "zero" => Ok(SigmaPolicy::Zero),
            "auto" => Ok(SigmaPolicy::Auto),
            other => other
                .parse::<f64>()
                .map(SigmaPolicy::Explicit)
                .map_err(|_| {
                    Error::InvalidParameter(format!(
                        "--sigma takes zero, auto, or a number, got '{other}'"
                    ))
                }),
        }
    }

    /// Seeded random direction in the solver's own space: constrained modes
    /// need a sparsity-feasible start, and gpower modes iterate in the
    /// sample space, so the x-space direction maps through the data factor.
    fn start(&self, op: &SymmetricOperator) -> Result<Option<Vector>> {
        let Some(seed) = self.seed else { return Ok(None) };
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vector::from_fn(op.dim(), |_, _| rng.random_range(-1.0..1.0));
        if let ("l0c" | "l1c-dual", Some(k)) = (self.algo.as_str(), self.k) {
            x = congradu::linalg::hard_threshold(&x, k)?;
        }
        let x = &x / x.norm();
        let sample_space = matches!(self.algo.as_str(), "l0p-gpower" | "l1p-gpower");
        if !sample_space {
            return Ok(Some(x));
        }
        let b = op.factored_data().ok_or_else(|| {
            Error::NotFactored("sample-space solvers need a data (factored) input".into())
        })?;
        let z = &b * &x;
        let norm = z.norm();
        if norm == 0.0 {
            return Ok(None);
        }
        Ok(Some(z / norm))
    }

    fn parameters(&self) -> BTreeMap<String, serde_json::Value> {
        let mut map = BTreeMap::new();
        if let Some(k) = self.k {
            map.insert("k".to_string(), serde_json::json!(k));
        }
        if let Some(s) = self.s {
            map.insert("s".to_string(), serde_json::json!(s));
        }
        if self.algo == "l0p-approx" {
            map.insert(
                "kernel".to_string(),
                serde_json::json!(self.kernel.clone().unwrap_or_else(|| "a".to_string())),
            );
            map.insert("p".to_string(), serde_json::json!(self.p.unwrap_or(0.1)));
        }
        map.insert("sigma".to_string(), serde_json::json!(self.sigma));
        map
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    input: InputArgs,
    /// Include the full iteration trace in the output record.
    #[arg(long)]
    trace: bool,
    /// Output JSON file.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct PathArgs {
    /// Algorithm: l0c, l1c-dual, l1c-em, or threshold.
    #[arg(long)]
    algo: String,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    k_min: usize,
    #[arg(long)]
    k_max: usize,
    #[arg(long, default_value_t = 1)]
    k_step: usize,
    /// Start each solve from the thresholded previous solution.
    #[arg(long)]
    warm_start: bool,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// Output JSON file (an array, one record per k).
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    sims: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sparsity grid: "2..9", "5..100..5", or "2,4,8".
    #[arg(long = "k-grid")]
    k_grid: String,
    /// Comma-separated algorithm list (see solve --help for names, plus
    /// exhaustive and greedy).
    #[arg(long)]
    algos: String,
    /// Run simulations sequentially; fixed seeds then reproduce the report
    /// byte for byte.
    #[arg(long)]
    sequential: bool,
    /// Primary CSV output; a .meta.json and a .timing.csv sidecar are
    /// written next to it.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Global optimum by support enumeration (small n only).
    Exhaustive {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        k: usize,
        /// Dimension cap for the enumeration.
        #[arg(long, default_value_t = 16)]
        max_dim: usize,
        /// Output JSON file; prints to stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Forward-greedy path of supports 1..=k-max.
    Greedy {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        k_max: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check one closed-form oracle against brute force on random instances.
    Validate {
        /// One of: sphere_l0, sq_l0_pen, weighted_l1_pen, l2_l1, nonneg_l0,
        /// ellipsoid_l0.
        #[arg(long)]
        prop: String,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 8)]
        dim_cap: usize,
    },
}

#[derive(Args)]
struct DeflateArgs {
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    input: InputArgs,
    /// Number of factors to extract.
    #[arg(long)]
    factors: usize,
    /// Output JSON file (an array, one record per factor).
    #[arg(long)]
    output: PathBuf,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::Path(args) => cmd_path(args),
        Cmd::Bench(args) => cmd_bench(args),
        Cmd::Oracle(cmd) => cmd_oracle(cmd),
        Cmd::Deflate(args) => cmd_deflate(args),
    }
}

/// Variance ratio against the dense principal direction of the unshifted
/// operator; left unset when the reference direction is degenerate.
fn attach_variance_ratio(op: &SymmetricOperator, solution: &mut SparseSolution, cfg: &RunConfig) {
    let base = op.unshifted();
    if let Ok(dense) = spca::power_method(&base, None, cfg) {
        if let Ok(ratio) = spca::explained_variance_ratio(op, &solution.vector, &dense.vector) {
            solution.variance_ratio = Some(ratio);
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let op = args.input.load()?;
    let problem = ProblemSpec {
        mode: args.solver.mode()?,
        sigma_policy: args.solver.sigma_policy()?,
        config: args.solver.config(),
    };
    let start = args.solver.start(&op)?;

    let started = Instant::now();
    let mut solution = problem.solve(&op, start.as_ref())?;
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    attach_variance_ratio(&op, &mut solution, &problem.config);

    let record = SolutionRecord::from_solution(
        &args.solver.algo,
        args.solver.parameters(),
        &solution,
        elapsed_ms,
        args.trace,
    );
    write_solution(&args.output, &record)?;
    println!(
        "{}: objective {:.6e}, {} nonzeros, {} iterations, stopped by {}",
        args.solver.algo,
        solution.objective,
        solution.support.len(),
        solution.trace.iterations(),
        solution.trace.termination
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_path(args: PathArgs) -> Result<ExitCode> {
    let algo = match args.algo.as_str() {
        "l0c" => PathAlgo::L0Constrained,
        "l1c-dual" => PathAlgo::L1ConstrainedDual,
        "l1c-em" => PathAlgo::L1ConstrainedEm,
        "threshold" => PathAlgo::Threshold,
        other => {
            return Err(Error::InvalidParameter(format!(
                "path supports l0c, l1c-dual, l1c-em, threshold; got '{other}'"
            )))
        }
    };
    if args.k_step == 0 || args.k_min == 0 || args.k_max < args.k_min {
        return Err(Error::InvalidParameter(
            "the grid needs 1 <= k-min <= k-max and a positive k-step".into(),
        ));
    }
    let grid: Vec<usize> = (args.k_min..=args.k_max).step_by(args.k_step).collect();

    let mut cfg = RunConfig { max_iter: args.max_iter, ..RunConfig::default() };
    if let Some(tol) = args.tol {
        cfg.tol_obj = tol;
        cfg.tol_gamma = tol;
    }

    let op = args.input.load()?;
    let started = Instant::now();
    let mut solutions = spca::sparsity_path(&op, &grid, algo, args.warm_start, &cfg)?;
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;

    let base = op.unshifted();
    let dense = spca::power_method(&base, None, &cfg).ok();
    let mut records = Vec::with_capacity(solutions.len());
    for (k, solution) in grid.iter().zip(solutions.iter_mut()) {
        if let Some(dense) = &dense {
            if let Ok(r) = spca::explained_variance_ratio(&op, &solution.vector, &dense.vector) {
                solution.variance_ratio = Some(r);
            }
        }
        let mut params = BTreeMap::new();
        params.insert("k".to_string(), serde_json::json!(k));
        params.insert("warm_start".to_string(), serde_json::json!(args.warm_start));
        records.push(SolutionRecord::from_solution(
            &args.algo,
            params,
            solution,
            elapsed_ms / grid.len() as f64,
            false,
        ));
    }
    let mut text = serde_json::to_string_pretty(&records)?;
    text.push('\n');
    std::fs::write(&args.output, text)?;
    println!("{} solutions written to {}", records.len(), args.output.display());
    Ok(ExitCode::SUCCESS)
}

/// "A..B" (step 1), "A..B..S", or a comma list.
fn parse_k_grid(text: &str) -> Result<Vec<usize>> {
    let bad = |msg: String| Error::InvalidParameter(msg);
    let grid: Vec<usize> = if text.contains("..") {
        let parts: Vec<&str> = text.split("..").collect();
        let parse = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| bad(format!("cannot read '{t}' in the grid '{text}'")))
        };
        match parts.as_slice() {
            [a, b] => (parse(a)?..=parse(b)?).collect(),
            [a, b, s] => {
                let step = parse(s)?;
                if step == 0 {
                    return Err(bad("grid step must be positive".into()));
                }
                (parse(a)?..=parse(b)?).step_by(step).collect()
            }
            _ => return Err(bad(format!("grid '{text}' must be A..B or A..B..S"))),
        }
    } else {
        text.split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| bad(format!("cannot read '{t}' in the grid '{text}'")))
            })
            .collect::<Result<_>>()?
    };
    if grid.is_empty() {
        return Err(bad(format!("grid '{text}' is empty")));
    }
    Ok(grid)
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    let algos: Vec<BenchAlgo> = args
        .algos
        .split(',')
        .map(|t| t.trim().parse())
        .collect::<Result<_>>()?;
    let mut spec = BenchSpec::new(args.m, args.n, args.sims, args.seed, parse_k_grid(&args.k_grid)?, algos)?;
    spec.sequential = args.sequential;

    let report = run_bench(&spec)?;
    write_report(&args.output, &report)?;
    for cell in &report.cells {
        println!(
            "{} k={}: mean ratio {:.4} (std {:.4}), failures {}",
            cell.algorithm, cell.k, cell.mean_variance_ratio, cell.std_variance_ratio, cell.failures
        );
    }
    println!("report written to {}", args.output.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(cmd: OracleCmd) -> Result<ExitCode> {
    match cmd {
        OracleCmd::Exhaustive { input, k, max_dim, output } => {
            let op = input.load()?;
            let budget = OracleBudget { max_dimension: max_dim, ..OracleBudget::default() };
            let started = Instant::now();
            let solution = exhaustive_l0(&op, k, &budget)?;
            let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
            let mut params = BTreeMap::new();
            params.insert("k".to_string(), serde_json::json!(k));
            let record =
                SolutionRecord::from_solution("exhaustive", params, &solution, elapsed_ms, false);
            match output {
                Some(path) => write_solution(&path, &record)?,
                None => println!("{}", serde_json::to_string_pretty(&record)?),
            }
            Ok(ExitCode::SUCCESS)
        }
        OracleCmd::Greedy { input, k_max, output } => {
            let op = input.load()?;
            let started = Instant::now();
            let path = exact_greedy(&op, k_max)?;
            let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
            let records: Vec<SolutionRecord> = path
                .iter()
                .enumerate()
                .map(|(i, solution)| {
                    let mut params = BTreeMap::new();
                    params.insert("k".to_string(), serde_json::json!(i + 1));
                    SolutionRecord::from_solution(
                        "greedy",
                        params,
                        solution,
                        elapsed_ms / k_max as f64,
                        false,
                    )
                })
                .collect();
            let text = serde_json::to_string_pretty(&records)?;
            match output {
                Some(path) => std::fs::write(&path, text + "\n")?,
                None => println!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        OracleCmd::Validate { prop, trials, dim_cap } => {
            let report = validate_proposition(&prop, trials, dim_cap)?;
            println!("{report}");
            if report.pass {
                Ok(ExitCode::SUCCESS)
            } else {
                // a failed validation is a numerical failure, not a usage error
                Ok(ExitCode::from(4))
            }
        }
    }
}

fn cmd_deflate(args: DeflateArgs) -> Result<ExitCode> {
    if args.factors == 0 {
        return Err(Error::InvalidParameter("--factors must be positive".into()));
    }
    let mut op = args.input.load()?;
    if args.factors > op.dim() {
        return Err(Error::InvalidParameter(format!(
            "cannot extract {} factors from dimension {}",
            args.factors,
            op.dim()
        )));
    }
    let problem = ProblemSpec {
        mode: args.solver.mode()?,
        sigma_policy: args.solver.sigma_policy()?,
        config: args.solver.config(),
    };

    let mut records = Vec::with_capacity(args.factors);
    for factor in 0..args.factors {
        let start = args.solver.start(&op)?;
        let started = Instant::now();
        let mut solution = problem.solve(&op, start.as_ref())?;
        let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
        attach_variance_ratio(&op, &mut solution, &problem.config);

        let mut params = args.solver.parameters();
        params.insert("factor".to_string(), serde_json::json!(factor));
        records.push(SolutionRecord::from_solution(
            &args.solver.algo,
            params,
            &solution,
            elapsed_ms,
            false,
        ));
        if factor + 1 < args.factors {
            op = spca::deflate(&op, &solution.vector)?;
        }
    }
    let mut text = serde_json::to_string_pretty(&records)?;
    text.push('\n');
    std::fs::write(&args.output, text)?;
    println!("{} factors written to {}", records.len(), args.output.display());
    Ok(ExitCode::SUCCESS)
}
