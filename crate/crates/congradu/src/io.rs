//! Matrix ingestion (Matrix Market and CSV), dataset descriptors, and
//! serialization of solutions and benchmark reports. Parse errors always
//! carry a 1-based line number. Serialized supports use 0-based indices;
//! every writer states that in its header comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bench::BenchReport;
use crate::engine::RunTrace;
use crate::error::{Error, Result};
use crate::linalg::{mean_center, row_normalize, Matrix, RowNorm, SymmetricOperator};
use crate::spca::SparseSolution;
use crate::synth::synth_gaussian;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    /// Rows are observations; the operator is the Gram matrix of the columns.
    Data,
    /// The file already holds the symmetric matrix itself.
    Covariance,
}

impl std::str::FromStr for MatrixKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "data" => Ok(MatrixKind::Data),
            "cov" => Ok(MatrixKind::Covariance),
            other => Err(Error::InvalidParameter(format!(
                "unknown matrix kind '{other}' (expected data or cov)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FileFormat {
    MatrixMarket,
    Csv,
}

impl std::str::FromStr for FileFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mm" => Ok(FileFormat::MatrixMarket),
            "csv" => Ok(FileFormat::Csv),
            other => Err(Error::InvalidParameter(format!(
                "unknown format '{other}' (expected mm or csv)"
            ))),
        }
    }
}

/// Where the matrix comes from; the enum makes "exactly one source" hold by
/// construction.
#[derive(Clone, Debug)]
pub enum Source {
    File { path: PathBuf, format: FileFormat },
    Synthetic { m: usize, n: usize, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct DatasetDescriptor {
    pub source: Source,
    pub matrix_kind: MatrixKind,
    pub mean_center: bool,
    pub row_normalize: bool,
}

/// Load, preprocess, and wrap the matrix as a symmetric operator. Data
/// matrices become factored Gram operators (centering and row normalization
/// apply here); covariance inputs are validated symmetric and kept explicit.
pub fn load_matrix(descriptor: &DatasetDescriptor) -> Result<SymmetricOperator> {
    let raw = match &descriptor.source {
        Source::File { path, format } => match format {
            FileFormat::MatrixMarket => read_matrix_market(path)?,
            FileFormat::Csv => read_csv_matrix(path)?,
        },
        Source::Synthetic { m, n, seed } => synth_gaussian(*m, *n, *seed)?,
    };
    match descriptor.matrix_kind {
        MatrixKind::Data => {
            let mut b = raw;
            if descriptor.mean_center {
                b = mean_center(&b);
            }
            if descriptor.row_normalize {
                b = row_normalize(&b, RowNorm::L2);
            }
            SymmetricOperator::gram(b)
        }
        MatrixKind::Covariance => {
            if descriptor.mean_center || descriptor.row_normalize {
                return Err(Error::InvalidParameter(
                    "mean-center and row-normalize apply to data matrices only".into(),
                ));
            }
            SymmetricOperator::explicit(raw)
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_count(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("cannot read {what} from '{tok}'")))
}

fn parse_value(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("cannot read a real value from '{tok}'")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value '{tok}'")));
    }
    Ok(v)
}

pub fn read_matrix_market(path: &Path) -> Result<Matrix> {
    parse_matrix_market(&fs::read_to_string(path)?)
}

/// Matrix Market, real field only: `array` (dense, column-major) and
/// `coordinate` (triplets, 1-based), each in `general` or `symmetric`
/// symmetry. Symmetric files store the lower triangle.
pub fn parse_matrix_market(text: &str) -> Result<Matrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let head: Vec<String> = header.split_whitespace().map(|t| t.to_lowercase()).collect();
    if head.len() != 5 || head[0] != "%%matrixmarket" || head[1] != "matrix" {
        return Err(parse_err(hline, "expected header '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    let dense = match head[2].as_str() {
        "array" => true,
        "coordinate" => false,
        other => return Err(parse_err(hline, format!("unsupported format '{other}'"))),
    };
    if head[3] != "real" {
        return Err(parse_err(hline, format!("unsupported field '{}' (only real)", head[3])));
    }
    let symmetric = match head[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(hline, format!("unsupported symmetry '{other}'"))),
    };

    let mut content = lines.filter(|(_, l)| {
        let t = l.trim_start();
        !t.is_empty() && !t.starts_with('%')
    });

    let (dline, dims) = content
        .next()
        .ok_or_else(|| parse_err(hline, "missing size line"))?;
    let dtoks: Vec<&str> = dims.split_whitespace().collect();

    if dense {
        if dtoks.len() != 2 {
            return Err(parse_err(dline, "array size line must be '<rows> <cols>'"));
        }
        let m = parse_count(dtoks[0], dline, "row count")?;
        let n = parse_count(dtoks[1], dline, "column count")?;
        if m == 0 || n == 0 {
            return Err(parse_err(dline, "matrix sizes must be positive"));
        }
        if symmetric && m != n {
            return Err(parse_err(dline, "symmetric array matrices must be square"));
        }
        let expected = if symmetric { n * (n + 1) / 2 } else { m * n };
        let mut values = Vec::with_capacity(expected);
        let mut last_line = dline;
        for (line, text) in content {
            for tok in text.split_whitespace() {
                if values.len() == expected {
                    return Err(parse_err(line, format!("more than {expected} entries")));
                }
                values.push(parse_value(tok, line)?);
            }
            last_line = line;
        }
        if values.len() != expected {
            return Err(parse_err(
                last_line,
                format!("expected {expected} entries, found {}", values.len()),
            ));
        }
        let mut out = Matrix::zeros(m, n);
        let mut it = values.into_iter();
        if symmetric {
            for j in 0..n {
                for i in j..n {
                    let v = it.next().unwrap();
                    out[(i, j)] = v;
                    out[(j, i)] = v;
                }
            }
        } else {
            for j in 0..n {
                for i in 0..m {
                    out[(i, j)] = it.next().unwrap();
                }
            }
        }
        Ok(out)
    } else {
        if dtoks.len() != 3 {
            return Err(parse_err(dline, "coordinate size line must be '<rows> <cols> <nnz>'"));
        }
        let m = parse_count(dtoks[0], dline, "row count")?;
        let n = parse_count(dtoks[1], dline, "column count")?;
        let nnz = parse_count(dtoks[2], dline, "entry count")?;
        if m == 0 || n == 0 {
            return Err(parse_err(dline, "matrix sizes must be positive"));
        }
        if symmetric && m != n {
            return Err(parse_err(dline, "symmetric coordinate matrices must be square"));
        }
        let mut out = Matrix::zeros(m, n);
        let mut seen = 0usize;
        let mut last_line = dline;
        for (line, text) in content {
            let toks: Vec<&str> = text.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(parse_err(line, "entry line must be '<row> <col> <value>'"));
            }
            let i = parse_count(toks[0], line, "row index")?;
            let j = parse_count(toks[1], line, "column index")?;
            if i == 0 || j == 0 || i > m || j > n {
                return Err(parse_err(
                    line,
                    format!("index ({i}, {j}) outside the 1-based range {m} x {n}"),
                ));
            }
            let v = parse_value(toks[2], line)?;
            seen += 1;
            if seen > nnz {
                return Err(parse_err(line, format!("more than {nnz} entries")));
            }
            out[(i - 1, j - 1)] = v;
            if symmetric {
                out[(j - 1, i - 1)] = v;
            }
            last_line = line;
        }
        if seen != nnz {
            return Err(parse_err(last_line, format!("expected {nnz} entries, found {seen}")));
        }
        Ok(out)
    }
}

/// Write a square symmetric matrix in coordinate/symmetric form: 1-based
/// lower-triangle triplets of the nonzero entries. Values use the shortest
/// decimal form that parses back to the identical float, so a save/load
/// round trip preserves the stored triplets bit for bit.
pub fn write_matrix_market_symmetric(path: &Path, m: &Matrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidParameter(format!(
            "symmetric writer needs a square matrix, got {} x {}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    let mut triplets = Vec::new();
    for j in 0..n {
        for i in j..n {
            if m[(i, j)] != 0.0 {
                triplets.push((i + 1, j + 1, m[(i, j)]));
            }
        }
    }
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix coordinate real symmetric\n");
    out.push_str("% lower triangle, 1-based indices\n");
    let _ = writeln!(out, "{n} {n} {}", triplets.len());
    for (i, j, v) in triplets {
        let _ = writeln!(out, "{i} {j} {v}");
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_csv_matrix(path: &Path) -> Result<Matrix> {
    parse_csv_matrix(&fs::read_to_string(path)?)
}

/// Dense comma-separated matrix; one optional header row is skipped when
/// any of its fields fails to parse as a number.
pub fn parse_csv_matrix(text: &str) -> Result<Matrix> {
    let rows: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    if rows.is_empty() {
        return Err(parse_err(1, "empty file"));
    }

    let fields = |l: &str| l.split(',').map(|t| t.trim().to_string()).collect::<Vec<_>>();
    let first = fields(rows[0].1);
    let header = first.iter().any(|t| t.parse::<f64>().is_err());
    let data_rows = if header { &rows[1..] } else { &rows[..] };
    if data_rows.is_empty() {
        return Err(parse_err(rows[0].0, "header row with no data rows"));
    }

    let width = fields(data_rows[0].1).len();
    let mut values = Vec::with_capacity(data_rows.len() * width);
    for (line, text) in data_rows {
        let toks = fields(text);
        if toks.len() != width {
            return Err(parse_err(
                *line,
                format!("expected {width} comma-separated fields, found {}", toks.len()),
            ));
        }
        for tok in &toks {
            values.push(parse_value(tok, *line)?);
        }
    }
    Ok(Matrix::from_row_slice(data_rows.len(), width, &values))
}

/// One solved instance in machine-readable form. `support` uses 0-based
/// indices; `values` holds the loading at each support index, in order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub algorithm: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub support: Vec<usize>,
    pub values: Vec<f64>,
    pub objective: f64,
    pub variance_ratio: Option<f64>,
    pub iterations: usize,
    pub termination: String,
    pub elapsed_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<RunTrace>,
}

impl SolutionRecord {
    pub fn from_solution(
        algorithm: &str,
        parameters: BTreeMap<String, serde_json::Value>,
        solution: &SparseSolution,
        elapsed_ms: f64,
        include_trace: bool,
    ) -> Self {
        SolutionRecord {
            algorithm: algorithm.to_string(),
            parameters,
            support: solution.support.as_slice().to_vec(),
            values: solution.support.iter().map(|&i| solution.vector[i]).collect(),
            objective: solution.objective,
            variance_ratio: solution.variance_ratio,
            iterations: solution.trace.iterations(),
            termination: solution.trace.termination.to_string(),
            elapsed_ms,
            trace: include_trace.then(|| solution.trace.clone()),
        }
    }
}

pub fn write_solution(path: &Path, record: &SolutionRecord) -> Result<()> {
    let mut text = serde_json::to_string_pretty(record)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_solution(path: &Path) -> Result<SolutionRecord> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("report");
    path.with_file_name(format!("{stem}{suffix}"))
}

/// Write the benchmark report as three files next to `csv_path`:
///
/// * `<stem>.csv` - one row per algorithm x k x statistic; fully
///   deterministic under a fixed seed.
/// * `<stem>.meta.json` - campaign metadata (seed, sizes, version, grid).
/// * `<stem>.timing.csv` - wall-clock columns, kept apart because timings
///   vary run to run.
pub fn write_report(csv_path: &Path, report: &BenchReport) -> Result<()> {
    let mut stats = String::from("algorithm,k,statistic,value\n");
    for cell in &report.cells {
        let rows: [(&str, String); 5] = [
            ("mean_variance_ratio", cell.mean_variance_ratio.to_string()),
            ("std_variance_ratio", cell.std_variance_ratio.to_string()),
            ("mean_iterations", cell.mean_iterations.to_string()),
            ("tuning_misses", cell.tuning_misses.to_string()),
            ("failures", cell.failures.to_string()),
        ];
        for (stat, value) in rows {
            let _ = writeln!(stats, "{},{},{},{}", cell.algorithm, cell.k, stat, value);
        }
    }
    fs::write(csv_path, stats)?;

    let mut timing = String::from("algorithm,k,statistic,value\n");
    let _ = writeln!(timing, "svd,0,mean_seconds,{}", report.svd_seconds_mean);
    for cell in &report.cells {
        let _ = writeln!(
            timing,
            "{},{},mean_cumulative_seconds,{}",
            cell.algorithm, cell.k, cell.mean_cumulative_seconds
        );
    }
    fs::write(sibling(csv_path, ".timing.csv"), timing)?;

    let meta = serde_json::json!({
        "m": report.m,
        "n": report.n,
        "simulations": report.simulations,
        "seed": report.seed,
        "version": report.version,
        "sequential": report.sequential,
        "k_grid": report.k_grid,
        "algorithms": report.algorithms,
    });
    let mut text = serde_json::to_string_pretty(&meta)?;
    text.push('\n');
    fs::write(sibling(csv_path, ".meta.json"), text)?;
    Ok(())
}
