//! Command-line front end: JSON ingestion, analysis commands and reports.
//!
//! Input documents are JSON objects of one of the forms
//!
//! * `{"d": 1, "rows": [[1, 1], [1, 2]]}` a matrix (a `2d x 2d` map, a `d x d`
//!   graph matrix or a `2d x d` basis),
//! * `{"maps": [matrix, ...]}` or `{"example69": {"A": [...], "P": [...],
//!   "tau": [[t, t'], ...]}}` a sequence,
//! * `{"subspaces": [matrix, ...]}` a list of Lagrangian subspaces.
//!
//! Reports are JSON (floats with 17 significant digits, infinities as the
//! strings `"+inf"`/`"-inf"`) or CSV. Exit status is 0 on success, 2 on
//! validation errors and 3 when an analysis stops on conditioning.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::cocycle::{
    analyze_sequence_with, build_example69, check_criterion69, AnalyzeOptions, Criterion69Report,
    Example69Spec, GrowthVerdict, LimitEstimate, MapSequence, SequenceReport,
};
use crate::error::SectorError;
use crate::expansion::{mc_search, sigma_with, ExpansionResult};
use crate::factorization::{canonical_form, factor_qpr_with, monotonicity_class_with};
use crate::lagrangian::{distance, mobius, LagrangianSubspace};
use crate::linalg::{matrix_to_rows, Definiteness, SymMatrix, Tolerances};
use crate::symplectic::{BlockMap, PhaseVector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CONDITIONING: i32 = 3;

/// Default sample count of the `oracle` command.
pub const ORACLE_SAMPLES: usize = 100_000;

#[derive(Debug, Parser)]
#[command(name = "symsector", version, about = "Monotone symplectic maps and sectors of Lagrangian subspaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Input JSON file; repeat for commands taking several inputs.
    #[arg(long, short, global = true)]
    pub input: Vec<PathBuf>,
    /// Report file; standard output when absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Seed for the expansion oracle.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Number of steps to analyze; the sequence length when absent.
    #[arg(long, global = true)]
    pub n_max: Option<usize>,
    /// Sample count for the expansion oracle.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Definiteness tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Leave the timestamp out of JSON reports.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Symplecticity and monotonicity class of a map.
    Check,
    /// The (A, P, R) factorization of a map.
    Factor,
    /// Canonical form of a strictly monotone map.
    Canon,
    /// Least expansion coefficient; `--samples` adds the oracle value.
    Sigma,
    /// Pairwise distances of subspaces.
    Dist,
    /// Images of subspaces under a map (inputs: map, subspaces).
    Mobius,
    /// Products of a sequence of maps.
    Analyze,
    /// Generate the example sequence and check its growth criterion.
    Gen69,
    /// Monte-Carlo infimum of the expansion coefficient.
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Sector(#[from] SectorError),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "Io",
            CliError::Parse(_) => "Parse",
            CliError::Usage(_) => "Usage",
            CliError::Sector(e) => e.kind(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({"error": {"kind": self.kind(), "message": self.to_string()}})
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// A finished report: its text and the exit status.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    pub body: String,
}

/// Runs the command and writes the report to `--output` or standard output.
pub fn run(cli: &Cli) -> io::Result<i32> {
    let outcome = execute(cli);
    match &cli.output {
        Some(path) => fs::write(path, &outcome.body)?,
        None => io::stdout().write_all(outcome.body.as_bytes())?,
    }
    if outcome.exit_code == EXIT_VALIDATION {
        if let Ok(v) = serde_json::from_str::<Value>(&outcome.body) {
            if let Some(msg) = v["error"]["message"].as_str() {
                eprintln!("error: {msg}");
            }
        }
    }
    Ok(outcome.exit_code)
}

/// Runs the command and returns the report text without touching the
/// filesystem beyond reading inputs.
pub fn execute(cli: &Cli) -> Outcome {
    match dispatch(cli) {
        Ok(report) => {
            let exit_code = if report.conditioning_stop {
                EXIT_CONDITIONING
            } else {
                EXIT_OK
            };
            let body = match (cli.format, &report.table) {
                (Format::Csv, Some(table)) => table.clone(),
                (Format::Csv, None) => flatten_csv(&report.value),
                (Format::Json, _) => {
                    let mut value = report.value;
                    if !cli.no_timestamp {
                        if let Value::Object(map) = &mut value {
                            map.insert("timestamp".into(), json!(unix_seconds()));
                        }
                    }
                    to_json_string(&value)
                }
            };
            Outcome { exit_code, body }
        }
        Err(e) => Outcome {
            exit_code: EXIT_VALIDATION,
            body: to_json_string(&e.to_json()),
        },
    }
}

fn unix_seconds() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

struct Report {
    value: Value,
    table: Option<String>,
    conditioning_stop: bool,
}

impl Report {
    fn plain(value: Value) -> Self {
        Report {
            value,
            table: None,
            conditioning_stop: false,
        }
    }
}

fn tolerances(cli: &Cli) -> CliResult<Tolerances> {
    match cli.tol {
        Some(t) if !(t > 0.0 && t.is_finite()) => {
            Err(CliError::Usage(format!("--tol must be positive, got {t}")))
        }
        Some(t) => Ok(Tolerances::with_definiteness(t)),
        None => Ok(Tolerances::default()),
    }
}

fn input(cli: &Cli, k: usize) -> CliResult<Value> {
    let path = cli.input.get(k).ok_or_else(|| {
        CliError::Usage(format!(
            "{} input file(s) required, {} given",
            k + 1,
            cli.input.len()
        ))
    })?;
    read_json(path)
}

pub fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn dispatch(cli: &Cli) -> CliResult<Report> {
    let tol = tolerances(cli)?;
    match cli.command {
        Command::Check => {
            let l = parse_map(&input(cli, 0)?)?;
            let symplectic = crate::symplectic::is_symplectic(&l, tol.symplectic);
            let class = if symplectic {
                json!(monotonicity_class_with(&l, &tol)?.as_str())
            } else {
                Value::Null
            };
            Ok(Report::plain(json!({
                "command": "check",
                "d": l.dim(),
                "symplectic": symplectic,
                "defect": num(l.symplectic_defect()),
                "class": class,
            })))
        }
        Command::Factor => {
            let l = parse_map(&input(cli, 0)?)?;
            let f = factor_qpr_with(&l, &tol)?;
            Ok(Report::plain(json!({
                "command": "factor",
                "d": l.dim(),
                "A": matrix_json(&f.a),
                "P": matrix_json(f.p.as_matrix()),
                "R": matrix_json(f.r.as_matrix()),
                "P_class": definiteness_json(&f.p_class),
                "R_class": definiteness_json(&f.r_class),
                "cond_A": num(f.cond_a),
                "class": f.monotone_class().as_str(),
            })))
        }
        Command::Canon => {
            let l = parse_map(&input(cli, 0)?)?;
            let c = canonical_form(&l)?;
            Ok(Report::plain(json!({
                "command": "canon",
                "d": l.dim(),
                "t": nums(&c.t),
                "left_iso": map_json(&c.left_iso),
                "right_iso": map_json(&c.right_iso),
                "core": map_json(&c.core),
                "residual": num(c.residual(&l)),
            })))
        }
        Command::Sigma => {
            let l = parse_map(&input(cli, 0)?)?;
            let e = sigma_with(&l, &tol)?;
            let mut value = json!({"command": "sigma", "d": l.dim()});
            extend(&mut value, expansion_json(&e));
            if let Some(samples) = cli.samples {
                extend(&mut value, oracle_json(&l, e.sigma, samples, cli.seed)?);
            }
            Ok(Report::plain(value))
        }
        Command::Oracle => {
            let l = parse_map(&input(cli, 0)?)?;
            let e = sigma_with(&l, &tol)?;
            let samples = cli.samples.unwrap_or(ORACLE_SAMPLES);
            let mut value = json!({"command": "oracle", "d": l.dim(), "sigma": num(e.sigma)});
            extend(&mut value, oracle_json(&l, e.sigma, samples, cli.seed)?);
            Ok(Report::plain(value))
        }
        Command::Dist => {
            let subspaces = parse_subspaces(&input(cli, 0)?)?;
            let mut rows = Vec::with_capacity(subspaces.len());
            for a in &subspaces {
                let mut row = Vec::with_capacity(subspaces.len());
                for b in &subspaces {
                    row.push(num(distance(a, b)?));
                }
                rows.push(Value::Array(row));
            }
            Ok(Report::plain(json!({
                "command": "dist",
                "count": subspaces.len(),
                "distances": rows,
            })))
        }
        Command::Mobius => {
            let l = parse_map(&input(cli, 0)?)?;
            let subspaces = parse_subspaces(&input(cli, 1)?)?;
            let images = subspaces
                .iter()
                .map(|e| mobius(&l, e).map(|img| subspace_json(&img)))
                .collect::<crate::error::Result<Vec<_>>>()?;
            Ok(Report::plain(json!({
                "command": "mobius",
                "subspaces": images,
            })))
        }
        Command::Analyze => {
            let doc = input(cli, 0)?;
            let (seq, probes) = parse_sequence(&doc)?;
            let n_max = cli.n_max.unwrap_or(seq.len());
            let opts = AnalyzeOptions {
                tol,
                ..AnalyzeOptions::default()
            };
            let report = analyze_sequence_with(&seq, n_max, &probes, &opts)?;
            Ok(Report {
                table: Some(analyze_csv(&report, probes.len())),
                conditioning_stop: report.flags.conditioning_stop.is_some(),
                value: sequence_report_json(&report, opts.growth_threshold),
            })
        }
        Command::Gen69 => {
            let doc = input(cli, 0)?;
            let spec_doc = doc
                .get("example69")
                .ok_or_else(|| CliError::Parse("expected an \"example69\" object".into()))?;
            let (spec, probe) = parse_example69(spec_doc)?;
            let seq = build_example69(&spec)?;
            let horizon = cli.n_max.unwrap_or(spec.len());
            let probe = probe.unwrap_or_else(|| default_probe(spec.dim()));
            let crit = check_criterion69(&spec, horizon, &probe)?;
            let maps: Vec<Value> = seq.maps().iter().map(map_json).collect();
            Ok(Report::plain(json!({
                "command": "gen69",
                "maps": maps,
                "probe": nums(probe.stacked().as_slice()),
                "criterion": criterion_json(&crit),
            })))
        }
    }
}

fn oracle_json(l: &BlockMap, sigma: f64, samples: usize, seed: u64) -> CliResult<Value> {
    if samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let mc = mc_search(l, samples, seed)?;
    Ok(json!({
        "oracle": {
            "mc_inf_beta": num(mc.min_beta),
            "samples": samples,
            "seed": seed,
            "ratio": num(mc.min_beta / sigma),
            "within_band": mc.min_beta >= sigma - 1e-9 && mc.min_beta <= 1.01 * sigma,
            "best": nums(mc.best.stacked().as_slice()),
        }
    }))
}

fn extend(target: &mut Value, extra: Value) {
    if let (Value::Object(t), Value::Object(e)) = (target, extra) {
        t.extend(e);
    }
}

fn default_probe(d: usize) -> PhaseVector {
    PhaseVector {
        xi: DVector::from_element(d, 1.0),
        eta: DVector::from_element(d, 1.0),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixDoc {
    Object {
        d: Option<usize>,
        rows: Vec<Vec<f64>>,
    },
    Rows(Vec<Vec<f64>>),
}

impl MatrixDoc {
    fn into_parts(self) -> (Option<usize>, Vec<Vec<f64>>) {
        match self {
            MatrixDoc::Object { d, rows } => (d, rows),
            MatrixDoc::Rows(rows) => (None, rows),
        }
    }
}

fn dense(rows: &[Vec<f64>]) -> CliResult<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 {
        return Err(CliError::Parse("matrix has no entries".into()));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(CliError::Parse("matrix rows have unequal lengths".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn matrix_doc(v: &Value) -> CliResult<(Option<usize>, DMatrix<f64>)> {
    let doc: MatrixDoc = serde_json::from_value(v.clone())
        .map_err(|e| CliError::Parse(format!("expected a matrix: {e}")))?;
    let (d, rows) = doc.into_parts();
    Ok((d, dense(&rows)?))
}

pub fn parse_map(v: &Value) -> CliResult<BlockMap> {
    let (d, m) = matrix_doc(v)?;
    let l = BlockMap::from_matrix(m)?;
    if let Some(d) = d {
        if d != l.dim() {
            return Err(SectorError::DimensionMismatch {
                expected: d,
                got: l.dim(),
            }
            .into());
        }
    }
    Ok(l)
}

/// A `d x d` matrix is a graph, a `2d x d` matrix a basis.
pub fn parse_subspace(v: &Value) -> CliResult<LagrangianSubspace> {
    let (d, m) = matrix_doc(v)?;
    let cols = m.ncols();
    if let Some(d) = d {
        if d != cols {
            return Err(SectorError::DimensionMismatch {
                expected: d,
                got: cols,
            }
            .into());
        }
    }
    if m.nrows() == cols {
        Ok(LagrangianSubspace::from_graph_matrix(m)?)
    } else if m.nrows() == 2 * cols {
        Ok(LagrangianSubspace::from_basis(m)?)
    } else {
        Err(CliError::Parse(format!(
            "a subspace needs a {cols}x{cols} graph or a {}x{cols} basis, got {} rows",
            2 * cols,
            m.nrows()
        )))
    }
}

pub fn parse_subspaces(v: &Value) -> CliResult<Vec<LagrangianSubspace>> {
    let list = v
        .get("subspaces")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::Parse("expected a \"subspaces\" array".into()))?;
    list.iter().map(parse_subspace).collect()
}

fn parse_vector(v: &Value, d: usize) -> CliResult<PhaseVector> {
    let xs: Vec<f64> = serde_json::from_value(v.clone())
        .map_err(|e| CliError::Parse(format!("expected a probe vector: {e}")))?;
    if xs.len() != 2 * d {
        return Err(SectorError::DimensionMismatch {
            expected: 2 * d,
            got: xs.len(),
        }
        .into());
    }
    Ok(PhaseVector::from_stacked(&DVector::from_vec(xs))?)
}

/// Reads `{"maps": [...]}` or `{"example69": {...}}` with optional probes:
/// `"probes": [[xi..., eta...], ...]` at the top level or `"probe"` inside the
/// example object. Without probes the vector of all ones is used.
pub fn parse_sequence(v: &Value) -> CliResult<(MapSequence, Vec<PhaseVector>)> {
    let (seq, inner_probe) = if let Some(maps) = v.get("maps").and_then(Value::as_array) {
        let maps = maps.iter().map(parse_map).collect::<CliResult<Vec<_>>>()?;
        (MapSequence::new(maps)?, None)
    } else if let Some(spec) = v.get("example69") {
        let (spec, probe) = parse_example69(spec)?;
        (build_example69(&spec)?, probe)
    } else {
        return Err(CliError::Parse(
            "expected a \"maps\" array or an \"example69\" object".into(),
        ));
    };
    let d = seq.dim();
    let mut probes = match v.get("probes").and_then(Value::as_array) {
        Some(list) => list
            .iter()
            .map(|p| parse_vector(p, d))
            .collect::<CliResult<Vec<_>>>()?,
        None => Vec::new(),
    };
    if let Some(p) = inner_probe {
        probes.insert(0, p);
    }
    if probes.is_empty() && d > 0 {
        probes.push(default_probe(d));
    }
    Ok((seq, probes))
}

#[derive(Deserialize)]
struct Example69Doc {
    #[serde(rename = "A")]
    a: Vec<MatrixDoc>,
    #[serde(rename = "P")]
    p: Vec<MatrixDoc>,
    tau: Vec<[f64; 2]>,
    #[serde(rename = "C", default)]
    c: Option<f64>,
    #[serde(rename = "R", default)]
    r: Option<Vec<MatrixDoc>>,
    #[serde(default)]
    probe: Option<Vec<f64>>,
}

pub fn parse_example69(v: &Value) -> CliResult<(Example69Spec, Option<PhaseVector>)> {
    let doc: Example69Doc = serde_json::from_value(v.clone())
        .map_err(|e| CliError::Parse(format!("invalid example69 object: {e}")))?;
    let to_dense = |m: MatrixDoc| dense(&m.into_parts().1);
    let to_sym = |m: MatrixDoc| -> CliResult<SymMatrix> { Ok(SymMatrix::new(to_dense(m)?)?) };
    let a_list = doc.a.into_iter().map(to_dense).collect::<CliResult<Vec<_>>>()?;
    let p_list = doc.p.into_iter().map(to_sym).collect::<CliResult<Vec<_>>>()?;
    let r_list = doc
        .r
        .map(|r| r.into_iter().map(to_sym).collect::<CliResult<Vec<_>>>())
        .transpose()?;
    let tau_list = doc.tau.iter().map(|t| (t[0], t[1])).collect();
    let spec = Example69Spec::new(a_list, p_list, tau_list, doc.c, r_list)?;
    let probe = doc
        .probe
        .map(|p| parse_vector(&json!(p), spec.dim()))
        .transpose()?;
    Ok((spec, probe))
}

/// JSON number, or `"+inf"`, `"-inf"`, `"nan"` for non-finite values.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("+inf")
    } else {
        json!("-inf")
    }
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().copied().map(num).collect())
}

pub fn matrix_json(m: &DMatrix<f64>) -> Value {
    let rows: Vec<Value> = matrix_to_rows(m).iter().map(|r| nums(r)).collect();
    json!({"d": m.ncols(), "rows": rows})
}

/// A `2d x 2d` map with `"d"` the half dimension.
pub fn map_json(l: &BlockMap) -> Value {
    let rows: Vec<Value> = l.to_rows().iter().map(|r| nums(r)).collect();
    json!({"d": l.dim(), "rows": rows})
}

pub fn subspace_json(e: &LagrangianSubspace) -> Value {
    match e.graph() {
        Some(u) => matrix_json(u.as_matrix()),
        None => matrix_json(&e.basis()),
    }
}

fn definiteness_json(d: &Definiteness) -> Value {
    json!({
        "class": format!("{:?}", d.class),
        "min_eig": num(d.min_eig),
        "max_eig": num(d.max_eig),
    })
}

fn expansion_json(e: &ExpansionResult) -> Value {
    json!({
        "sigma": num(e.sigma),
        "t1": num(e.t1),
        "witness": e.witness.as_ref().map(|w| json!({
            "xi": nums(w.xi.as_slice()),
            "eta": nums(w.eta.as_slice()),
        })),
    })
}

fn verdict_json(v: &GrowthVerdict) -> Value {
    match v {
        GrowthVerdict::CertifiedGrowth { threshold, n } => {
            json!({"kind": "CertifiedGrowth", "threshold": num(*threshold), "n": n})
        }
        GrowthVerdict::NoVerdict => json!({"kind": "NoVerdict"}),
    }
}

fn limit_json(l: &LimitEstimate) -> Value {
    json!({
        "estimate": subspace_json(&l.estimate),
        "bound": num(l.bound),
        "n": l.n,
        "sigma": num(l.sigma),
    })
}

fn sequence_report_json(r: &SequenceReport, threshold: f64) -> Value {
    let steps: Vec<Value> = r
        .steps
        .iter()
        .map(|s| {
            json!({
                "n": s.n,
                "sigma_n": num(s.sigma_n),
                "t1_n": num(s.t1_n),
                "diameter_n": num(s.diameter_n),
                "cond_A": num(s.cond_a),
                "image_v1": subspace_json(&s.image_v1),
                "image_v2": subspace_json(&s.image_v2),
                "q_probes": nums(&s.q_probes),
            })
        })
        .collect();
    let f = &r.flags;
    json!({
        "command": "analyze",
        "steps": steps,
        "flags": {
            "strict_at_step": f.strict_at_step,
            "certified_growth": f.certified_growth,
            "limit_estimate": f.limit_estimate.as_ref().map(limit_json),
            "limit_diameter_bound": num(f.limit_diameter_bound),
            "conditioning_stop": f.conditioning_stop,
        },
        "verdict": verdict_json(&r.verdict(threshold)),
    })
}

fn criterion_json(c: &Criterion69Report) -> Value {
    let first = c.q_trajectory[0];
    let last = *c.q_trajectory.last().expect("nonempty");
    json!({
        "series_partial": num(c.series_partial),
        "q_trajectory": nums(&c.q_trajectory),
        "growth": num(last / first),
        "nondecreasing": c.nondecreasing,
        "ratio_bound_holds": c.ratio_bound_holds,
        "min_ratio_slack": num(c.min_ratio_slack),
        "verdict": verdict_json(&c.verdict),
    })
}

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "+inf".into()
    } else {
        "-inf".into()
    }
}

fn analyze_csv(r: &SequenceReport, probes: usize) -> String {
    let mut out = String::from("n,sigma_n,t1_n,diameter_n");
    for k in 0..probes {
        out.push_str(&format!(",q_probe_{k}"));
    }
    out.push('\n');
    for s in &r.steps {
        out.push_str(&format!(
            "{},{},{},{}",
            s.n,
            format_float(s.sigma_n),
            format_float(s.t1_n),
            format_float(s.diameter_n)
        ));
        for q in &s.q_probes {
            out.push(',');
            out.push_str(&format_float(*q));
        }
        out.push('\n');
    }
    out
}

fn flatten_into(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => map
            .iter()
            .for_each(|(k, x)| flatten_into(&key(k), x, out)),
        Value::Array(xs) => xs
            .iter()
            .enumerate()
            .for_each(|(i, x)| flatten_into(&key(&i.to_string()), x, out)),
        Value::Number(n) => out.push((
            prefix.to_string(),
            match n.as_f64() {
                Some(f) if n.is_f64() => format_float(f),
                _ => n.to_string(),
            },
        )),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
        Value::Null => out.push((prefix.to_string(), String::new())),
    }
}

fn flatten_csv(v: &Value) -> String {
    let mut pairs = Vec::new();
    flatten_into("", v, &mut pairs);
    let mut out = String::from("key,value\n");
    for (k, x) in pairs {
        out.push_str(&format!("{k},{x}\n"));
    }
    out
}

struct FloatFormatter(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for FloatFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with every float written to 17 significant digits.
pub fn to_json_string(v: &Value) -> String {
    let mut buf = Vec::new();
    let fmt = FloatFormatter(serde_json::ser::PrettyFormatter::new());
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    serde::Serialize::serialize(v, &mut ser).expect("serializing a JSON value cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON output is UTF-8")
}
