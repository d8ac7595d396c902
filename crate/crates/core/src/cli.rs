//! Command-line front end.
//!
//! Each subcommand prints one JSON `RunResult` (or CSV for `figure1` and
//! `haar --csv`). Exit codes: 0 success, 2 malformed input, 3 domain
//! error, 4 optimizer failure, 5 failed output validation.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::disturbance::{
    average_disturbance, edist_lower_bound, edist_simple_lower, edist_upper_bound, edist_upper_bound_limit,
    entanglement_of_disturbance, haar_average_disturbance, haar_bounds, implicit_residual,
    max_disturbance_bound, quantumness, schmidt_probabilities, Distance, HaarScope, OptimizerConfig,
};
use crate::error::Error;
use crate::hiding::{check_randomizing_pair, hiding_capability_bounds, validate_report, werner_hiding_report};
use crate::measure::MeasurementScope;
use crate::parallel::with_threads;
use crate::states::{
    matrix_to_json, randomized_hiding_pair, Ensemble, EnsembleJson, PureState, PureStateJson, QuantumState, StateJson,
};

#[derive(Parser, Debug)]
#[command(name = "qdisturb", version, about = "Measurement-disturbance quantumness and data-hiding bounds")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Master seed; parallel units derive theirs as seed + index.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long = "max-iter", global = true, default_value_t = 2000)]
    pub max_iter: usize,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum DistanceArg {
    Trace,
    RelativeEntropy,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum HaarScopeArg {
    Single,
    OneSided,
    TwoSided,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Entanglement of disturbance from Schmidt probabilities or a pure state.
    Edist {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required_unless_present = "state", conflicts_with = "state")]
        probs: Option<Vec<f64>>,
        /// Pure bipartite state JSON: {"dims": [dA, dB], "amplitudes": [[re, im], ..]}.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Optimized average disturbance of an ensemble (or single state) file.
    Quantumness {
        file: PathBuf,
        /// a, b, ab, all, global, or a comma-separated list of factor indices.
        #[arg(long, default_value = "a")]
        scope: String,
        #[arg(long, value_enum, default_value = "trace")]
        distance: DistanceArg,
        /// Write the optimal measurement bases to this file.
        #[arg(long)]
        emit_basis: Option<PathBuf>,
    },
    /// Monte Carlo Haar average of the disturbance against its analytic bracket.
    Haar {
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long, value_enum, default_value = "single")]
        scope: HaarScopeArg,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Emit one CSV row per batch instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Hiding-capability report for a state pair.
    Hiding {
        #[command(flatten)]
        source: HidingSource,
    },
    /// Entanglement of disturbance against its upper bound on the d = 3 simplex.
    Figure1 {
        #[arg(long = "grid-steps", default_value_t = 40)]
        grid_steps: usize,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct HidingSource {
    /// Werner pair of local dimension d.
    #[arg(long)]
    pub werner: Option<usize>,
    /// Two state files.
    #[arg(long, num_args = 2, value_names = ["RHO", "SIGMA"])]
    pub pair: Option<Vec<PathBuf>>,
    /// Random-unitary pair: local dimension and number of unitaries.
    #[arg(long, num_args = 2, value_names = ["D", "N"])]
    pub random: Option<Vec<usize>>,
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Lib(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Lib(Error::OptimizerFailure(_)) => 4,
            CliError::Lib(Error::InvariantViolation(_)) => 5,
            CliError::Lib(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(s) => write!(f, "input error: {s}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn invariant(what: String) -> CliError {
    CliError::Lib(Error::InvariantViolation(what))
}

#[derive(Serialize)]
struct RunResult {
    command: &'static str,
    inputs_digest: String,
    seed: u64,
    values: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<Value>,
    wall_time: f64,
}

struct Digest256(Sha256);

impl Digest256 {
    fn new(command: &str) -> Self {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        Self(h)
    }
    fn add(&mut self, label: &str, bytes: &[u8]) {
        self.0.update((label.len() as u64).to_le_bytes());
        self.0.update(label.as_bytes());
        self.0.update((bytes.len() as u64).to_le_bytes());
        self.0.update(bytes);
    }
    fn hex(self) -> String {
        hex::encode(self.0.finalize())
    }
}

fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(bytes: &[u8], path: &Path) -> CliResult<T> {
    serde_json::from_slice(bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// An ensemble file, or a single state file read as a one-member ensemble.
fn parse_ensemble(bytes: &[u8], path: &Path) -> CliResult<Ensemble> {
    let value: Value = parse_json(bytes, path)?;
    if value.get("entries").is_some() {
        let e: EnsembleJson = parse_json(bytes, path)?;
        Ok(Ensemble::try_from(&e)?)
    } else {
        let s: StateJson = parse_json(bytes, path)?;
        Ok(Ensemble::single(QuantumState::try_from(&s)?))
    }
}

fn parse_state(bytes: &[u8], path: &Path) -> CliResult<QuantumState> {
    let s: StateJson = parse_json(bytes, path)?;
    Ok(QuantumState::try_from(&s)?)
}

/// Resolves a scope name against the ensemble's factors. `global` views the
/// whole space as one factor.
fn resolve_scope(name: &str, ensemble: Ensemble) -> CliResult<(Ensemble, MeasurementScope)> {
    let n = ensemble.dims().len();
    let targets = match name.to_ascii_lowercase().as_str() {
        "global" => {
            let total: usize = ensemble.dims().iter().product();
            let entries = ensemble
                .entries()
                .iter()
                .map(|(p, s)| Ok((*p, s.clone().with_dims(vec![total])?)))
                .collect::<crate::Result<Vec<_>>>()?;
            return Ok((Ensemble::new(entries)?, MeasurementScope::single(0)));
        }
        "a" => vec![0],
        "b" => vec![1],
        "ab" => vec![0, 1],
        "all" => (0..n).collect(),
        other => other
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| CliError::Input(format!("bad scope '{name}'"))))
            .collect::<CliResult<Vec<_>>>()?,
    };
    let scope = MeasurementScope::new(targets)?;
    scope.check(ensemble.dims())?;
    Ok((ensemble, scope))
}

fn optimizer_config(g: &GlobalOpts) -> OptimizerConfig {
    OptimizerConfig {
        restarts: g.restarts,
        max_iterations: g.max_iter,
        tolerance: g.tol,
        seed: g.seed,
    }
}

fn config_digest(d: &mut Digest256, g: &GlobalOpts) {
    d.add("seed", &g.seed.to_le_bytes());
    d.add("restarts", &(g.restarts as u64).to_le_bytes());
    d.add("tol", &g.tol.to_le_bytes());
    d.add("max_iter", &(g.max_iter as u64).to_le_bytes());
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

enum Output {
    Json(&'static str, Digest256, Value, Option<Value>),
    Text(String),
}

/// Edist summary for a distribution: value, residual and bounds.
pub fn edist_summary(probs: &[f64]) -> crate::Result<Value> {
    let e = entanglement_of_disturbance(probs)?;
    let mut sorted: Vec<f64> = probs.iter().copied().filter(|&p| p >= 1e-12).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = sorted.iter().sum();
    sorted.iter_mut().for_each(|p| *p /= total);
    let p1 = sorted[0];
    let p2 = sorted.get(1).copied().unwrap_or(0.0);
    let rank = sorted.len();
    Ok(json!({
        "entanglement_of_disturbance": e,
        "residual": implicit_residual(e, &sorted),
        "schmidt_rank": rank,
        "upper_bound": edist_upper_bound(p1, rank)?,
        "upper_bound_limit": edist_upper_bound_limit(p1)?,
        "lower_bound": edist_lower_bound(p1, p2)?,
        "simple_lower_bound": edist_simple_lower(p1)?,
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FigureRow {
    pub p1: f64,
    pub p2: f64,
    pub e: f64,
    pub upper_bound: f64,
}

/// Grid `p = (i, j, k - i - j) / k` with `p1 >= p2 >= p3 >= 0`, plus the
/// uniform point when the grid misses it, ordered by `(p1, p2)`.
pub fn figure1_rows(k: usize) -> crate::Result<Vec<FigureRow>> {
    if k < 2 {
        return Err(Error::DomainError(format!("grid steps must be at least 2, got {k}")));
    }
    let mut points: Vec<[f64; 3]> = Vec::new();
    for i in 0..=k {
        for j in 0..=(k - i) {
            let l = k - i - j;
            if i >= j && j >= l {
                let kf = k as f64;
                points.push([i as f64 / kf, j as f64 / kf, l as f64 / kf]);
            }
        }
    }
    if !k.is_multiple_of(3) {
        points.push([1.0 / 3.0; 3]);
    }
    points.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    points
        .iter()
        .map(|p| {
            let total: f64 = p.iter().sum();
            let probs: Vec<f64> = p.iter().map(|x| x / total).collect();
            Ok(FigureRow {
                p1: p[0],
                p2: p[1],
                e: entanglement_of_disturbance(&probs)?,
                upper_bound: edist_upper_bound(probs[0], 3)?,
            })
        })
        .collect()
}

fn run_edist(probs: Option<Vec<f64>>, state: Option<PathBuf>) -> CliResult<Output> {
    let mut d = Digest256::new("edist");
    let (probs, source) = match (probs, state) {
        (Some(p), _) => {
            d.add("probs", serde_json::to_string(&p).unwrap_or_default().as_bytes());
            if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(CliError::Lib(Error::InvalidDistribution("negative or non-finite entry".into())));
            }
            let total: f64 = p.iter().sum();
            if p.is_empty() || (total - 1.0).abs() > 1e-6 {
                return Err(CliError::Lib(Error::InvalidDistribution(format!("entries sum to {total}"))));
            }
            (p.iter().map(|x| x / total).collect::<Vec<_>>(), "probs")
        }
        (None, Some(path)) => {
            let bytes = read_file(&path)?;
            d.add("state", &bytes);
            let j: PureStateJson = parse_json(&bytes, &path)?;
            let psi = PureState::try_from(&j)?;
            (schmidt_probabilities(&psi)?, "state")
        }
        (None, None) => return Err(CliError::Input("need --probs or --state".into())),
    };
    let mut values = edist_summary(&probs)?;
    values["source"] = json!(source);
    values["schmidt_probs"] = json!(probs);
    let residual = values["residual"].as_f64().unwrap_or(f64::NAN);
    if residual.is_nan() || residual.abs() > 1e-12 {
        return Err(invariant(format!("implicit-equation residual {residual}")));
    }
    Ok(Output::Json("edist", d, values, None))
}

fn run_quantumness(
    g: &GlobalOpts,
    file: &Path,
    scope: &str,
    distance: DistanceArg,
    emit_basis: Option<&Path>,
) -> CliResult<Output> {
    let bytes = read_file(file)?;
    let mut d = Digest256::new("quantumness");
    d.add("file", &bytes);
    d.add("scope", scope.as_bytes());
    let distance = match distance {
        DistanceArg::Trace => Distance::Trace,
        DistanceArg::RelativeEntropy => Distance::RelativeEntropy,
    };
    d.add("distance", format!("{distance:?}").as_bytes());
    config_digest(&mut d, g);

    let (ensemble, scope) = resolve_scope(scope, parse_ensemble(&bytes, file)?)?;
    let report = quantumness(&ensemble, &scope, distance, &optimizer_config(g))?;

    let check = average_disturbance(&ensemble, &report.optimal_measurements, &report.scope, distance)?;
    if report.value < -1e-9 || (check - report.value).abs() > 1e-7 {
        return Err(invariant(format!("report value {} re-evaluates to {check}", report.value)));
    }
    if distance == Distance::Trace {
        let cap = max_disturbance_bound(&scope.target_dims(ensemble.dims())?)?;
        if report.value > cap + 1e-9 {
            return Err(invariant(format!("value {} exceeds the maximal disturbance {cap}", report.value)));
        }
    }

    if let Some(path) = emit_basis {
        let bases: Vec<Value> = report.optimal_measurements.iter().map(|m| json!(matrix_to_json(m.basis()))).collect();
        let text = serde_json::to_string_pretty(&json!({ "targets": report.scope.targets(), "bases": bases }))
            .expect("json");
        std::fs::write(path, text + "\n").map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    let values = json!({
        "value": report.value,
        "converged": report.converged,
        "dims": ensemble.dims(),
        "ensemble_size": ensemble.len(),
    });
    Ok(Output::Json("quantumness", d, values, Some(to_value(&report))))
}

fn run_haar(g: &GlobalOpts, dims: &[usize], kind: HaarScopeArg, samples: usize, csv: bool) -> CliResult<Output> {
    let mut d = Digest256::new("haar");
    d.add("dims", serde_json::to_string(dims).unwrap_or_default().as_bytes());
    d.add("scope", format!("{kind:?}").as_bytes());
    d.add("samples", &(samples as u64).to_le_bytes());
    d.add("seed", &g.seed.to_le_bytes());

    if dims.is_empty() || dims.contains(&0) {
        return Err(CliError::Input(format!("bad dims {dims:?}")));
    }
    let (kind, state_dims, scope) = match (kind, dims) {
        (HaarScopeArg::Single, _) => {
            let total: usize = dims.iter().product();
            (HaarScope::Single, vec![total], MeasurementScope::single(0))
        }
        (HaarScopeArg::OneSided, [a, b]) => (HaarScope::OneSided, vec![*a, *b], MeasurementScope::single(0)),
        (HaarScopeArg::TwoSided, [a, b]) => (HaarScope::TwoSided, vec![*a, *b], MeasurementScope::all(2)),
        _ => return Err(CliError::Input("one- and two-sided scopes need --dims dA,dB".into())),
    };
    let (da, db) = (state_dims[0], state_dims.get(1).copied().unwrap_or(1));
    let (lower, upper) = haar_bounds(kind, da, db);
    let est = haar_average_disturbance(&state_dims, &scope, samples, g.seed)?;

    let cap = max_disturbance_bound(&scope.target_dims(&state_dims)?)?;
    if est.max_sample > cap + 1e-9 {
        return Err(invariant(format!("sample {} exceeds maximal disturbance {cap}", est.max_sample)));
    }
    if csv {
        let mut s = String::from("batch,samples,mean\n");
        for b in &est.batches {
            let _ = writeln!(s, "{},{},{}", b.index, b.samples, b.mean);
        }
        return Ok(Output::Text(s));
    }
    let slack = 3.0 * est.standard_error;
    let values = json!({
        "estimate": est.estimate,
        "standard_error": est.standard_error,
        "samples": est.samples,
        "lower_bound": lower,
        "upper_bound": upper,
        "inside_bracket_3se": est.estimate >= lower - slack && est.estimate <= upper + slack,
        "max_sample": est.max_sample,
        "max_disturbance_bound": cap,
    });
    Ok(Output::Json("haar", d, values, Some(to_value(&est.batches))))
}

fn run_hiding(g: &GlobalOpts, src: &HidingSource) -> CliResult<Output> {
    let mut d = Digest256::new("hiding");
    config_digest(&mut d, g);
    let cfg = optimizer_config(g);
    let (report, extra) = if let Some(dim) = src.werner {
        d.add("werner", &(dim as u64).to_le_bytes());
        (werner_hiding_report(dim, &cfg)?, Value::Null)
    } else if let Some(paths) = &src.pair {
        let a = read_file(&paths[0])?;
        let b = read_file(&paths[1])?;
        d.add("rho", &a);
        d.add("sigma", &b);
        let rho = parse_state(&a, &paths[0])?;
        let sigma = parse_state(&b, &paths[1])?;
        (hiding_capability_bounds(&rho, &sigma, &cfg)?, Value::Null)
    } else if let Some(dn) = &src.random {
        let (dim, n) = (dn[0], dn[1]);
        d.add("random", format!("{dim},{n}").as_bytes());
        let check = check_randomizing_pair(dim, n, g.seed)?;
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(g.seed);
        let (rho, sigma) = randomized_hiding_pair(dim, n, &mut rng)?;
        (hiding_capability_bounds(&rho, &sigma, &cfg)?, to_value(&check))
    } else {
        return Err(CliError::Input("need --werner, --pair or --random".into()));
    };
    validate_report(&report)?;
    let mut values = json!({
        "global_distance": report.global_distance,
        "epsilon": report.epsilon,
        "locc_lower_bound": report.locc_lower_bound,
        "capability_upper_estimate": report.capability_upper_estimate,
        "ensemble_quantumness": report.ensemble_quantumness,
        "quantumness_bound": report.quantumness_bound,
    });
    if !extra.is_null() {
        values["randomizing_pair"] = extra;
    }
    Ok(Output::Json("hiding", d, values, Some(to_value(&report))))
}

fn run_figure1(k: usize) -> CliResult<Output> {
    if k < 2 {
        return Err(CliError::Input(format!("--grid-steps must be at least 2, got {k}")));
    }
    let rows = figure1_rows(k)?;
    let mut s = String::from("p1,p2,E,upper_bound\n");
    for r in &rows {
        if r.e > r.upper_bound + 1e-9 {
            return Err(invariant(format!("E {} above bound {} at ({}, {})", r.e, r.upper_bound, r.p1, r.p2)));
        }
        let _ = writeln!(s, "{},{},{},{}", r.p1, r.p2, r.e, r.upper_bound);
    }
    Ok(Output::Text(s))
}

fn execute(cli: &Cli) -> CliResult<Output> {
    let g = &cli.global;
    match &cli.command {
        Command::Edist { probs, state } => run_edist(probs.clone(), state.clone()),
        Command::Quantumness {
            file,
            scope,
            distance,
            emit_basis,
        } => run_quantumness(g, file, scope, *distance, emit_basis.as_deref()),
        Command::Haar {
            dims,
            scope,
            samples,
            csv,
        } => run_haar(g, dims, *scope, *samples, *csv),
        Command::Hiding { source } => run_hiding(g, source),
        Command::Figure1 { grid_steps } => run_figure1(*grid_steps),
    }
}

/// Parses `args`, runs the command and writes its output. Returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if cli.global.threads == Some(0) {
        eprintln!("input error: --threads must be positive");
        return 2;
    }
    let start = Instant::now();
    let outcome = with_threads(cli.global.threads, || execute(&cli));
    let text = match outcome {
        Ok(Output::Text(s)) => s,
        Ok(Output::Json(command, digest, values, report)) => {
            let result = RunResult {
                command,
                inputs_digest: digest.hex(),
                seed: cli.global.seed,
                values,
                report,
                wall_time: start.elapsed().as_secs_f64(),
            };
            serde_json::to_string_pretty(&result).expect("json") + "\n"
        }
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    match &cli.global.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("input error: {}: {e}", path.display());
                return 2;
            }
        }
        None => print!("{text}"),
    }
    0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_grid_contains_corners() {
        let rows = figure1_rows(40).unwrap();
        let top = rows.iter().find(|r| r.p1 == 1.0).unwrap();
        assert_eq!((top.e, top.upper_bound), (0.0, 0.0));
        let centre = rows.iter().find(|r| (r.p1 - 1.0 / 3.0).abs() < 1e-15).unwrap();
        assert!((centre.e - 2.0 / 3.0).abs() < 1e-12);
        assert!(figure1_rows(1).is_err());
    }

    #[test]
    fn figure_grid_divisible_by_three_has_no_extra_row() {
        let rows = figure1_rows(3).unwrap();
        // (1,0,0), (2/3,1/3,0), (1/3,1/3,1/3)
        assert_eq!(rows.len(), 3);
    }

    #[test]
    fn edist_summary_fields() {
        let v = edist_summary(&[0.5, 0.5]).unwrap();
        assert!((v["entanglement_of_disturbance"].as_f64().unwrap() - 0.5).abs() < 1e-12);
        assert!(v["residual"].as_f64().unwrap().abs() <= 1e-12);
    }

    #[test]
    fn scope_names() {
        let e = Ensemble::single(QuantumState::maximally_mixed(vec![2, 3]).unwrap());
        let (_, s) = resolve_scope("b", e.clone()).unwrap();
        assert_eq!(s.targets(), &[1]);
        let (g, s) = resolve_scope("global", e.clone()).unwrap();
        assert_eq!(g.dims(), &[6]);
        assert_eq!(s.targets(), &[0]);
        assert!(resolve_scope("2", e.clone()).is_err());
        assert!(resolve_scope("x", e).is_err());
    }
}
