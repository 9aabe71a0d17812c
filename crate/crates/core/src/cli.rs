//! The `pfringe` command line.
//!
//! Every command prints one report on standard output. JSON reports carry an
//! envelope with the tool version and the resolved arguments; floating-point
//! numbers are rounded to 15 significant digits so repeated runs compare
//! byte for byte.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::asymptotics::{
    fe_k, fe_k_star, fe_k_star_at_minus_one, fourier_coefficient, fringe_count_limit, fringe_limit, fv_k,
    fv_k_star, indnum_alphas, indnum_mean_bounds, mellin_numeric, sigma_constants, Decay, Moment, Tail,
};
use crate::error::Error;
use crate::functionals::{evaluate_additive, parse_functionals, pullback, TollFunction};
use crate::rng::replicate_rng;
use crate::simulation::{self, geometric_grid, Mode, SimulationConfig};
use crate::source::SourceDistribution;
use crate::trees::{build_trie, compress, enumerate_patricia_shapes, shape_probability, LazyKeys, DEFAULT_MAX_DEPTH};

pub const TOOL: &str = "pfringe";
/// Environment variable holding the default thread cap.
pub const THREADS_ENV: &str = "PFRINGE_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = TOOL, version, about = "Fringe statistics of random patricia tries")]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,
    /// Add a wall-clock timestamp to the report envelope.
    #[arg(long, global = true)]
    timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Asymptotic constants for fringe sizes k.
    Constants(ConstantsArgs),
    /// Monte Carlo statistics of additive functionals.
    Simulate(SimulateArgs),
    /// Empirical fringe-size law of a random node.
    FringeDist(FringeDistArgs),
    /// Essential-node probabilities and the independence-number interval.
    Indnum(IndnumArgs),
    /// All patricia shapes with k leaves and their probabilities.
    Enumerate(EnumerateArgs),
    /// Scan of E[Φ]/λ over a geometric grid of Poisson means.
    Oscillate(OscillateArgs),
    /// Quick internal consistency checks.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ListFormat {
    Text,
    Json,
}

#[derive(Debug, Args, Serialize)]
struct ConstantsArgs {
    /// Probabilities `p1,p2,...` or `uniform:m`.
    #[arg(long, default_value = "0.5,0.5")]
    source: SourceDistribution,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    k: Vec<u32>,
    /// Fourier modes kept on each side of m = 0.
    #[arg(long, default_value_t = 8)]
    fourier: usize,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Debug, Args, Serialize)]
struct KeyCount {
    /// Fixed number of keys.
    #[arg(long, conflicts_with = "lambda", required_unless_present = "lambda")]
    n: Option<usize>,
    /// Poisson mean of the number of keys.
    #[arg(long)]
    lambda: Option<f64>,
}

impl KeyCount {
    fn mode(&self) -> Mode {
        match (self.n, self.lambda) {
            (Some(n), _) => Mode::Fixed(n),
            (None, Some(l)) => Mode::Poisson(l),
            (None, None) => unreachable!("clap requires one of --n, --lambda"),
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct SimulateArgs {
    #[arg(long, default_value = "0.5,0.5")]
    source: SourceDistribution,
    #[command(flatten)]
    #[serde(flatten)]
    count: KeyCount,
    #[arg(long, default_value_t = 100)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma list: `k=2`, `geq=3`, `internal`, `leaf`, `alpha`, `shape=(x(xx))`.
    #[arg(long, default_value = "k=2")]
    functional: String,
    /// Also evaluate the functionals on the trie of the same keys.
    #[arg(long)]
    paired_trie: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
    max_depth: usize,
}

#[derive(Debug, Args, Serialize)]
struct FringeDistArgs {
    #[arg(long, default_value = "0.5,0.5")]
    source: SourceDistribution,
    #[command(flatten)]
    #[serde(flatten)]
    count: KeyCount,
    #[arg(long, default_value_t = 20)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest fringe size with its own bucket.
    #[arg(long, default_value_t = 64)]
    kmax: usize,
}

#[derive(Debug, Args, Serialize)]
struct IndnumArgs {
    /// Largest fringe size counted exactly.
    #[arg(long = "N", default_value_t = 800)]
    #[serde(rename = "N")]
    n: usize,
}

#[derive(Debug, Args, Serialize)]
struct EnumerateArgs {
    #[arg(long)]
    k: usize,
    #[arg(long, default_value = "0.5,0.5")]
    source: SourceDistribution,
    #[arg(long, value_enum, default_value_t = ListFormat::Text)]
    format: ListFormat,
}

#[derive(Debug, Args, Serialize)]
struct OscillateArgs {
    #[arg(long, default_value = "0.5,0.5")]
    source: SourceDistribution,
    #[arg(long, default_value = "k=2")]
    functional: String,
    /// First grid point.
    #[arg(long, default_value_t = 1000.0)]
    lambda_min: f64,
    /// Grid ratio between consecutive points.
    #[arg(long, default_value_t = 2f64.powf(0.25))]
    ratio: f64,
    #[arg(long, default_value_t = 13)]
    points: usize,
    #[arg(long, default_value_t = 50)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    fourier: usize,
}

/// Failure of a command: a message and the exit code to return.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidSource(_) | Error::InvalidKeys(_) | Error::InvalidArgument(_) | Error::InvalidPath(_) => {
                EXIT_USAGE
            }
            _ => EXIT_NUMERIC,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

/// Rounds every non-integer number to 15 significant digits.
pub fn canonicalize(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(0.0);
            *v = round15(x).map_or(Value::Null, Value::from);
        }
        Value::Array(items) => items.iter_mut().for_each(canonicalize),
        Value::Object(map) => map.values_mut().for_each(canonicalize),
        _ => {}
    }
}

fn round15(x: f64) -> Option<f64> {
    if !x.is_finite() {
        return None;
    }
    format!("{x:.14e}").parse().ok()
}

fn fmt15(x: f64) -> String {
    round15(x).map(|r| r.to_string()).unwrap_or_default()
}

fn constants(a: &ConstantsArgs) -> Result<Value, Failure> {
    let d = &a.source;
    let period = d.periodicity();
    let mut per_k = Vec::new();
    for &k in &a.k {
        if k < 2 {
            return Err(usage(format!("--k values must be at least 2, got {k}")));
        }
        let minus_one = Complex64::new(-1.0, 0.0);
        let fv = fv_k_star(d, k, minus_one, a.tol)?;
        let sigma = sigma_constants(d, k, None, a.fourier, a.tol)?;
        let mut fourier = Vec::new();
        let mut fourier_v = Vec::new();
        if period > 0.0 {
            for m in -(a.fourier as i64)..=(a.fourier as i64) {
                let e = fourier_coefficient(d, k, Moment::E, m, a.tol)?.value;
                let v = fourier_coefficient(d, k, Moment::V, m, a.tol)?.value;
                fourier.push(json!({ "m": m, "re": e.re, "im": e.im }));
                fourier_v.push(json!({ "m": m, "re": v.re, "im": v.im }));
            }
        }
        per_k.push(json!({
            "k": k,
            "rho_k": d.rho_int(k),
            "fe_star": fe_k_star_at_minus_one(d, k),
            "fv_star": fv.re(),
            "fv_star_error": fv.error_bound,
            "fc_star": fe_k_star_at_minus_one(d, k),
            "sigma2": sigma.sigma2,
            "sigma2_hat": sigma.sigma2_hat,
            "fringe_limit": fringe_limit(d, k)?,
            "fringe_count_limit": fringe_count_limit(d, k)?,
            "fourier": fourier,
            "fourier_v": fourier_v,
        }));
    }
    Ok(json!({
        "H": d.entropy(),
        "J": d.coentropy(),
        "d_p": period,
        "constants": per_k,
    }))
}

fn simulation_config(source: &SourceDistribution, mode: Mode, replicates: usize, seed: u64) -> SimulationConfig {
    SimulationConfig::new(source.clone(), mode).replicates(replicates).seed(seed)
}

fn simulate(a: &SimulateArgs) -> Result<(Value, Option<String>), Failure> {
    let cfg = simulation_config(&a.source, a.count.mode(), a.replicates, a.seed)
        .functionals(parse_functionals(&a.functional)?)
        .paired_trie(a.paired_trie)
        .max_depth(a.max_depth);
    let summary = simulation::run(&cfg)?;
    let csv = if a.format == Format::Csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Failure { code: EXIT_NUMERIC, message: e.to_string() };
        w.write_record(["name", "mean", "var", "se_mean", "se_var", "skew", "exkurt"]).map_err(io)?;
        for f in &summary.functionals {
            let m = &f.moments;
            let opt = |x: Option<f64>| x.map(fmt15).unwrap_or_default();
            w.write_record([
                f.name.clone(),
                fmt15(m.mean),
                fmt15(m.var),
                fmt15(m.se_mean),
                fmt15(m.se_var),
                opt(m.skew),
                opt(m.exkurt),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Failure { code: EXIT_NUMERIC, message: e.to_string() })?;
        Some(String::from_utf8(bytes).expect("csv output is utf-8"))
    } else {
        None
    };
    Ok((serde_json::to_value(&summary).expect("summary serializes"), csv))
}

fn fringe_dist(a: &FringeDistArgs) -> Result<Value, Failure> {
    let mut cfg = simulation_config(&a.source, a.count.mode(), a.replicates, a.seed);
    cfg.histogram_max = a.kmax;
    let fd = simulation::fringe_distribution(&cfg)?;
    let limits: Vec<Option<f64>> =
        fd.sizes.iter().map(|&k| (k >= 2).then(|| fringe_limit(&a.source, k as u32).ok()).flatten()).collect();
    let mut v = serde_json::to_value(&fd).expect("distribution serializes");
    v["limit"] = json!(limits);
    Ok(v)
}

fn indnum(a: &IndnumArgs) -> Result<Value, Failure> {
    if a.n < 2 {
        return Err(usage("--N must be at least 2"));
    }
    let b = indnum_mean_bounds(a.n);
    Ok(json!({
        "alphas": indnum_alphas(a.n),
        "interval": [b.lower, b.upper],
        "width_bound": b.width_bound,
        "partial": b.partial,
    }))
}

fn enumerate(a: &EnumerateArgs) -> Result<(Value, String), Failure> {
    let shapes = enumerate_patricia_shapes(a.k, a.source.alphabet_size())?;
    let mut rows = Vec::with_capacity(shapes.len());
    let mut text = String::new();
    for s in &shapes {
        let p = shape_probability(s.tree(), &a.source)?;
        let shape = s.shape_string();
        text.push_str(&format!("{shape}\t{}\t{}\n", fmt15(p), s.leaf_count()));
        rows.push(json!({ "shape": shape, "probability": p, "leaves": s.leaf_count() }));
    }
    Ok((json!({ "shapes": rows }), text))
}

fn oscillate(a: &OscillateArgs) -> Result<Value, Failure> {
    let tolls = parse_functionals(&a.functional)?;
    let [toll]: [TollFunction; 1] =
        tolls.try_into().map_err(|_| usage("oscillate takes exactly one functional"))?;
    if !(a.lambda_min > 0.0 && a.ratio > 1.0) {
        return Err(usage("--lambda-min must be positive and --ratio above 1"));
    }
    let grid = geometric_grid(a.lambda_min, a.ratio, a.points);
    let scan = simulation::oscillation_scan(&a.source, &toll, &grid, a.replicates, a.seed, a.fourier)?;
    Ok(serde_json::to_value(&scan).expect("scan serializes"))
}

/// One `selftest` check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, passed: bool, detail: String) -> SelfCheck {
    SelfCheck { name: name.into(), passed, detail }
}

/// Closed forms against quadrature, and the pullback identity on random tries.
pub fn selftest_checks() -> Result<Vec<SelfCheck>, Error> {
    let mut checks = Vec::new();
    let sources = [
        SourceDistribution::uniform(2)?,
        SourceDistribution::new(vec![0.3, 0.7])?,
        SourceDistribution::uniform(3)?,
    ];
    let minus_one = Complex64::new(-1.0, 0.0);
    for d in &sources {
        for k in 2..=6u32 {
            let decay = Decay { at_zero: k as f64, at_infinity: Tail::Exponential };
            let q = mellin_numeric(|t| fe_k(d, k, t), decay, minus_one)?;
            let exact = fe_k_star(d, k, minus_one)?.re;
            let rel = (q.value.re / exact - 1.0).abs();
            checks.push(check(format!("fe_star quadrature {d} k={k}"), rel < 1e-8, format!("rel err {rel:e}")));
        }
        let decay = Decay { at_zero: 2.0, at_infinity: Tail::Exponential };
        let q = mellin_numeric(|t| fv_k(d, 2, t, 1e-16).map(|c| c.re()).unwrap_or(f64::NAN), decay, minus_one)?;
        let exact = fv_k_star(d, 2, minus_one, 1e-14)?.re();
        let rel = (q.value.re / exact - 1.0).abs();
        checks.push(check(format!("fv_star quadrature {d} k=2"), rel < 1e-8, format!("rel err {rel:e}")));
    }
    let tolls = parse_functionals("k=2,internal,alpha,geq=3")?;
    let pulled: Vec<TollFunction> = tolls.iter().map(pullback).collect::<Result<_, _>>()?;
    let mut mismatches = 0;
    let trials = 500;
    for i in 0..trials {
        let d = &sources[i % sources.len()];
        let mut rng = replicate_rng(2024, i as u64);
        let n = rand::Rng::gen_range(&mut rng, 0..=40);
        let mut keys = LazyKeys::new(d.clone(), n, rng);
        let trie = build_trie(&mut keys, DEFAULT_MAX_DEPTH)?;
        let pat = compress(&trie);
        for (t, p) in tolls.iter().zip(&pulled) {
            if evaluate_additive(t, &pat) != evaluate_additive(p, &trie) {
                mismatches += 1;
            }
        }
    }
    checks.push(check("pullback identity", mismatches == 0, format!("{mismatches} mismatches in {trials} tries")));
    let a = indnum_alphas(4)[4];
    checks.push(check("alpha_4 = 3/7", (a - 3.0 / 7.0).abs() < 1e-15, format!("{a}")));
    Ok(checks)
}

fn selftest() -> Result<(Value, bool), Failure> {
    let checks = selftest_checks()?;
    let passed = checks.iter().all(|c| c.passed);
    Ok((json!({ "passed": passed, "checks": checks }), passed))
}

fn envelope(command: &str, config: Value, results: Value, timestamp: bool) -> Value {
    let mut env = json!({
        "tool": TOOL,
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "results": results,
    });
    if timestamp {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        env["timestamp"] = json!(secs);
    }
    canonicalize(&mut env);
    env
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

fn echo<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

/// Runs a parsed command; returns the text to print and the exit code.
fn execute(cli: &Cli) -> Result<(String, i32), Failure> {
    let wrap = |name: &str, cfg: Value, res: Value| pretty(&envelope(name, cfg, res, cli.timestamp));
    Ok(match &cli.command {
        Command::Constants(a) => (wrap("constants", echo(a), constants(a)?), EXIT_OK),
        Command::Simulate(a) => {
            let (res, csv) = simulate(a)?;
            (csv.unwrap_or_else(|| wrap("simulate", echo(a), res)), EXIT_OK)
        }
        Command::FringeDist(a) => (wrap("fringe-dist", echo(a), fringe_dist(a)?), EXIT_OK),
        Command::Indnum(a) => (wrap("indnum", echo(a), indnum(a)?), EXIT_OK),
        Command::Enumerate(a) => {
            let (res, text) = enumerate(a)?;
            match a.format {
                ListFormat::Text => (text, EXIT_OK),
                ListFormat::Json => (wrap("enumerate", echo(a), res), EXIT_OK),
            }
        }
        Command::Oscillate(a) => (wrap("oscillate", echo(a), oscillate(a)?), EXIT_OK),
        Command::Selftest => {
            let (res, passed) = selftest()?;
            (wrap("selftest", json!({}), res), if passed { EXIT_OK } else { EXIT_NUMERIC })
        }
    })
}

/// Parses `args` (program name first), runs the command and writes its
/// report to `out` and diagnostics to `err`. Returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.threads {
        Some(0) => Err(usage("--threads must be at least 1")),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(Failure { code: EXIT_NUMERIC, message: e.to_string() }),
        },
        None => execute(&cli),
    };
    match result {
        Ok((text, code)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Entry point of the binary.
pub fn main_from_env() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
