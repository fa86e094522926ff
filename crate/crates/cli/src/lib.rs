//! Command-line orchestration: load or generate an instance, solve, certify,
//! and write a report.
//!
//! Exit codes: 0 when the run succeeded (for `solve`, `solve-sketched`,
//! `verify` and `oracle`: when the weights certified), 1 when certification
//! failed, 2 on any error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use john_core::io::{
    read_matrix_market, read_weights, to_matrix_market, trace_csv, weights_json, ReportFormat, RunReport,
};
use john_core::{
    certify, certify_with_containment, fixed_point_solve, generate, oracle_solve, sketched_solve, CertificateReport,
    Error, FixedPointConfig, GeneratorFamily, GeneratorSpec, PolytopeInstance, Result, SketchConfig, SolveTrace,
    WeightVector,
};

/// Above this iteration count volume mode prints a warning.
pub const VOLUME_MODE_WARN_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "john", version, about = "Approximate John ellipsoids of symmetric polytopes {x : -1 <= Ax <= 1}")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Averaged fixed-point iteration.
    Solve(SolveArgs),
    /// Gaussian-sketched fixed-point iteration.
    SolveSketched(SolveArgs),
    /// Certify a weight vector read from JSON.
    Verify(VerifyArgs),
    /// Coordinate-ascent reference solution.
    Oracle(OracleArgs),
    /// Write a generated instance as Matrix Market.
    Gen(GenArgs),
    /// Time the fixed-point solver over a grid of sizes.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Matrix Market file with the constraint matrix.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Generator spec, e.g. `gaussian-dense:200x10:seed=7`.
    #[arg(long = "gen", value_name = "SPEC")]
    pub generator: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[command(flatten)]
    pub source: InputArgs,
    /// Target approximation ε in (0, 1).
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Seed for sketches, containment directions and seedless generator specs.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use ε/n as the target.
    #[arg(long)]
    pub volume_mode: bool,
    /// Report destination (stdout when absent).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Report format: json (certificate) or csv (per-iteration trace).
    #[arg(long, default_value = "json")]
    pub format: String,
    /// Sampled boundary points for the containment check (0 skips it).
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Failure probability for the sketched solver.
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Iteration count T.
    #[arg(long, value_name = "N")]
    pub iters: Option<usize>,
    /// Sketch rows s.
    #[arg(long, value_name = "N")]
    pub sketch_rows: Option<usize>,
    /// Record per-iteration history.
    #[arg(long)]
    pub trace: bool,
    /// Write the final weights as a JSON array.
    #[arg(long, value_name = "PATH")]
    pub weights_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// JSON array of weights.
    #[arg(long, value_name = "PATH")]
    pub weights: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iters: usize,
    #[arg(long, value_name = "PATH")]
    pub weights_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long = "gen", value_name = "SPEC")]
    pub generator: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Comma-separated row counts.
    #[arg(long = "m-list", default_value = "500,1000,2000", value_delimiter = ',')]
    pub m: Vec<usize>,
    /// Comma-separated column counts.
    #[arg(long = "n-list", default_value = "10", value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Comma-separated targets.
    #[arg(long = "eps-list", default_value = "0.1", value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// Timed solves per cell; the median is reported.
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    /// Fixed iteration count instead of the default for each cell.
    #[arg(long, value_name = "N")]
    pub iters: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    Path(PathBuf),
    Generator(GeneratorSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Solve,
    SolveSketched,
    Verify,
    Oracle,
}

impl Mode {
    fn algorithm(self) -> &'static str {
        match self {
            Mode::Solve => "fixed-point",
            Mode::SolveSketched => "sketched",
            Mode::Verify => "verify",
            Mode::Oracle => "oracle",
        }
    }
}

/// A fully validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub enum RunRequest {
    Run(SolveRequest),
    Gen { spec: GeneratorSpec, out: Option<PathBuf> },
    Bench(BenchRequest),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveRequest {
    pub mode: Mode,
    pub input: InputSource,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub iterations: Option<usize>,
    pub sketch_rows: Option<usize>,
    pub volume_mode: bool,
    pub out: Option<PathBuf>,
    pub format: ReportFormat,
    pub samples: usize,
    pub trace: bool,
    pub weights_in: Option<PathBuf>,
    pub weights_out: Option<PathBuf>,
    pub max_iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRequest {
    pub m: Vec<usize>,
    pub n: Vec<usize>,
    pub eps: Vec<f64>,
    pub repeats: usize,
    pub iterations: Option<usize>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

fn unit_interval(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in (0, 1), got {x}")))
    }
}

/// Parses a generator spec; a spec without `seed=` takes `fallback_seed`.
fn generator_spec(text: &str, fallback_seed: u64) -> Result<GeneratorSpec> {
    let mut spec: GeneratorSpec = text.parse()?;
    if !text.split(':').any(|p| p.starts_with("seed=")) {
        spec.seed = fallback_seed;
    }
    Ok(spec)
}

fn input_source(args: &InputArgs, seed: u64) -> Result<InputSource> {
    match (&args.input, &args.generator) {
        (Some(p), None) => Ok(InputSource::Path(p.clone())),
        (None, Some(g)) => Ok(InputSource::Generator(generator_spec(g, seed)?)),
        _ => Err(Error::Domain("exactly one of --input and --gen is required".into())),
    }
}

impl SolveRequest {
    fn from_common(mode: Mode, c: &CommonArgs) -> Result<Self> {
        unit_interval("--eps", c.eps)?;
        Ok(SolveRequest {
            mode,
            input: input_source(&c.source, c.seed)?,
            epsilon: c.eps,
            delta: 0.1,
            seed: c.seed,
            iterations: None,
            sketch_rows: None,
            volume_mode: c.volume_mode,
            out: c.out.clone(),
            format: c.format.parse()?,
            samples: c.samples,
            trace: false,
            weights_in: None,
            weights_out: None,
            max_iters: 1,
        })
    }
}

impl TryFrom<Cli> for RunRequest {
    type Error = Error;

    fn try_from(cli: Cli) -> Result<Self> {
        match cli.command {
            Command::Solve(a) | Command::SolveSketched(a) if a.iters == Some(0) || a.sketch_rows == Some(0) => {
                Err(Error::Domain("--iters and --sketch-rows must be positive".into()))
            }
            Command::Solve(a) => solve_request(Mode::Solve, a),
            Command::SolveSketched(a) => solve_request(Mode::SolveSketched, a),
            Command::Verify(a) => {
                let mut r = SolveRequest::from_common(Mode::Verify, &a.common)?;
                r.weights_in = Some(a.weights);
                Ok(RunRequest::Run(r))
            }
            Command::Oracle(a) => {
                if a.max_iters == 0 {
                    return Err(Error::Domain("--max-iters must be positive".into()));
                }
                let mut r = SolveRequest::from_common(Mode::Oracle, &a.common)?;
                r.max_iters = a.max_iters;
                r.weights_out = a.weights_out;
                Ok(RunRequest::Run(r))
            }
            Command::Gen(a) => Ok(RunRequest::Gen { spec: generator_spec(&a.generator, a.seed)?, out: a.out }),
            Command::Bench(a) => {
                if a.m.is_empty() || a.n.is_empty() || a.eps.is_empty() {
                    return Err(Error::Domain("bench grid needs at least one value per axis".into()));
                }
                for &e in &a.eps {
                    unit_interval("--eps", e)?;
                }
                if let Some((&m, &n)) =
                    a.m.iter().flat_map(|m| a.n.iter().map(move |n| (m, n))).find(|(m, n)| m < n || **n == 0)
                {
                    return Err(Error::Dimension(format!("bench cell {m}x{n} needs m >= n >= 1")));
                }
                if a.repeats == 0 || a.iters == Some(0) {
                    return Err(Error::Domain("--repeats and --iters must be positive".into()));
                }
                Ok(RunRequest::Bench(BenchRequest {
                    m: a.m,
                    n: a.n,
                    eps: a.eps,
                    repeats: a.repeats,
                    iterations: a.iters,
                    seed: a.seed,
                    out: a.out,
                }))
            }
        }
    }
}

fn solve_request(mode: Mode, a: SolveArgs) -> Result<RunRequest> {
    let mut r = SolveRequest::from_common(mode, &a.common)?;
    unit_interval("--delta", a.delta)?;
    r.delta = a.delta;
    r.iterations = a.iters;
    r.sketch_rows = a.sketch_rows;
    r.trace = a.trace;
    r.weights_out = a.weights_out;
    Ok(RunRequest::Run(r))
}

/// Caps rayon's global pool from `JOHN_THREADS` (unset or 0: one thread per core).
pub fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("JOHN_THREADS") else {
        return Ok(());
    };
    let threads: usize =
        value.trim().parse().map_err(|_| Error::Domain(format!("JOHN_THREADS must be an integer, got {value:?}")))?;
    if threads > 0 {
        // Fails only if a pool already exists, in which case it stays as is.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(())
}

fn load(input: &InputSource) -> Result<PolytopeInstance> {
    match input {
        InputSource::Path(p) => read_matrix_market(p),
        InputSource::Generator(spec) => generate(spec),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Runs a validated request and returns the process exit code.
pub fn run(request: &RunRequest) -> Result<i32> {
    match request {
        RunRequest::Run(r) => run_solve(r),
        RunRequest::Gen { spec, out } => {
            let inst = generate(spec)?;
            emit(out.as_deref(), &to_matrix_market(&inst))?;
            Ok(0)
        }
        RunRequest::Bench(b) => {
            emit(b.out.as_deref(), &run_bench(b)?)?;
            Ok(0)
        }
    }
}

fn run_solve(r: &SolveRequest) -> Result<i32> {
    let inst = load(&r.input)?;
    let (m, n) = (inst.rows(), inst.cols());
    let epsilon = if r.volume_mode { r.epsilon / n as f64 } else { r.epsilon };
    let history = r.trace || r.format == ReportFormat::Csv;

    let (weights, trace, target) = match r.mode {
        Mode::Solve => {
            let cfg = FixedPointConfig { epsilon, iterations: r.iterations, record_history: history };
            warn_iterations(r, cfg.resolve_iterations(m, n)?);
            let (w, t) = fixed_point_solve(&inst, &cfg)?;
            (w, t, epsilon)
        }
        Mode::SolveSketched => {
            let cfg = SketchConfig {
                epsilon,
                delta: r.delta,
                sketch_rows: r.sketch_rows,
                iterations: r.iterations,
                seed: r.seed,
                record_history: history,
            };
            warn_iterations(r, cfg.resolve_iterations(m)?);
            let (w, t) = sketched_solve(&inst, &cfg)?;
            // The sketched guarantee is a (1+ε)² factor.
            (w, t, (1.0 + epsilon) * (1.0 + epsilon) - 1.0)
        }
        Mode::Verify => {
            let path = r.weights_in.as_ref().expect("verify requests carry a weights path");
            (read_weights(path)?, SolveTrace::default(), epsilon)
        }
        Mode::Oracle => {
            let started = Instant::now();
            let sol = oracle_solve(&inst, epsilon, r.max_iters)?;
            let trace = SolveTrace {
                iterations: sol.iterations,
                wall_ms: started.elapsed().as_secs_f64() * 1e3,
                records: Vec::new(),
            };
            (sol.w_star, trace, epsilon)
        }
    };

    let cert = certificate(&inst, &weights, target, r.samples, r.seed)?;
    if let Some(p) = &r.weights_out {
        fs::write(p, weights_json(&weights) + "\n")?;
    }
    let report = RunReport {
        m,
        n,
        epsilon_target: target,
        epsilon_achieved: cert.epsilon_achieved,
        max_sigma: cert.max_sigma,
        weight_sum: cert.weight_sum,
        duality_gap: cert.duality_gap,
        logdet: cert.logdet,
        iterations: trace.iterations,
        wall_ms: trace.wall_ms,
        seed: r.seed,
        algorithm: r.mode.algorithm().to_string(),
        certified: cert.certified(),
    };
    let text = match r.format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Csv => trace_csv(&trace),
    };
    emit(r.out.as_deref(), &text)?;
    Ok(if report.certified { 0 } else { 1 })
}

fn certificate(
    inst: &PolytopeInstance,
    w: &WeightVector,
    target: f64,
    samples: usize,
    seed: u64,
) -> Result<CertificateReport> {
    if samples == 0 {
        certify(inst, w, target)
    } else {
        certify_with_containment(inst, w, target, samples, seed)
    }
}

fn warn_iterations(r: &SolveRequest, t: usize) {
    if r.volume_mode && t > VOLUME_MODE_WARN_ITERATIONS {
        eprintln!("warning: volume mode needs {t} iterations");
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of bench cell `index`: `splitmix64(base ^ splitmix64(index))`.
pub fn cell_seed(base: u64, index: usize) -> u64 {
    splitmix64(base ^ splitmix64(index as u64))
}

/// Header of the bench CSV.
pub const BENCH_HEADER: &str = "m,n,eps,iterations,median_ms,min_ms,max_sigma,certified";

fn run_bench(b: &BenchRequest) -> Result<String> {
    let mut out = String::from(BENCH_HEADER);
    out.push('\n');
    let mut index = 0;
    for &m in &b.m {
        for &n in &b.n {
            for &eps in &b.eps {
                let spec = GeneratorSpec::new(GeneratorFamily::GaussianDense, m, n).with_seed(cell_seed(b.seed, index));
                index += 1;
                let inst = generate(&spec)?;
                let cfg = FixedPointConfig { epsilon: eps, iterations: b.iterations, record_history: false };
                let mut times = Vec::with_capacity(b.repeats);
                let mut last = None;
                for _ in 0..b.repeats {
                    let (w, trace) = fixed_point_solve(&inst, &cfg)?;
                    times.push(trace.wall_ms);
                    last = Some((w, trace.iterations));
                }
                let (w, iterations) = last.expect("at least one repeat");
                times.sort_by(f64::total_cmp);
                let cert = certify(&inst, &w, eps)?;
                out.push_str(&format!(
                    "{m},{n},{eps},{iterations},{:.6},{:.6},{:.17e},{}\n",
                    times[times.len() / 2],
                    times[0],
                    cert.max_sigma,
                    cert.certified()
                ));
            }
        }
    }
    Ok(out)
}

/// Machine-readable error line for stderr.
pub fn error_json(err: &Error) -> String {
    serde_json::json!({ "error": err.kind(), "message": err.to_string() }).to_string()
}
