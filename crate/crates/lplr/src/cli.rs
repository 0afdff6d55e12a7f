//! The `lplr` command line.
//!
//! Exit codes: 0 success, 1 usage or file errors, 2 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lplr_core::lpsvd::conditioner_distortion_bound;
use lplr_core::{
    lp_low_rank, lp_svd, lp_svd_randomized, orient, sandwich_check, Contraction, DenseMatrix,
    LowRankConfig, Method, RankKApprox,
};
use serde::Serialize;

use crate::io::{load_matrix, store_matrix, Format, IoError};
use crate::report::{evaluate, EvalReport, ReportError};
use crate::sweep::{sweep, SweepPlan};
use crate::synth::{generate_synthetic, SyntheticSpec};

#[derive(Debug, Parser)]
#[command(
    name = "lplr",
    version,
    about = "ℓp low-rank approximation via the Löwner ellipsoid"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a low-rank + noise + outliers matrix.
    Synth(SynthArgs),
    /// Rank-k ℓp factorisation `A ≈ L·R`.
    Factorize(FactorizeArgs),
    /// Rank-k truncated SVD, scored in ℓp.
    Baseline(BaselineArgs),
    /// Error against rank for several p and methods.
    Sweep(SweepArgs),
    /// Empirical sandwich check of the ‖·‖p-SVD.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Lowner,
    Randomized,
    Svd,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Lowner => Method::LpDeterministic,
            MethodArg::Randomized => Method::LpRandomized,
            MethodArg::Svd => Method::L2Svd,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ContractionArg {
    InvD,
    InvSqrtD,
}

fn parse_p(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if p.is_finite() && p >= 1.0 {
        Ok(p)
    } else {
        Err(format!("p must be a finite real >= 1, got {s}"))
    }
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long = "k-true")]
    k_true: usize,
    /// Fraction of rows scaled by `--outlier-scale`.
    #[arg(long, default_value_t = 0.0)]
    outliers: f64,
    #[arg(long, default_value_t = 20.0)]
    outlier_scale: f64,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = ContractionArg::InvD)]
    contraction: ContractionArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverArgs {
    fn config(&self) -> LowRankConfig {
        let mut cfg = LowRankConfig {
            seed: self.seed,
            ..LowRankConfig::default()
        };
        cfg.lp.lowner.seed = self.seed;
        cfg.lp.lowner.contraction = match self.contraction {
            ContractionArg::InvD => Contraction::InvD,
            ContractionArg::InvSqrtD => Contraction::InvSqrtD,
        };
        cfg
    }
}

#[derive(Debug, Args)]
struct FactorizeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = parse_p, default_value = "1")]
    p: f64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    rank: u64,
    #[arg(long, value_enum, default_value_t = MethodArg::Lowner)]
    method: MethodArg,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out_left: Option<PathBuf>,
    #[arg(long)]
    out_right: Option<PathBuf>,
    /// JSON report path; printed to stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    #[arg(long)]
    input: PathBuf,
    /// Norm the reconstruction error is measured in.
    #[arg(long, value_parser = parse_p, default_value = "2")]
    p: f64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    rank: u64,
    #[arg(long)]
    out_left: Option<PathBuf>,
    #[arg(long)]
    out_right: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = parse_p, value_delimiter = ',', default_value = "1,2")]
    p: Vec<f64>,
    /// Defaults to 1, d/2 and d−1.
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u64).range(1..))]
    ranks: Vec<u64>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "lowner,svd")]
    methods: Vec<MethodArg>,
    #[command(flatten)]
    solver: SolverArgs,
    /// JSON array of reports; printed to stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    /// The same rows as CSV, for plotting.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = parse_p, default_value = "1")]
    p: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Lowner)]
    method: MethodArg,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<lplr_core::Error> for CliError {
    fn from(e: lplr_core::Error) -> Self {
        match e {
            lplr_core::Error::InvalidRank { .. } | lplr_core::Error::InvalidP(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Core(c) => c.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io(IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load(path: &Path) -> Result<DenseMatrix, CliError> {
    Ok(load_matrix(path, Format::from_path(path))?)
}

fn store(path: &Path, a: &DenseMatrix) -> Result<(), CliError> {
    Ok(store_matrix(path, Format::from_path(path), a)?)
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| io_error(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}").map_err(|e| io_error(Path::new("<stdout>"), e))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialise")
}

fn check_rank(k: u64, a: &DenseMatrix) -> Result<usize, CliError> {
    let max = a.rows().min(a.cols()) - 1;
    if k as usize > max {
        return Err(CliError::Usage(format!(
            "--rank {k} must be at most {max} for a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    Ok(k as usize)
}

/// Factors in the caller's orientation, so that `left·right ≈ A`.
fn export_factors(
    approx: &RankKApprox,
    left: Option<&PathBuf>,
    right: Option<&PathBuf>,
) -> Result<(), CliError> {
    let (l, r) = if approx.transposed {
        (approx.right.transpose(), approx.left.transpose())
    } else {
        (approx.left.clone(), approx.right.clone())
    };
    if let Some(path) = left {
        store(path, &l)?;
    }
    if let Some(path) = right {
        store(path, &r)?;
    }
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), CliError> {
    let spec = SyntheticSpec {
        n: args.n,
        d: args.d,
        k_true: args.k_true,
        outlier_fraction: args.outliers,
        noise_sigma: args.noise,
        outlier_scale: args.outlier_scale,
        seed: args.seed,
    };
    let a = generate_synthetic(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
    store(&args.out, &a)
}

fn finish(
    a: &DenseMatrix,
    approx: &RankKApprox,
    p: f64,
    seed: u64,
    start: Instant,
) -> Result<EvalReport, CliError> {
    let mut report = evaluate(a, approx, p)?;
    report.seed = seed;
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

fn factorize(args: FactorizeArgs) -> Result<(), CliError> {
    let a = load(&args.input)?;
    let k = check_rank(args.rank, &a)?;
    let start = Instant::now();
    let approx = lp_low_rank(&a, k, args.p, args.method.into(), &args.solver.config())?;
    let report = finish(&a, &approx, args.p, args.solver.seed, start)?;
    export_factors(&approx, args.out_left.as_ref(), args.out_right.as_ref())?;
    emit(args.report.as_deref(), &to_json(&report))
}

fn baseline(args: BaselineArgs) -> Result<(), CliError> {
    let a = load(&args.input)?;
    let k = check_rank(args.rank, &a)?;
    let start = Instant::now();
    let approx = lp_low_rank(&a, k, args.p, Method::L2Svd, &LowRankConfig::default())?;
    let report = finish(&a, &approx, args.p, 0, start)?;
    export_factors(&approx, args.out_left.as_ref(), args.out_right.as_ref())?;
    emit(args.report.as_deref(), &to_json(&report))
}

fn default_ranks(d: usize) -> Vec<usize> {
    let mut ks = vec![1, d / 2, d - 1];
    ks.retain(|&k| k >= 1);
    ks.dedup();
    ks
}

fn csv_table(reports: &[EvalReport]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let numerical = |e: csv::Error| CliError::Numerical(e.to_string());
    w.write_record([
        "n",
        "d",
        "k",
        "p",
        "method",
        "compression_rate",
        "error_pp",
        "error_l2_baseline",
        "bound_upper",
        "wall_time_ms",
    ])
    .map_err(numerical)?;
    for r in reports {
        w.write_record([
            r.n.to_string(),
            r.d.to_string(),
            r.k.to_string(),
            r.p.to_string(),
            r.method.name().to_string(),
            r.compression_rate.to_string(),
            r.error_pp.to_string(),
            r.error_l2_baseline.to_string(),
            r.bound_upper.to_string(),
            r.wall_time_ms.to_string(),
        ])
        .map_err(numerical)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn run_sweep(args: SweepArgs) -> Result<(), CliError> {
    let a = load(&args.input)?;
    let d = a.rows().min(a.cols());
    if d < 2 {
        return Err(CliError::Usage("sweep needs at least a 2x2 matrix".into()));
    }
    let ranks = if args.ranks.is_empty() {
        default_ranks(d)
    } else {
        args.ranks
            .iter()
            .map(|&k| check_rank(k, &a))
            .collect::<Result<_, _>>()?
    };
    let plan = SweepPlan {
        ranks,
        ps: args.p,
        methods: args.methods.into_iter().map(Method::from).collect(),
        config: args.solver.config(),
        seed: args.solver.seed,
    };
    let reports = sweep(&a, &plan)?;
    if let Some(path) = &args.csv {
        std::fs::write(path, csv_table(&reports)?).map_err(|e| io_error(path, e))?;
    }
    emit(args.report.as_deref(), &to_json(&reports))
}

#[derive(Debug, Serialize)]
struct CheckReport {
    p: f64,
    method: &'static str,
    sandwich_lo: f64,
    sandwich_hi: f64,
    lower_limit: f64,
    upper_limit: f64,
    distortion: f64,
    passed: bool,
}

fn check(args: CheckArgs) -> Result<(), CliError> {
    let a = load(&args.input)?;
    let (a, _) = orient(&a);
    let (n, d) = a.shape();
    let cfg = args.solver.config();
    let method: Method = args.method.into();
    let (f, lower_limit, upper_limit) = match method {
        Method::LpDeterministic => {
            let f = lp_svd(&a, args.p, &cfg.lp)?;
            let slack = cfg.lp.slack;
            (f, 1.0 - slack, (d as f64).sqrt() * (1.0 + slack))
        }
        Method::LpRandomized => {
            let f = lp_svd_randomized(&a, args.p, cfg.seed, &cfg.conditioner)?;
            (f, 1.0 - 1e-6, conditioner_distortion_bound(d, n, args.p))
        }
        Method::L2Svd => {
            return Err(CliError::Usage(
                "check applies to lowner and randomized".into(),
            ))
        }
    };
    let s = sandwich_check(&a, args.p, &f.d, &f.v, args.samples, args.solver.seed);
    let passed = s.lo >= lower_limit && s.hi <= upper_limit;
    let report = CheckReport {
        p: args.p,
        method: method.name(),
        sandwich_lo: s.lo,
        sandwich_hi: s.hi,
        lower_limit,
        upper_limit,
        distortion: f.distortion,
        passed,
    };
    emit(None, &to_json(&report))?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Numerical("sandwich check failed".into()))
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Factorize(a) => factorize(a),
        Command::Baseline(a) => baseline(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Check(a) => check(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}
