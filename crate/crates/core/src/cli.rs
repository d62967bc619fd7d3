//! Command-line front end used by the `qso` binary.
//!
//! Exit codes:
//!
//! | code | meaning                                            |
//! |------|----------------------------------------------------|
//! | 0    | success, valid operator, or CONSISTENT verdict     |
//! | 2    | the operator violates a structural constraint      |
//! | 3    | I/O failure, malformed input, unknown name/param   |
//! | 4    | REFUTED_EXACT                                      |
//! | 5    | REFUTED_SAMPLED                                    |
//! | 6    | no fixed point found from any start                |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::dissipativity::{self, SamplingOptions, Verdict, COEF_TOL};
use crate::dynamics::{self, Arithmetic, CesaroOptions, IterateOptions, CLUSTER_RADIUS, FP_TOL, TAIL_FRACTION};
use crate::error::{Error, Result};
use crate::json::{self, format_f64};
use crate::operators::{self, roster, OperatorSpec, Params, RawOperator};
use crate::simplex::{self, SimplexPoint, EPS_CMP};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONSTRAINT: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_REFUTED_EXACT: i32 = 4;
pub const EXIT_REFUTED_SAMPLED: i32 = 5;
pub const EXIT_NO_CONVERGENCE: i32 = 6;

#[derive(Debug, Parser)]
#[command(name = "qso", version, about = "Stochastic operators on the simplex")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate an operator and report the first violated constraint.
    Validate(ValidateArgs),
    /// Run the dissipativity checks (exact conditions, then sampling).
    Check(CheckArgs),
    /// Write a trajectory as CSV: n,x1..xm,phi,defect.
    Iterate(IterateArgs),
    /// Follow Cesàro means; CSV n,mean1..meanm,fluctuation plus a JSON summary.
    Cesaro(CesaroArgs),
    /// Search for fixed points and classify them.
    Fixed(FixedArgs),
    /// Estimate the ω-limit set of a trajectory.
    Omega(OmegaArgs),
    /// List the built-in operators or export one as JSON.
    Gallery(GalleryArgs),
}

#[derive(Debug, Args)]
pub struct Source {
    /// Built-in operator name (see `gallery --list`).
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    pub gallery: Option<String>,
    /// Gallery parameter `key=value`; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Operator JSON file.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file, written atomically; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StartArgs {
    /// `barycenter`, `vertex:k` (1-based), `random`, or comma-separated coordinates.
    #[arg(long, default_value = "barycenter")]
    pub x0: String,
    #[arg(long, default_value_t = crate::DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DirectionArg {
    Dissipative,
    Bistochastic,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub output: Output,
    /// Samples per random phase.
    #[arg(short = 'n', long = "samples", default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = crate::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = EPS_CMP)]
    pub cmp_tol: f64,
    #[arg(long, default_value_t = COEF_TOL)]
    pub coef_tol: f64,
    #[arg(long, value_enum, default_value = "dissipative")]
    pub direction: DirectionArg,
}

#[derive(Debug, Args)]
pub struct IterateArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub output: Output,
    #[command(flatten)]
    pub start: StartArgs,
    /// Number of steps.
    #[arg(short = 'n', default_value_t = 1000)]
    pub n: usize,
    /// Species left out of φ (1-based, comma-separated).
    #[arg(long, default_value = "1", value_delimiter = ',')]
    pub exclude: Vec<usize>,
    /// Keep raw images instead of renormalizing after each step.
    #[arg(long)]
    pub raw: bool,
    /// Iterate with logarithmic coordinates.
    #[arg(long)]
    pub log_domain: bool,
}

#[derive(Debug, Args)]
pub struct CesaroArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub start: StartArgs,
    /// Number of averaged terms.
    #[arg(short = 'n', default_value_t = 100_000)]
    pub n: usize,
    /// Convergence threshold on the fluctuation of the last ten samples.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Average every `stride`-th iterate only.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Plain arithmetic instead of logarithmic coordinates.
    #[arg(long)]
    pub linear: bool,
    /// CSV of sampled means; not written when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON summary file; stdout when absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FixedArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub output: Output,
    #[arg(long, default_value_t = 32)]
    pub starts: usize,
    #[arg(long, default_value_t = FP_TOL)]
    pub fp_tol: f64,
    #[arg(long, default_value_t = crate::DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct OmegaArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub output: Output,
    #[command(flatten)]
    pub start: StartArgs,
    #[arg(short = 'n', default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = TAIL_FRACTION)]
    pub tail_fraction: f64,
    #[arg(long, default_value_t = CLUSTER_RADIUS)]
    pub cluster_radius: f64,
}

#[derive(Debug, Args)]
pub struct GalleryArgs {
    /// Print the roster.
    #[arg(long, conflicts_with = "export", required_unless_present = "export")]
    pub list: bool,
    /// Export the named operator as JSON.
    #[arg(long, value_name = "NAME")]
    pub export: Option<String>,
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    #[command(flatten)]
    pub output: Output,
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidDimension { .. }
        | Error::NegativeCoefficient { .. }
        | Error::RowSumViolation { .. }
        | Error::Asymmetry { .. }
        | Error::IndexOutOfRange { .. }
        | Error::DuplicateEntry { .. }
        | Error::UnsupportedDegree(_)
        | Error::NotAPartition { .. }
        | Error::NotAFixedPoint { .. } => EXIT_CONSTRAINT,
        Error::NoConvergence => EXIT_NO_CONVERGENCE,
        Error::DimensionMismatch { .. }
        | Error::NegativeCoordinate { .. }
        | Error::MassViolation { .. }
        | Error::NonFinite { .. }
        | Error::UnknownName(_)
        | Error::ParamOutOfRange { .. }
        | Error::UnknownParam(_)
        | Error::TrajectoryTooShort { .. }
        | Error::Io(_)
        | Error::Parse(_) => EXIT_INPUT,
    }
}

pub fn verdict_exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Consistent => EXIT_OK,
        Verdict::RefutedExact => EXIT_REFUTED_EXACT,
        Verdict::RefutedSampled => EXIT_REFUTED_SAMPLED,
    }
}

fn error_json(e: &Error) -> serde_json::Value {
    json!({
        "kind": e.code(),
        "message": e.to_string(),
        "parents": e.parents_one_based(),
    })
}

pub fn parse_params(raw: &[String]) -> Result<Params> {
    let mut out = BTreeMap::new();
    for kv in raw {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("parameter `{kv}` is not KEY=VALUE")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("parameter `{k}` has non-numeric value `{v}`")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

pub fn read_raw(path: &Path) -> Result<RawOperator> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

/// Loads the operator; the outer error is an input problem (exit 3), the
/// inner one a constraint violation reported by validation.
fn load(source: &Source) -> Result<Result<OperatorSpec>> {
    if let Some(path) = &source.file {
        let raw = read_raw(path)?;
        return Ok(operators::validate(&raw));
    }
    let name = source.gallery.as_deref().expect("clap enforces a source");
    Ok(Ok(operators::gallery(name, &parse_params(&source.params)?)?))
}

fn load_valid(source: &Source) -> Result<OperatorSpec> {
    load(source)?
}

pub fn parse_x0(arg: &str, m: usize, seed: u64) -> Result<SimplexPoint> {
    let s = arg.trim();
    if s == "barycenter" {
        return SimplexPoint::barycenter(m);
    }
    if s == "random" {
        return simplex::sample_uniform(m, &mut ChaCha8Rng::seed_from_u64(seed));
    }
    if let Some(k) = s.strip_prefix("vertex:") {
        let k: usize = k
            .parse()
            .map_err(|_| Error::Parse(format!("bad vertex index `{k}`")))?;
        if k == 0 || k > m {
            return Err(Error::ParamOutOfRange {
                name: "vertex".into(),
                value: k as f64,
                range: format!("[1, {m}]"),
            });
        }
        return SimplexPoint::vertex(m, k - 1);
    }
    let coords = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad coordinate `{t}`")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if coords.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: coords.len(),
        });
    }
    SimplexPoint::new(coords)
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory followed by a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, contents.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(contents.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn emit_json<T: Serialize + ?Sized>(out: Option<&Path>, value: &T) -> Result<()> {
    emit(out, &json::to_string(value)?)
}

fn csv_row(out: &mut String, n: usize, values: impl IntoIterator<Item = f64>) {
    write!(out, "{n}").expect("writing to a String");
    for v in values {
        out.push(',');
        out.push_str(&format_f64(v));
    }
    out.push('\n');
}

fn cmd_validate(a: &ValidateArgs) -> Result<i32> {
    let report = match load(&a.source)? {
        Ok(op) => (
            EXIT_OK,
            json!({"valid": true, "operator": op.name, "m": op.dim(), "degree": op.degree(), "violations": []}),
        ),
        Err(e) => (
            exit_code(&e),
            json!({"valid": false, "violations": [error_json(&e)]}),
        ),
    };
    emit_json(a.output.out.as_deref(), &report.1)?;
    Ok(report.0)
}

fn cmd_check(a: &CheckArgs) -> Result<i32> {
    let op = load_valid(&a.source)?;
    let opts = SamplingOptions {
        n: a.samples,
        cmp_tol: a.cmp_tol,
        coef_tol: a.coef_tol,
        seed: a.seed,
        ..SamplingOptions::default()
    };
    let report = match a.direction {
        DirectionArg::Dissipative => dissipativity::certify_sampled(&op, &opts),
        DirectionArg::Bistochastic => dissipativity::check_bistochastic_sampled(&op, &opts),
    };
    emit_json(a.output.out.as_deref(), &report)?;
    Ok(verdict_exit_code(report.verdict))
}

fn excluded(list: &[usize], m: usize) -> Result<Vec<usize>> {
    if list.is_empty() || list.len() >= m {
        return Err(Error::ParamOutOfRange {
            name: "exclude".into(),
            value: list.len() as f64,
            range: format!("a nonempty proper subset of 1..={m}"),
        });
    }
    list.iter()
        .map(|&i| {
            if i == 0 || i > m {
                Err(Error::ParamOutOfRange {
                    name: "exclude".into(),
                    value: i as f64,
                    range: format!("[1, {m}]"),
                })
            } else {
                Ok(i - 1)
            }
        })
        .collect()
}

fn cmd_iterate(a: &IterateArgs) -> Result<i32> {
    let op = load_valid(&a.source)?;
    let m = op.dim();
    let x0 = parse_x0(&a.start.x0, m, a.start.seed)?;
    let ex = excluded(&a.exclude, m)?;
    let opts = IterateOptions {
        renormalize: !a.raw,
        arithmetic: if a.log_domain {
            Arithmetic::LogDomain
        } else {
            Arithmetic::Linear
        },
    };
    let traj = dynamics::iterate_with(&op, &x0, a.n, opts)?;
    let mut csv = String::from("n");
    for i in 1..=m {
        write!(csv, ",x{i}").expect("writing to a String");
    }
    csv.push_str(",phi,defect\n");
    for (t, p) in traj.points.iter().enumerate() {
        let defect = if t == 0 { 0.0 } else { traj.defects[t - 1] };
        let extra = [dynamics::lyapunov_phi(p, &ex), defect];
        csv_row(&mut csv, t, p.coords().iter().copied().chain(extra));
    }
    emit(a.output.out.as_deref(), &csv)?;
    Ok(EXIT_OK)
}

fn cmd_cesaro(a: &CesaroArgs) -> Result<i32> {
    let op = load_valid(&a.source)?;
    let m = op.dim();
    let x0 = parse_x0(&a.start.x0, m, a.start.seed)?;
    let opts = CesaroOptions {
        n_max: a.n,
        tol: a.tol,
        stride: a.stride,
        arithmetic: if a.linear {
            Arithmetic::Linear
        } else {
            Arithmetic::LogDomain
        },
        ..CesaroOptions::default()
    };
    let r = dynamics::cesaro(&op, &x0, &opts)?;
    if let Some(path) = &a.out {
        let mut csv = String::from("n");
        for i in 1..=m {
            write!(csv, ",mean{i}").expect("writing to a String");
        }
        csv.push_str(",fluctuation\n");
        for (idx, (n, mean)) in r.partial_means.iter().enumerate() {
            let lo = idx.saturating_sub(dynamics::CESARO_WINDOW - 1);
            let window = &r.partial_means[lo..=idx];
            let mut fl: f64 = 0.0;
            for (i, (_, p)) in window.iter().enumerate() {
                for (_, q) in &window[i + 1..] {
                    fl = fl.max(p.dist_inf(q));
                }
            }
            csv_row(&mut csv, *n, mean.coords().iter().copied().chain([fl]));
        }
        write_atomic(path, csv.as_bytes())?;
    }
    let last = r.partial_means.last().map(|(_, p)| p.clone());
    let summary = json!({
        "operator": op.name,
        "x0": x0,
        "n_max": a.n,
        "stride": a.stride,
        "arithmetic": opts.arithmetic,
        "converged": r.converged,
        "fluctuation": r.fluctuation,
        "tol": a.tol,
        "last_mean": last,
        "limit_estimate": r.limit_estimate,
    });
    emit_json(a.summary.as_deref(), &summary)?;
    Ok(EXIT_OK)
}

fn cmd_fixed(a: &FixedArgs) -> Result<i32> {
    let op = load_valid(&a.source)?;
    let fps = dynamics::find_fixed_points(&op, a.starts, a.fp_tol, a.seed)?;
    let report = json!({
        "operator": op.name,
        "n_starts": a.starts,
        "fp_tol": a.fp_tol,
        "seed": a.seed,
        "fixed_points": fps,
    });
    emit_json(a.output.out.as_deref(), &report)?;
    Ok(EXIT_OK)
}

fn cmd_omega(a: &OmegaArgs) -> Result<i32> {
    let op = load_valid(&a.source)?;
    let x0 = parse_x0(&a.start.x0, op.dim(), a.start.seed)?;
    let traj = dynamics::iterate(&op, &x0, a.n)?;
    let w = dynamics::omega_estimate(&traj, a.tail_fraction, a.cluster_radius)?;
    let report = json!({
        "operator": op.name,
        "x0": x0,
        "n": a.n,
        "omega": w,
    });
    emit_json(a.output.out.as_deref(), &report)?;
    Ok(EXIT_OK)
}

fn cmd_gallery(a: &GalleryArgs) -> Result<i32> {
    if a.list {
        let mut text = String::new();
        for e in roster() {
            let params = if e.params.is_empty() {
                "-".to_string()
            } else {
                e.params.join("; ")
            };
            writeln!(text, "{}\t{}\t{}", e.name, params, e.citation).expect("writing to a String");
        }
        emit(a.output.out.as_deref(), &text)?;
        return Ok(EXIT_OK);
    }
    let name = a.export.as_deref().expect("clap enforces --list or --export");
    let op = operators::gallery(name, &parse_params(&a.params)?)?;
    emit_json(a.output.out.as_deref(), &op.to_raw())?;
    Ok(EXIT_OK)
}

fn init_threads() {
    if let Some(n) = std::env::var("QSO_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // Fails only if a global pool exists already, which is harmless here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

pub fn run(cli: &Cli) -> Result<i32> {
    init_threads();
    match &cli.command {
        Command::Validate(a) => cmd_validate(a),
        Command::Check(a) => cmd_check(a),
        Command::Iterate(a) => cmd_iterate(a),
        Command::Cesaro(a) => cmd_cesaro(a),
        Command::Fixed(a) => cmd_fixed(a),
        Command::Omega(a) => cmd_omega(a),
        Command::Gallery(a) => cmd_gallery(a),
    }
}

/// Parses the process arguments, runs the command and returns the exit code.
/// Errors are printed to stderr as JSON.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", json!({"error": error_json(&e)}));
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn x0_forms() {
        assert_eq!(parse_x0("barycenter", 3, 0).unwrap(), SimplexPoint::barycenter(3).unwrap());
        assert_eq!(parse_x0("vertex:2", 3, 0).unwrap(), SimplexPoint::vertex(3, 1).unwrap());
        assert_eq!(parse_x0("0.3, 0.3,0.4", 3, 0).unwrap().coords(), &[0.3, 0.3, 0.4]);
        assert_eq!(parse_x0("random", 3, 5).unwrap(), parse_x0("random", 3, 5).unwrap());
        assert!(matches!(parse_x0("vertex:4", 3, 0), Err(Error::ParamOutOfRange { .. })));
        assert!(matches!(parse_x0("0.5,0.5", 3, 0), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn params() {
        let p = parse_params(&["a=1.5".into(), " m = 4".into()]).unwrap();
        assert_eq!(p["a"], 1.5);
        assert_eq!(p["m"], 4.0);
        assert!(parse_params(&["a".into()]).is_err());
        assert!(parse_params(&["a=x".into()]).is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
