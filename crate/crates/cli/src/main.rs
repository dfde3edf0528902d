//! Command-line front end for the rate / key-rate frontier library.
//!
//! Four subcommands, all reading the same model JSON format:
//!
//! * `frontier`  — sweep a disclosure case over a tradeoff-parameter grid,
//!   one CSV row per grid point;
//! * `wyner`     — common information and the canonical correlations of the
//!   `(X, Y)` pair, as JSON;
//! * `construct` — the optimal auxiliary-channel parameters at one tradeoff
//!   value, as JSON;
//! * `verify`    — the full independent-verification suite, as a JSON report
//!   of `{check, residual, tolerance, pass}` entries.
//!
//! Results go to `--out` (standard output by default); diagnostics go to
//! standard error. Output is deterministic: rerunning a command reproduces
//! its bytes exactly. Reals are printed with twelve significant digits;
//! infinities print as `inf` / `-inf`.
//!
//! Exit codes: `0` success, `1` verification failure, `2` invalid input
//! (unreadable file, malformed JSON, inconsistent model, bad flag values),
//! `3` numerical failure inside the library.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array2;
use serde::Deserialize;
use serde_json::json;

use ratekey::region::{frontier_sweep, lambda_grid, wyner_ci, GridSpacing};
use ratekey::spectrum::{conditional_spectra, correlation_spectrum};
use ratekey::verify::{build_construction, verify_model, VerifyConfig};
use ratekey::{DisclosureCase, DisclosureChannel, GaussianModel, SymMatrix, XDisclosure};

/// Exit code for success.
const EXIT_OK: i32 = 0;
/// Exit code when a verification suite ran but some check failed.
const EXIT_VERIFICATION_FAILURE: i32 = 1;
/// Exit code for unreadable, malformed, or inconsistent input.
const EXIT_INPUT_ERROR: i32 = 2;
/// Exit code for a numerical failure inside the library.
const EXIT_NUMERICAL_ERROR: i32 = 3;

#[derive(Parser)]
#[command(
    name = "ratekey",
    version,
    about = "Rate / key-rate frontiers, common information, and verification \
             for jointly Gaussian vector sources"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a disclosure case over a tradeoff grid and emit CSV.
    Frontier(FrontierArgs),
    /// Compute common information and canonical correlations as JSON.
    Wyner(WynerArgs),
    /// Emit the optimal auxiliary construction at one tradeoff value.
    Construct(ConstructArgs),
    /// Run the verification suite and emit its JSON report.
    Verify(VerifyArgs),
}

/// Which disclosure configuration a frontier is computed for.
#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    /// Only a disclosure of X (chosen with --disclosure) reaches the
    /// eavesdropper; the frontier is a single corner point.
    #[value(name = "case1")]
    Case1,
    /// Y is fully revealed, X is not.
    #[value(name = "case2")]
    Case2,
    /// Both X and Y are fully revealed.
    #[value(name = "case3")]
    Case3,
}

/// What the eavesdropper sees of X in the first disclosure case.
#[derive(Clone, Copy, ValueEnum)]
enum DisclosureArg {
    /// Nothing about X.
    #[value(name = "empty")]
    Empty,
    /// X itself.
    #[value(name = "full")]
    Full,
    /// The model's noisy linear channel output of X.
    #[value(name = "channel")]
    Channel,
}

/// Grid spacing rule.
#[derive(Clone, Copy, ValueEnum)]
enum SpacingArg {
    /// Logarithmically spaced (needs a positive lower endpoint).
    #[value(name = "log")]
    Log,
    /// Linearly spaced.
    #[value(name = "linear")]
    Linear,
}

/// Unit the printed rates are expressed in.
#[derive(Clone, Copy, ValueEnum)]
enum UnitArg {
    /// Natural logarithm units.
    #[value(name = "nats")]
    Nats,
    /// Binary units; nats divided by ln 2.
    #[value(name = "bits")]
    Bits,
}

impl CaseArg {
    fn to_case(self, disclosure: DisclosureArg) -> DisclosureCase {
        match self {
            CaseArg::Case1 => DisclosureCase::CaseOne(match disclosure {
                DisclosureArg::Empty => XDisclosure::Empty,
                DisclosureArg::Full => XDisclosure::Full,
                DisclosureArg::Channel => XDisclosure::Channel,
            }),
            CaseArg::Case2 => DisclosureCase::CaseTwo,
            CaseArg::Case3 => DisclosureCase::CaseThree,
        }
    }

    fn name(self) -> &'static str {
        match self {
            CaseArg::Case1 => "case1",
            CaseArg::Case2 => "case2",
            CaseArg::Case3 => "case3",
        }
    }
}

impl From<SpacingArg> for GridSpacing {
    fn from(s: SpacingArg) -> GridSpacing {
        match s {
            SpacingArg::Log => GridSpacing::Log,
            SpacingArg::Linear => GridSpacing::Linear,
        }
    }
}

impl UnitArg {
    /// Converts a rate held in natural units to this unit.
    fn convert(self, nats: f64) -> f64 {
        match self {
            UnitArg::Nats => nats,
            UnitArg::Bits => nats / std::f64::consts::LN_2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            UnitArg::Nats => "nats",
            UnitArg::Bits => "bits",
        }
    }
}

/// Flags shared by every command that sweeps a tradeoff grid.
#[derive(Args)]
struct GridArgs {
    /// Lower grid endpoint.
    #[arg(long, default_value_t = 1e-3)]
    lambda_min: f64,
    /// Upper grid endpoint.
    #[arg(long, default_value_t = 1e3)]
    lambda_max: f64,
    /// Number of grid points (endpoints included).
    #[arg(long, default_value_t = 61)]
    steps: usize,
    /// Grid spacing rule.
    #[arg(long, value_enum, default_value_t = SpacingArg::Log)]
    spacing: SpacingArg,
}

impl GridArgs {
    fn build(&self) -> Result<Vec<f64>, AppError> {
        Ok(lambda_grid(
            self.lambda_min,
            self.lambda_max,
            self.steps,
            self.spacing.into(),
        )?)
    }
}

#[derive(Args)]
struct FrontierArgs {
    /// Path of the model JSON file.
    model: PathBuf,
    /// Disclosure case to sweep.
    #[arg(long, value_enum)]
    case: CaseArg,
    /// X disclosure for case1; ignored by the other cases.
    #[arg(long, value_enum, default_value_t = DisclosureArg::Empty)]
    disclosure: DisclosureArg,
    #[command(flatten)]
    grid: GridArgs,
    /// Unit of the R and R0 columns.
    #[arg(long, value_enum, default_value_t = UnitArg::Nats)]
    unit: UnitArg,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WynerArgs {
    /// Path of the model JSON file.
    model: PathBuf,
    /// Unit of the reported value.
    #[arg(long, value_enum, default_value_t = UnitArg::Nats)]
    unit: UnitArg,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConstructArgs {
    /// Path of the model JSON file.
    model: PathBuf,
    /// Disclosure case of the construction (case2 or case3).
    #[arg(long, value_enum)]
    case: CaseArg,
    /// Tradeoff parameter the construction is built at.
    #[arg(long)]
    lambda: f64,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Path of the model JSON file.
    model: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    /// Seed of the Monte Carlo sampler.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path of the JSON report; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Model description as stored on disk: dimensions, the joint covariance of
/// the stacked vector `(X, Y, U)` in row-major order, and an optional noisy
/// linear disclosure channel acting on `X`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    dims: DimsFile,
    covariance: Vec<Vec<f64>>,
    #[serde(default)]
    disclosure_channel: Option<ChannelFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DimsFile {
    x: usize,
    y: usize,
    u: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    gain: Vec<Vec<f64>>,
    noise: Vec<Vec<f64>>,
}

/// Anything that can go wrong while running a command, mapped onto the
/// process exit codes.
enum AppError {
    /// Reading the model or writing the output failed.
    Io(String, std::io::Error),
    /// The model file is not valid JSON of the expected shape.
    Json(String, serde_json::Error),
    /// The library rejected the input or failed numerically.
    Lib(ratekey::Error),
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Io(what, err) => write!(f, "{what}: {err}"),
            AppError::Json(what, err) => write!(f, "{what}: {err}"),
            AppError::Lib(err) => write!(f, "{err}"),
        }
    }
}

impl From<ratekey::Error> for AppError {
    fn from(err: ratekey::Error) -> AppError {
        AppError::Lib(err)
    }
}

impl AppError {
    fn exit_code(&self) -> i32 {
        match self {
            AppError::Io(..) | AppError::Json(..) => EXIT_INPUT_ERROR,
            AppError::Lib(err) if err.is_numerical() => EXIT_NUMERICAL_ERROR,
            AppError::Lib(_) => EXIT_INPUT_ERROR,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32, AppError> {
    match cli.command {
        Command::Frontier(args) => cmd_frontier(args),
        Command::Wyner(args) => cmd_wyner(args),
        Command::Construct(args) => cmd_construct(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

/// Reads and validates a model file, reporting the path in any failure.
fn load_model(path: &Path) -> Result<GaussianModel, AppError> {
    let shown = path.display().to_string();
    let text =
        fs::read_to_string(path).map_err(|e| AppError::Io(format!("reading {shown}"), e))?;
    let file: ModelFile =
        serde_json::from_str(&text).map_err(|e| AppError::Json(format!("parsing {shown}"), e))?;

    let joint = SymMatrix::from_rows(&file.covariance)?;
    let channel = match file.disclosure_channel {
        None => None,
        Some(c) => Some(DisclosureChannel {
            gain: rect_from_rows(&c.gain, "disclosure gain")?,
            noise: SymMatrix::from_rows(&c.noise)?,
        }),
    };
    Ok(GaussianModel::new(
        file.dims.x,
        file.dims.y,
        file.dims.u,
        joint,
        channel,
    )?)
}

/// Row-major nested lists to a rectangular matrix; rows must share a length.
fn rect_from_rows(rows: &[Vec<f64>], what: &str) -> Result<Array2<f64>, ratekey::Error> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(ratekey::Error::Model(format!(
            "{what} rows have unequal lengths"
        )));
    }
    Ok(Array2::from_shape_fn((nrows, ncols), |(i, j)| rows[i][j]))
}

/// Formats a real with twelve significant digits: plain decimal notation for
/// moderate magnitudes, scientific otherwise, trailing zeros trimmed, and
/// the literal `inf` / `-inf` / `nan` for non-finite values.
fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return (if x > 0.0 { "inf" } else { "-inf" }).into();
    }
    if x == 0.0 {
        return "0".into();
    }
    // Round to twelve significant digits first; the decimal exponent that
    // decides the notation must be the one after rounding (0.9999…9 can
    // round up into the next decade).
    let sci = format!("{x:.11e}");
    let (_, exp) = sci.split_once('e').expect("float scientific form");
    let exp: i32 = exp.parse().expect("float exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let (mant, _) = sci.split_once('e').expect("float scientific form");
        format!("{}e{exp}", trim_zeros(mant.to_string()))
    }
}

/// Drops trailing fractional zeros (and a bare trailing point).
fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// JSON value for a real: a number when finite, else the strings `inf`,
/// `-inf`, `nan`, which JSON numbers cannot carry.
fn json_real(v: f64) -> serde_json::Value {
    if v.is_nan() {
        serde_json::Value::String("nan".into())
    } else if v.is_infinite() {
        serde_json::Value::String(if v > 0.0 { "inf" } else { "-inf" }.into())
    } else {
        serde_json::Number::from_f64(v)
            .map(serde_json::Value::Number)
            .unwrap_or_else(|| serde_json::Value::String(v.to_string()))
    }
}

/// Writes `content` to the path, or to standard output when there is none.
fn write_output(path: Option<&Path>, content: &str) -> Result<(), AppError> {
    match path {
        Some(p) => fs::write(p, content)
            .map_err(|e| AppError::Io(format!("writing {}", p.display()), e)),
        None => std::io::stdout()
            .write_all(content.as_bytes())
            .map_err(|e| AppError::Io("writing standard output".into(), e)),
    }
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializing prepared JSON");
    s.push('\n');
    s
}

fn cmd_frontier(args: FrontierArgs) -> Result<i32, AppError> {
    let model = load_model(&args.model)?;
    let grid = args.grid.build()?;
    let case = args.case.to_case(args.disclosure);
    let points = frontier_sweep(&model, case, &grid)?;

    let mut out = String::from("lambda,R,R0");
    let channel_dims = points.first().map_or(0, |p| p.a.len());
    for i in 1..=channel_dims {
        out.push_str(&format!(",a_{i}"));
    }
    out.push('\n');
    for p in &points {
        out.push_str(&fmt_sig(p.lambda));
        out.push(',');
        out.push_str(&fmt_sig(args.unit.convert(p.rate)));
        out.push(',');
        out.push_str(&fmt_sig(args.unit.convert(p.key_rate)));
        for &a in &p.a {
            out.push(',');
            out.push_str(&fmt_sig(a));
        }
        out.push('\n');
    }
    write_output(args.out.as_deref(), &out)?;
    Ok(EXIT_OK)
}

fn cmd_wyner(args: WynerArgs) -> Result<i32, AppError> {
    let model = load_model(&args.model)?;
    let (sx, sy, sxy) = (model.sigma_x(), model.sigma_y(), model.sigma_xy());
    let value = args.unit.convert(wyner_ci(&sx, &sy, &sxy)?);
    let rho = correlation_spectrum(&sx, &sy, &sxy)?.rho;
    let doc = json!({
        "wyner_ci": json_real(value),
        "unit": args.unit.name(),
        "rho": rho,
    });
    write_output(args.out.as_deref(), &pretty(&doc))?;
    Ok(EXIT_OK)
}

fn cmd_construct(args: ConstructArgs) -> Result<i32, AppError> {
    let model = load_model(&args.model)?;
    // The construction lives on the conditional spectrum of (X, Y) given U,
    // matching what a frontier sweep evaluates.
    let (_, rho_cond) = conditional_spectra(&model)?;
    let case = args.case.to_case(DisclosureArg::Empty);
    let construction = build_construction(&rho_cond, args.lambda, case)?;
    let joint: Vec<Vec<f64>> = construction
        .joint()
        .as_array()
        .rows()
        .into_iter()
        .map(|r| r.to_vec())
        .collect();
    let doc = json!({
        "case": args.case.name(),
        "lambda": json_real(args.lambda),
        "rho": construction.rho(),
        "a": construction.a(),
        "b": construction.b(),
        "joint": joint,
    });
    write_output(args.out.as_deref(), &pretty(&doc))?;
    Ok(EXIT_OK)
}

fn cmd_verify(args: VerifyArgs) -> Result<i32, AppError> {
    let model = load_model(&args.model)?;
    let config = VerifyConfig {
        lambda_grid: args.grid.build()?,
        seed: args.seed,
        ..VerifyConfig::default()
    };
    let report = verify_model(&model, &config)?;
    write_output(args.out.as_deref(), &pretty(&report.to_json()))?;
    if report.all_pass() {
        Ok(EXIT_OK)
    } else {
        for failure in report.failures() {
            eprintln!(
                "check failed: {} (residual {}, tolerance {})",
                failure.check,
                fmt_sig(failure.residual),
                fmt_sig(failure.tolerance)
            );
        }
        Ok(EXIT_VERIFICATION_FAILURE)
    }
}
