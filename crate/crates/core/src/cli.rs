//! `detflow` command-line front end.
//!
//! ```text
//! detflow run <scenario.json> [--output <file.csv>] [--fail-threshold <x>]
//!             [--method rk4|rkf45] [--h <x>] [--tol <x>]
//! detflow check <linalg|identities|convergence|all> [--seed <k>]
//! ```
//!
//! Exit codes: 0 success, 1 property failure, 2 integration failure,
//! 3 drift above `--fail-threshold`, 4 parse, validation or I/O error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::checks::{self, Suite};
use crate::coeffs::{CoefficientSpec, Method, Scenario, SolverConfig};
use crate::error::{LoadError, ParseError};
use crate::identity::{self, Evaluation, Sample};
use crate::linalg::Matrix;
use crate::ode::{self, Trajectory};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY_FAILURE: i32 = 1;
pub const EXIT_INTEGRATION_FAILURE: i32 = 2;
pub const EXIT_THRESHOLD: i32 = 3;
pub const EXIT_INPUT: i32 = 4;

pub const CSV_HEADER: &str = "t,det_direct,det_ode,eq5,eq6,eq2,eq4,drift_eq5,drift_eq6";

const OVERFLOW_MARKER: &str = "overflow";

// ---------------------------------------------------------------------------
// Scenario documents

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    n: usize,
    t0: f64,
    t_end: f64,
    x0: Vec<f64>,
    #[serde(default)]
    a: Option<CoeffDoc>,
    #[serde(default)]
    b: Option<CoeffDoc>,
    #[serde(default)]
    f: Option<CoeffDoc>,
    solver: SolverDoc,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum CoeffDoc {
    Zero,
    Constant {
        value: Vec<f64>,
    },
    Polynomial {
        coeffs: Vec<Vec<f64>>,
    },
    Sinusoidal {
        m0: Vec<f64>,
        m1: Vec<f64>,
        omega: f64,
        #[serde(default)]
        phi: f64,
    },
    Tabulated {
        knots: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverDoc {
    #[serde(default)]
    method: Option<MethodArg>,
    #[serde(default)]
    h: Option<f64>,
    #[serde(default)]
    tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Rk4,
    Rkf45,
}

fn field_error(field: &str, message: impl Into<String>) -> ParseError {
    ParseError::Field {
        field: field.to_owned(),
        message: message.into(),
    }
}

/// Row-major array to a matrix. The dimension is `n` when the length is
/// `n * n`, otherwise the square root of the length, leaving any mismatch
/// with `n` to scenario validation.
fn matrix_from_doc(field: &str, n: usize, elems: Vec<f64>) -> Result<Matrix, ParseError> {
    let len = elems.len();
    let dim = if len == n * n {
        n
    } else {
        let root = (len as f64).sqrt().round() as usize;
        if root * root != len {
            return Err(field_error(
                field,
                format!(
                    "{len} elements do not form a square matrix (expected {})",
                    n * n
                ),
            ));
        }
        root
    };
    Matrix::from_row_major(dim, elems).map_err(|e| field_error(field, e.to_string()))
}

fn coeff_from_doc(
    field: &str,
    n: usize,
    doc: Option<CoeffDoc>,
) -> Result<CoefficientSpec, ParseError> {
    Ok(match doc {
        None | Some(CoeffDoc::Zero) => CoefficientSpec::Zero,
        Some(CoeffDoc::Constant { value }) => {
            CoefficientSpec::Constant(matrix_from_doc(&format!("{field}.value"), n, value)?)
        }
        Some(CoeffDoc::Polynomial { coeffs }) => CoefficientSpec::Polynomial(
            coeffs
                .into_iter()
                .enumerate()
                .map(|(k, c)| matrix_from_doc(&format!("{field}.coeffs[{k}]"), n, c))
                .collect::<Result<_, _>>()?,
        ),
        Some(CoeffDoc::Sinusoidal { m0, m1, omega, phi }) => CoefficientSpec::Sinusoidal {
            offset: matrix_from_doc(&format!("{field}.m0"), n, m0)?,
            amplitude: matrix_from_doc(&format!("{field}.m1"), n, m1)?,
            omega,
            phase: phi,
        },
        Some(CoeffDoc::Tabulated { knots, values }) => CoefficientSpec::Tabulated {
            knots,
            values: values
                .into_iter()
                .enumerate()
                .map(|(k, v)| matrix_from_doc(&format!("{field}.values[{k}]"), n, v))
                .collect::<Result<_, _>>()?,
        },
    })
}

fn solver_from_doc(doc: SolverDoc) -> Result<SolverConfig, ParseError> {
    let method = doc.method.unwrap_or(match (doc.h, doc.tol) {
        (None, Some(_)) => MethodArg::Rkf45,
        _ => MethodArg::Rk4,
    });
    match method {
        MethodArg::Rk4 => doc
            .h
            .map(SolverConfig::rk4)
            .ok_or_else(|| field_error("solver.h", "rk4 needs a step size `h`")),
        MethodArg::Rkf45 => doc
            .tol
            .map(SolverConfig::rkf45)
            .ok_or_else(|| field_error("solver.tol", "rkf45 needs a tolerance `tol`")),
    }
}

/// Parses a scenario document without validating it.
pub fn parse_scenario_str(text: &str) -> Result<Scenario, ParseError> {
    let doc: ScenarioDoc = serde_json::from_str(text)?;
    let n = doc.n;
    Ok(Scenario {
        n,
        t0: doc.t0,
        t_end: doc.t_end,
        x0: matrix_from_doc("x0", n, doc.x0)?,
        a: coeff_from_doc("a", n, doc.a)?,
        b: coeff_from_doc("b", n, doc.b)?,
        f: coeff_from_doc("f", n, doc.f)?,
        solver: solver_from_doc(doc.solver)?,
        seed: doc.seed,
    })
}

/// Reads, parses and validates a scenario file.
pub fn parse_scenario(path: &Path) -> Result<Scenario, LoadError> {
    let text = fs::read_to_string(path).map_err(|source| ParseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let scenario = parse_scenario_str(&text)?;
    scenario.validate()?;
    Ok(scenario)
}

// ---------------------------------------------------------------------------
// CSV output

fn fmt_f64(v: f64) -> String {
    let mut buf = ryu::Buffer::new();
    buf.format(v).to_owned()
}

fn fmt_sample(s: Sample) -> String {
    match s {
        Sample::Value(v) => fmt_f64(v),
        Sample::Overflow => OVERFLOW_MARKER.to_owned(),
    }
}

fn fmt_drift(channel: Sample, direct: Sample) -> String {
    identity::rel_drift(channel, direct).map_or_else(|| OVERFLOW_MARKER.to_owned(), fmt_f64)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn fmt_opt_sample(v: Option<Sample>) -> String {
    v.map(fmt_sample).unwrap_or_default()
}

/// CSV time series followed by `# key=value` summary lines. Byte-identical
/// for identical inputs.
pub fn render_csv(s: &Scenario, traj: &Trajectory, eval: &Evaluation) -> String {
    let mut out = String::with_capacity(traj.len() * 160);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for k in 0..traj.len() {
        let eq6 = eval.eq6.as_ref().and_then(|e| e.values.get(k).copied());
        let fields = [
            fmt_f64(traj.times[k]),
            fmt_sample(eval.det_direct[k]),
            fmt_sample(eval.det_ode[k]),
            fmt_sample(eval.eq5[k]),
            fmt_opt_sample(eq6),
            fmt_opt_sample(eval.eq2.as_ref().map(|v| v[k])),
            fmt_opt_sample(eval.eq4.as_ref().map(|v| v[k])),
            fmt_drift(eval.eq5[k], eval.det_direct[k]),
            eq6.map(|v| fmt_drift(v, eval.det_direct[k]))
                .unwrap_or_default(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }

    let r = &eval.report;
    let t = &r.terminal;
    let summary: [(&str, String); 17] = [
        ("method", s.solver.method.name().to_owned()),
        ("grid_points", r.grid_points.to_string()),
        ("accepted_steps", traj.step_stats.accepted.to_string()),
        ("rejected_steps", traj.step_stats.rejected.to_string()),
        ("max_rel_drift_eq5", fmt_f64(r.max_rel_drift_eq5)),
        ("max_rel_drift_eq6", fmt_opt(r.max_rel_drift_eq6)),
        ("max_rel_drift_detode", fmt_f64(r.max_rel_drift_detode)),
        ("max_rel_drift_eq2", fmt_opt(r.max_rel_drift_eq2)),
        ("max_rel_drift_eq4", fmt_opt(r.max_rel_drift_eq4)),
        ("eq6_inapplicable_from", fmt_opt(r.first_noninvertible_time)),
        ("overflow_points", r.overflow_points.to_string()),
        ("terminal_det_direct", fmt_sample(t.det_direct)),
        ("terminal_det_ode", fmt_sample(t.det_ode)),
        ("terminal_eq5", fmt_sample(t.eq5)),
        ("terminal_eq6", fmt_opt_sample(t.eq6)),
        ("terminal_eq2", fmt_opt_sample(t.eq2)),
        ("terminal_eq4", fmt_opt_sample(t.eq4)),
    ];
    for (key, value) in summary {
        out.push_str("# ");
        out.push_str(key);
        out.push('=');
        out.push_str(&value);
        out.push('\n');
    }
    out
}

/// Result of integrating and evaluating one scenario.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub csv: String,
    pub trajectory: Trajectory,
    pub evaluation: Evaluation,
}

/// Integrates a validated scenario and renders its CSV.
pub fn run_scenario(s: &Scenario) -> Result<RunOutput, String> {
    let trajectory = ode::integrate(s).map_err(|e| e.to_string())?;
    let evaluation = identity::evaluate(s, &trajectory).map_err(|e| e.to_string())?;
    let csv = render_csv(s, &trajectory, &evaluation);
    Ok(RunOutput {
        csv,
        trajectory,
        evaluation,
    })
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Argument handling

#[derive(Debug, Parser)]
#[command(
    name = "detflow",
    version,
    about = "Integrate dX/dt + A(t)X + XB(t) = F(t) and check determinant identities along the solution"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a scenario file and write the determinant channels as CSV.
    Run(RunArgs),
    /// Run a seeded property suite.
    Check(CheckArgs),
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Scenario JSON file
    scenario: PathBuf,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Exit 3 when any channel drifts further than this.
    #[arg(long)]
    fail_threshold: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// RK4 step size.
    #[arg(long = "h")]
    h: Option<f64>,
    /// RKF45 tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, clap::Args)]
struct CheckArgs {
    /// linalg, identities, convergence or all.
    suite: Suite,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn report_error(err: &mut dyn Write, kind: &str, message: &str) {
    let one_line = message.replace(['\n', '\r'], " ");
    let _ = writeln!(err, "detflow: error={kind} message={one_line:?}");
}

fn apply_overrides(s: &mut Scenario, args: &RunArgs) -> Result<(), String> {
    let current = s.solver.method;
    let method = args.method.unwrap_or(match current {
        Method::Rk4 { .. } => MethodArg::Rk4,
        Method::Rkf45 { .. } => MethodArg::Rkf45,
    });
    s.solver = match method {
        MethodArg::Rk4 => {
            let h = args.h.or(match current {
                Method::Rk4 { h } => Some(h),
                Method::Rkf45 { .. } => None,
            });
            SolverConfig::rk4(h.ok_or("--method rk4 needs --h when the file has no rk4 step")?)
        }
        MethodArg::Rkf45 => {
            let tol = args.tol.or(match current {
                Method::Rkf45 { tol } => Some(tol),
                Method::Rk4 { .. } => None,
            });
            SolverConfig::rkf45(
                tol.ok_or("--method rkf45 needs --tol when the file has no rkf45 tolerance")?,
            )
        }
    };
    Ok(())
}

fn cmd_run(args: RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut scenario = match parse_scenario(&args.scenario) {
        Ok(s) => s,
        Err(e) => {
            let kind = match e {
                LoadError::Parse(_) => "parse",
                LoadError::Validation(_) => "validation",
            };
            report_error(err, kind, &e.to_string());
            return EXIT_INPUT;
        }
    };
    if let Err(msg) = apply_overrides(&mut scenario, &args) {
        report_error(err, "parse", &msg);
        return EXIT_INPUT;
    }
    if let Err(e) = scenario.validate() {
        report_error(err, "validation", &e.to_string());
        return EXIT_INPUT;
    }
    let output = match run_scenario(&scenario) {
        Ok(o) => o,
        Err(msg) => {
            report_error(err, "integration", &msg);
            return EXIT_INTEGRATION_FAILURE;
        }
    };
    let written = match &args.output {
        Some(path) => write_atomic(path, output.csv.as_bytes()),
        None => out
            .write_all(output.csv.as_bytes())
            .and_then(|_| out.flush()),
    };
    if let Err(e) = written {
        report_error(err, "io", &e.to_string());
        return EXIT_INPUT;
    }
    if let Some(threshold) = args.fail_threshold {
        let worst = output.evaluation.report.worst_drift();
        if worst > threshold {
            report_error(
                err,
                "threshold",
                &format!(
                    "max drift {} exceeds {}",
                    fmt_f64(worst),
                    fmt_f64(threshold)
                ),
            );
            return EXIT_THRESHOLD;
        }
    }
    EXIT_OK
}

fn cmd_check(args: CheckArgs, out: &mut dyn Write) -> i32 {
    let report = checks::run_suite(args.suite, args.seed);
    for r in &report.results {
        let _ = writeln!(out, "{r}");
    }
    let _ = writeln!(
        out,
        "seed={} passed={} failed={}",
        report.seed,
        report.passed_count(),
        report.failed_count()
    );
    if report.all_passed() {
        EXIT_OK
    } else {
        EXIT_PROPERTY_FAILURE
    }
}

/// Entry point with injectable streams; returns the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
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
                    report_error(err, "usage", &e.to_string());
                    EXIT_INPUT
                }
            };
        }
    };
    match cli.command {
        Command::Run(args) => cmd_run(args, out, err),
        Command::Check(args) => cmd_check(args, out),
    }
}
