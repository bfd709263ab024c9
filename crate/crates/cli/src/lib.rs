//! `scr`: space-charge-region calculations from the command line.
//!
//! ```text
//! scr verify [--cases N] [--seed S]
//! scr field --spec FILE [--bias V] [--samples N]
//! scr solve --spec FILE --bias V
//! scr cv    --spec FILE --vmin A --vmax B --points N
//! ```
//!
//! Every subcommand takes `--format csv|json` and `--out PATH`. Exit status
//! is 0 on success, 1 for physical failures (with a JSON error record on
//! stderr) and 2 for malformed input.

pub mod document;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use scr_core::charge_moment::ChargeError;
use scr_core::junction::{capacitance, cv_sweep, solve_depletion, JunctionError, JunctionSpec};
use scr_core::verify;

use document::SpecDocument;
use output::{number, optional, Table};

#[derive(Debug, Parser)]
#[command(
    name = "scr",
    version,
    about = "Space-charge-region electrostatics and junction depletion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write to this file instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the charge-moment voltage against direct Poisson integration
    /// on random regions
    Verify {
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Charge, field and potential across the depletion region
    Field {
        #[arg(long)]
        spec: PathBuf,
        /// Applied bias in V, forward positive
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        bias: f64,
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
    /// Depletion edges, residuals and capacitance at one bias
    Solve {
        #[arg(long)]
        spec: PathBuf,
        /// Applied bias in V, forward positive
        #[arg(long, allow_negative_numbers = true)]
        bias: f64,
    },
    /// Capacitance-voltage sweep
    Cv {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        vmin: f64,
        #[arg(long, allow_negative_numbers = true)]
        vmax: f64,
        #[arg(long)]
        points: usize,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("malformed spec document: {0}")]
    Document(#[from] serde_json::Error),
    #[error(transparent)]
    Junction(#[from] JunctionError),
    #[error(transparent)]
    Charge(#[from] ChargeError),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Usage(_) => "InvalidArguments",
            Self::Read { .. } => "UnreadableInput",
            Self::Write { .. } => "OutputFailure",
            Self::Document(_) => "MalformedSpec",
            Self::Junction(e) => e.code(),
            Self::Charge(_) => "ConvergenceFailure",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Junction(e) if e.is_physical() => 1,
            Self::Charge(_) | Self::Write { .. } => 1,
            _ => 2,
        }
    }

    fn limit_estimate(&self) -> Option<f64> {
        match self {
            Self::Junction(JunctionError::SurfaceReached { limit_estimate }) => *limit_estimate,
            Self::Junction(JunctionError::BiasExceedsBuiltIn { v_bi, .. }) => Some(v_bi - 1e-3),
            _ => None,
        }
    }

    /// `{"error", "detail", "limit_estimate"}` record for standard error.
    pub fn record(&self) -> String {
        let value = json!({
            "error": self.code(),
            "detail": self.to_string(),
            "limit_estimate": self.limit_estimate(),
        });
        let mut s = serde_json::to_string(&value).expect("JSON values always serialize");
        s.push('\n');
        s
    }
}

/// Runs the tool on `argv` (program name first) and returns the exit status.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                return 0;
            }
            let err = CliError::Usage(e.render().to_string().trim_end().to_owned());
            let _ = stderr.write_all(err.record().as_bytes());
            return err.exit_code();
        }
    };
    match execute(&cli) {
        Ok((text, status)) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &text).map_err(|source| CliError::Write {
                    path: path.clone(),
                    source,
                }),
                None => stdout
                    .write_all(text.as_bytes())
                    .map_err(|source| CliError::Write {
                        path: PathBuf::from("-"),
                        source,
                    }),
            };
            match written {
                Ok(()) => status,
                Err(e) => {
                    let _ = stderr.write_all(e.record().as_bytes());
                    e.exit_code()
                }
            }
        }
        Err(e) => {
            let _ = stderr.write_all(e.record().as_bytes());
            e.exit_code()
        }
    }
}

fn load(path: &Path) -> Result<(SpecDocument, JunctionSpec), CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    let doc = SpecDocument::parse(&text)?;
    let spec = doc.to_spec()?;
    Ok((doc, spec))
}

fn metadata(doc: &SpecDocument) -> Value {
    json!({ "spec": doc, "spec_si": doc.si() })
}

// Produces the whole document before anything is written.
fn execute(cli: &Cli) -> Result<(String, i32), CliError> {
    match &cli.command {
        Command::Verify { cases, seed } => run_verify(*cases, *seed, cli.format),
        Command::Field { spec, bias, samples } => {
            let (doc, spec) = load(spec)?;
            run_field(&doc, &spec, *bias, *samples, cli.format).map(|s| (s, 0))
        }
        Command::Solve { spec, bias } => {
            let (doc, spec) = load(spec)?;
            run_solve(&doc, &spec, *bias, cli.format).map(|s| (s, 0))
        }
        Command::Cv {
            spec,
            vmin,
            vmax,
            points,
        } => {
            let (doc, spec) = load(spec)?;
            run_cv(&doc, &spec, *vmin, *vmax, *points, cli.format).map(|s| (s, 0))
        }
    }
}

fn run_verify(cases: usize, seed: u64, format: Format) -> Result<(String, i32), CliError> {
    let report = verify::verify(cases, seed)?;
    let status = if report.passed() { 0 } else { 1 };
    let text = match format {
        Format::Json => {
            let mut value = serde_json::to_value(&report).expect("report serializes");
            value["passed"] = json!(report.passed());
            output::json(&value)
        }
        Format::Csv => {
            let mut t = Table::new(vec![
                "cases",
                "seed",
                "max_residual",
                "bound",
                "failures",
                "passed",
                "worst_case",
            ]);
            let worst = report
                .worst
                .as_ref()
                .map(|w| serde_json::to_string(w).expect("case serializes"))
                .unwrap_or_default();
            t.push(vec![
                report.cases.to_string(),
                report.seed.to_string(),
                number(report.max_residual),
                number(report.bound),
                report.failures.to_string(),
                report.passed().to_string(),
                worst,
            ]);
            t.to_csv()
        }
    };
    Ok((text, status))
}

fn run_field(
    doc: &SpecDocument,
    spec: &JunctionSpec,
    bias: f64,
    samples: usize,
    format: Format,
) -> Result<String, CliError> {
    let sol = solve_depletion(spec, bias)?;
    let profile = sol.region(spec)?.field_profile(samples)?;
    Ok(match format {
        Format::Json => {
            let rows: Vec<Value> = profile
                .samples()
                .iter()
                .map(|s| json!({ "x_m": s.x, "rho_Cm3": s.rho, "E_Vm": s.e, "u_V": s.u }))
                .collect();
            let mut value = metadata(doc);
            value["V_applied_V"] = json!(bias);
            value["V_bi_V"] = json!(sol.v_bi);
            value["samples"] = Value::Array(rows);
            output::json(&value)
        }
        Format::Csv => {
            let mut t = Table::new(vec!["x_m", "rho_Cm3", "E_Vm", "u_V"]);
            for s in profile.samples() {
                t.push(vec![number(s.x), number(s.rho), number(s.e), number(s.u)]);
            }
            t.to_csv()
        }
    })
}

const SOLVE_COLUMNS: [&str; 15] = [
    "V_applied_V",
    "V_bi_V",
    "x1_m",
    "x2_m",
    "W_m",
    "x_j_m",
    "E_peak_Vm",
    "Q_Cm2",
    "C_w_Fm2",
    "C_dq_Fm2",
    "residual_neutrality_Cm2",
    "neutrality_bound_Cm2",
    "residual_moment_V",
    "moment_bound_V",
    "C_dq_status",
];

fn run_solve(doc: &SpecDocument, spec: &JunctionSpec, bias: f64, format: Format) -> Result<String, CliError> {
    let sol = solve_depletion(spec, bias)?;
    // the charge-difference estimate needs bias + dV to stay solvable
    let (c_dq, c_dq_status) = match capacitance(spec, bias, None) {
        Ok(c) => (Some(c.c_dq), "ok"),
        Err(e) if e.is_physical() => (None, e.code()),
        Err(e) => return Err(e.into()),
    };
    let values = [
        Some(bias),
        Some(sol.v_bi),
        Some(sol.x1),
        Some(sol.x2),
        Some(sol.width),
        Some(sol.x_j),
        Some(sol.e_peak),
        Some(sol.charge_area),
        Some(spec.permittivity() / sol.width),
        c_dq,
        Some(sol.residual_neutrality),
        Some(sol.neutrality_bound()),
        Some(sol.residual_moment),
        Some(sol.moment_bound()),
    ];
    Ok(match format {
        Format::Json => {
            let mut value = metadata(doc);
            for (name, v) in SOLVE_COLUMNS.iter().zip(values) {
                value[*name] = json!(v);
            }
            value["C_dq_status"] = json!(c_dq_status);
            output::json(&value)
        }
        Format::Csv => {
            let mut t = Table::new(SOLVE_COLUMNS.to_vec());
            let mut row: Vec<String> = values.into_iter().map(optional).collect();
            row.push(c_dq_status.to_owned());
            t.push(row);
            t.to_csv()
        }
    })
}

fn run_cv(
    doc: &SpecDocument,
    spec: &JunctionSpec,
    vmin: f64,
    vmax: f64,
    points: usize,
    format: Format,
) -> Result<String, CliError> {
    let curve = cv_sweep(spec, vmin, vmax, points)?;
    Ok(match format {
        Format::Json => {
            let rows: Vec<Value> = curve
                .points()
                .iter()
                .map(|p| {
                    json!({
                        "V_volts": p.v,
                        "W_meters": p.width,
                        "C_Fm2": p.c_area,
                        "Q_Cm2": p.q_area,
                        "status": p.status.as_str(),
                    })
                })
                .collect();
            let mut value = metadata(doc);
            value["points"] = Value::Array(rows);
            output::json(&value)
        }
        Format::Csv => {
            let mut t = Table::new(vec!["V_volts", "W_meters", "C_Fm2", "Q_Cm2", "status"]);
            for p in curve.points() {
                t.push(vec![
                    number(p.v),
                    optional(p.width),
                    optional(p.c_area),
                    optional(p.q_area),
                    p.status.as_str().to_owned(),
                ]);
            }
            t.to_csv()
        }
    })
}
