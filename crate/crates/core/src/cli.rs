//! Command-line driver: load a spec, autonomize, analyze, integrate, report.
//!
//! Exit codes: 0 success, 1 I/O or schema errors, 2 inconsistent system,
//! 3 iteration limit or rank drift, 4 initial point off the final manifold,
//! 5 trajectory check failed.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::autonomize::{
    autonomize_first_order, second_order_reduce, to_autonomous, AutonomizeError, JetField, Mode,
};
use crate::engine::{run_constraint_algorithm, AnalysisResult, EngineOptions, Status};
use crate::integrate::{integrate, IntegrateError, IntegrateOptions, Trajectory};
use crate::report::{status_name, AnalysisReport, Fixed};
use crate::system::{
    check_solution_samples, load_system, to_document, LoadedSystem, SpecDocument,
};

pub const SEED_ENV: &str = "SINGULAR_FLOW_SEED";

#[derive(Debug, Parser)]
#[command(name = "singular-flow", version, about = "Constraint analysis and integration of linearly singular systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the constraint algorithm and write a JSON report.
    Analyze(AnalyzeArgs),
    /// Analyze, then integrate the solution field and write a CSV trajectory.
    Integrate(IntegrateArgs),
    /// Write the autonomous form of a time-dependent system as a spec.
    Homogenize(HomogenizeArgs),
    /// Check a CSV trajectory against a system.
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum ModeArg {
    VectorHull,
    JetField,
}

#[derive(Debug, Args)]
struct ModeArgs {
    #[arg(long, value_enum, default_value = "jet_field")]
    mode: ModeArg,
    /// Jet field components; defaults to the spec's `jet_field`, else zero.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    gamma: Option<Vec<String>>,
}

#[derive(Debug, Args)]
struct AnalysisArgs {
    spec: PathBuf,
    /// Seed point in the autonomous chart; repeatable.
    #[arg(long = "seed", value_delimiter = ',', num_args = 1, action = clap::ArgAction::Append, allow_hyphen_values = true)]
    seeds: Vec<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    rank_tol: Option<f64>,
    #[arg(long)]
    max_levels: Option<usize>,
    #[command(flatten)]
    mode: ModeArgs,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    analysis: AnalysisArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct IntegrateArgs {
    #[command(flatten)]
    analysis: AnalysisArgs,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    x0: Vec<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t0: f64,
    #[arg(long, allow_hyphen_values = true)]
    t1: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 10)]
    project_every: usize,
    /// Largest `max |φ(x0)|` accepted; the start point is then projected.
    #[arg(long, default_value_t = 1e-6)]
    start_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct HomogenizeArgs {
    spec: PathBuf,
    #[command(flatten)]
    mode: ModeArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    spec: PathBuf,
    #[arg(long)]
    traj: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn fail(code: i32, message: impl ToString) -> Failure {
    Failure {
        code,
        message: message.to_string(),
    }
}

fn io_fail(path: &Path, e: std::io::Error) -> Failure {
    fail(1, format!("{}: {e}", path.display()))
}

pub fn status_code(status: &Status) -> i32 {
    match status {
        Status::Solved => 0,
        Status::Inconsistent { .. } => 2,
        Status::MaxIterations | Status::RankDrift => 3,
    }
}

fn read_spec(path: &Path) -> Result<(SpecDocument, LoadedSystem), Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_fail(path, e))?;
    let doc = SpecDocument::from_json(&text).map_err(|e| fail(1, format!("{}: {e}", path.display())))?;
    let sys = load_system(&doc).map_err(|e| fail(1, format!("{}: {e}", path.display())))?;
    Ok((doc, sys))
}

fn mode(args: &ModeArgs, doc: &SpecDocument, sys: &LoadedSystem) -> Result<Mode, Failure> {
    if args.mode == ModeArg::VectorHull {
        return Ok(Mode::VectorHull);
    }
    let Some(texts) = args.gamma.as_ref().or(doc.jet_field.as_ref()) else {
        return Ok(Mode::JetField(None));
    };
    let chart = match sys {
        LoadedSystem::LinearlySingular(s) => &s.chart,
        LoadedSystem::SecondOrder(s) => &s.chart,
        _ => return Err(fail(1, "a jet field applies only to linearly_singular and second_order systems")),
    };
    Ok(Mode::JetField(Some(JetField::parse(chart, texts).map_err(|e| fail(1, e))?)))
}

fn seed_from_env() -> Result<u64, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| fail(1, format!("{SEED_ENV} must be an unsigned integer, got `{v}`"))),
        Err(_) => Ok(EngineOptions::default().rng_seed),
    }
}

fn parse_seed(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| fail(1, format!("seed value `{v}` is not a number"))))
        .collect()
}

fn analyze(args: &AnalysisArgs) -> Result<(SpecDocument, LoadedSystem, AnalysisResult), Failure> {
    let (doc, sys) = read_spec(&args.spec)?;
    let mode = mode(&args.mode, &doc, &sys)?;
    let auto = to_autonomous(&sys, &mode).map_err(|e| fail(1, e))?;
    let mut opts = EngineOptions {
        rng_seed: seed_from_env()?,
        max_levels: args.max_levels,
        ..EngineOptions::default()
    };
    if let Some(t) = args.tol {
        opts.tol = t;
    }
    if let Some(t) = args.rank_tol {
        opts.rank_tol = t;
    }
    if !(opts.tol > 0.0) || !(opts.rank_tol > 0.0) {
        return Err(fail(1, "tolerances must be positive"));
    }
    // clap splits each --seed on commas, so regroup by dimension
    let dim = auto.dim();
    let seeds: Vec<Vec<f64>> = if !args.seeds.is_empty() {
        let flat = parse_seed(&args.seeds.join(","))?;
        if flat.len() % dim != 0 {
            return Err(fail(1, format!("seeds need {dim} coordinates each ({})", auto.state_names().join(", "))));
        }
        flat.chunks(dim).map(<[f64]>::to_vec).collect()
    } else if let Some(s) = &doc.seeds {
        s.clone()
    } else {
        vec![(0..dim).map(|i| 0.1 * (i + 1) as f64).collect()]
    };
    let result = run_constraint_algorithm(auto, &seeds, &opts).map_err(|e| fail(1, e))?;
    Ok((doc, sys, result))
}

fn write_output(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_fail(p, e)),
        None => out.write_all(text.as_bytes()).map_err(|e| fail(1, e)),
    }
}

fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let (_, _, result) = analyze(&args.analysis)?;
    let mut json = AnalysisReport::new(&result).to_json();
    json.push('\n');
    write_output(args.out.as_deref(), &json, out)?;
    let _ = writeln!(
        err,
        "status {}, {} levels, gauge dimension {}",
        status_name(&result.status),
        result.levels.len(),
        result.gauge_dimension
    );
    Ok(status_code(&result.status))
}

fn cmd_integrate(args: &IntegrateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let (_, _, result) = analyze(&args.analysis)?;
    if result.status != Status::Solved {
        return Err(fail(
            status_code(&result.status),
            format!("analysis ended with status {}", status_name(&result.status)),
        ));
    }
    let opts = IntegrateOptions {
        dt: args.dt,
        project_every: args.project_every,
        start_tol: args.start_tol,
    };
    let traj = integrate(&result, &args.x0, (args.t0, args.t1), &opts).map_err(|e| match e {
        IntegrateError::OffManifold { .. } => fail(4, e),
        IntegrateError::Dimension { .. } => fail(1, format!("{e} ({})", result.state_names.join(", "))),
        e => fail(1, e),
    })?;
    let mut csv = Vec::new();
    traj.write_csv(&mut csv).map_err(|e| fail(1, e))?;
    write_output(args.out.as_deref(), &String::from_utf8_lossy(&csv), out)?;
    let _ = writeln!(err, "{} samples, max drift {:e}", traj.len(), traj.max_drift());
    Ok(0)
}

fn cmd_homogenize(args: &HomogenizeArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let (doc, sys) = read_spec(&args.spec)?;
    let mode = mode(&args.mode, &doc, &sys)?;
    let auto = match &sys {
        LoadedSystem::LinearlySingular(s) => autonomize_first_order(s, &mode),
        LoadedSystem::SecondOrder(s) => second_order_reduce(s, &mode),
        _ => {
            return Err(fail(
                1,
                "homogenize takes linearly_singular or second_order systems",
            ))
        }
    };
    let auto = match auto {
        Ok(a) => a,
        Err(AutonomizeError::AlreadyAutonomous) => {
            return Err(fail(1, "system is already autonomous; nothing to do"))
        }
        Err(e) => return Err(fail(1, e)),
    };
    let mut result = to_document(&LoadedSystem::LinearlySingular(auto));
    result.seeds = doc.seeds.clone();
    let mut json = result.to_json();
    json.push('\n');
    write_output(args.out.as_deref(), &json, out)?;
    Ok(0)
}

#[derive(Serialize)]
struct CheckSample {
    index: usize,
    time: Fixed,
    residual: Fixed,
    pass: bool,
}

#[derive(Serialize)]
struct CheckOutput {
    passed: bool,
    tol: Fixed,
    max_residual: Fixed,
    samples: Vec<CheckSample>,
}

fn cmd_check(args: &CheckArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let (doc, sys) = read_spec(&args.spec)?;
    let file = fs::File::open(&args.traj).map_err(|e| io_fail(&args.traj, e))?;
    let traj = Trajectory::read_csv(file, &doc.time_variable)
        .map_err(|e| fail(1, format!("{}: {e}", args.traj.display())))?;
    let report = check_solution_samples(&sys, &traj, args.tol).map_err(|e| fail(1, e))?;
    let output = CheckOutput {
        passed: report.passed(),
        tol: Fixed(report.tol),
        max_residual: Fixed(report.max_residual()),
        samples: report
            .samples
            .iter()
            .map(|s| CheckSample {
                index: s.index,
                time: Fixed(s.time),
                residual: Fixed(s.residual),
                pass: s.pass,
            })
            .collect(),
    };
    let mut json = serde_json::to_string_pretty(&output).map_err(|e| fail(1, e))?;
    json.push('\n');
    write_output(args.out.as_deref(), &json, out)?;
    let failed = report.samples.iter().filter(|s| !s.pass).count();
    let _ = writeln!(err, "{failed} of {} samples above {:e}", report.samples.len(), report.tol);
    Ok(if report.passed() { 0 } else { 5 })
}

/// Parses `args` (including the program name) and runs one command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 1;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    let outcome = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a, out, err),
        Command::Integrate(a) => cmd_integrate(a, out, err),
        Command::Homogenize(a) => cmd_homogenize(a, out),
        Command::Check(a) => cmd_check(a, out, err),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
