use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bottleneck::record::write_record;
use bottleneck::study::{converge, horizon_within_bound, StudySpec};
use bottleneck::validate::{validate_suite, Mutation, ValidateOptions};
use bottleneck::{builtin, gof, parse_scenario, wft, Error, RunRecord, Scenario};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

/// Moving-bottleneck traffic solvers.
#[derive(Parser, Debug)]
#[command(name = "bottleneck", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario and write trajectory, density, diagnostics and summary files.
    Run(RunArgs),
    /// Refinement study or cross-solver comparison.
    Converge(ConvergeArgs),
    /// Property suite over randomized scenarios.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
#[group(id = "source", required = true, multiple = false)]
struct Source {
    /// Built-in scenario (fig5 … fig9).
    #[arg(long, group = "source")]
    builtin: Option<String>,
    /// Scenario JSON file.
    #[arg(long, group = "source")]
    scenario: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Overrides {
    /// Cell size (GOF grid, and the probe grid of WFT snapshots).
    #[arg(long)]
    dx: Option<f64>,
    /// Time step: the GOF step, or the WFT splitting window with `--solver wft`.
    #[arg(long)]
    dt: Option<f64>,
    /// WFT refinement level.
    #[arg(long)]
    nu: Option<u32>,
    /// Final time.
    #[arg(long = "T")]
    horizon: Option<f64>,
    /// Snapshot every N steps.
    #[arg(long)]
    stride: Option<usize>,
    /// CFL safety factor when the GOF step is automatic.
    #[arg(long)]
    safety: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Solver {
    Gof,
    GofSplit,
    Wft,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Precision {
    F64,
    F32,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long, value_enum, default_value = "gof")]
    solver: Solver,
    #[arg(long, value_enum, default_value = "f64")]
    precision: Precision,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Study {
    Wft,
    Gof,
    Cross,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long, value_enum, default_value = "wft")]
    study: Study,
    /// Comma-separated refinement levels for `--study wft`.
    #[arg(long, value_delimiter = ',', default_value = "4,5,6,7,8,9")]
    ladder_nu: Vec<u32>,
    /// Comma-separated cell sizes for `--study gof`, coarse to fine.
    #[arg(long, value_delimiter = ',', default_value = "0.04,0.02,0.01")]
    ladder_dx: Vec<f64>,
    /// Pass threshold; the study's default when omitted.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Shorten T to just below the speed-separation horizon.
    #[arg(long)]
    within_horizon: bool,
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MutationArg {
    FluxSignFlip,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Samples for the pointwise properties.
    #[arg(long, default_value_t = 10_000)]
    cases: usize,
    /// Random GOF scenarios.
    #[arg(long, default_value_t = 100)]
    scenarios: usize,
    /// Steps per random GOF scenario.
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    /// Random WFT runs for the TV budget.
    #[arg(long, default_value_t = 12)]
    wft_runs: usize,
    /// Pin the GOF step of every generated scenario.
    #[arg(long)]
    dt: Option<f64>,
    /// Inject a known defect.
    #[arg(long, value_enum)]
    mutation: Option<MutationArg>,
    /// Also write the results to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure carried to `main`: exit code plus the error document.
struct Failure {
    code: u8,
    kind: String,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_configuration() {
                EXIT_CONFIG
            } else {
                EXIT_RUNTIME
            },
            kind: e.kind().into(),
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_RUNTIME,
        kind: "io".into(),
        message: format!("{}: {e}", path.display()),
    }
}

fn load(src: &Source) -> Result<Scenario, Failure> {
    match (&src.builtin, &src.scenario) {
        (Some(name), _) => Ok(builtin(name)?),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Failure {
                code: EXIT_CONFIG,
                kind: "io".into(),
                message: format!("{}: {e}", path.display()),
            })?;
            Ok(parse_scenario(&text)?)
        }
        (None, None) => unreachable!("clap requires a source"),
    }
}

fn apply(mut s: Scenario, o: &Overrides, wft_step: bool) -> Result<Scenario, Failure> {
    if let Some(dx) = o.dx {
        s.numerics.dx = dx;
    }
    if let Some(dt) = o.dt {
        if wft_step {
            s.numerics.wft_dt = Some(dt);
        } else {
            s.numerics.dt = Some(dt);
        }
    }
    if let Some(nu) = o.nu {
        s.numerics.nu = nu;
    }
    if let Some(t) = o.horizon {
        s.horizon = t;
    }
    if let Some(n) = o.stride {
        s.numerics.stride = n;
    }
    if let Some(k) = o.safety {
        s.numerics.safety = k;
    }
    s.validate()?;
    Ok(s)
}

fn emit(doc: &Value, out: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(doc).expect("json");
    text.push('\n');
    print!("{text}");
    if let Some(path) = out {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
        }
        fs::write(path, text).map_err(|e| io_failure(path, e))?;
    }
    Ok(())
}

fn cmd_run(a: &RunArgs) -> Result<u8, Failure> {
    let s = apply(load(&a.source)?, &a.overrides, a.solver == Solver::Wft)?;
    let record: RunRecord = match (a.solver, a.precision) {
        (Solver::Gof, Precision::F64) => gof::run::<f64>(&s, gof::Scheme::Conservative)?,
        (Solver::Gof, Precision::F32) => gof::run::<f32>(&s, gof::Scheme::Conservative)?,
        (Solver::GofSplit, Precision::F64) => gof::run::<f64>(&s, gof::Scheme::Split)?,
        (Solver::GofSplit, Precision::F32) => gof::run::<f32>(&s, gof::Scheme::Split)?,
        (Solver::Wft, Precision::F64) => wft::run_wft::<f64>(&s)?,
        (Solver::Wft, Precision::F32) => wft::run_wft::<f32>(&s)?,
    };
    write_record(&a.out, &s, &record)?;
    let m = &record.summary;
    let doc = json!({
        "scenario": s.name,
        "solver": m.solver,
        "out": a.out.display().to_string(),
        "steps": m.steps,
        "dt": m.dt,
        "completed": m.completed,
        "mass_drift_max": m.mass_drift_max,
        "min_gap": m.min_gap,
        "events": m.events.len(),
        "warnings": m.warnings,
    });
    emit(&doc, None)?;
    Ok(0)
}

fn cmd_converge(a: &ConvergeArgs) -> Result<u8, Failure> {
    let mut s = apply(load(&a.source)?, &a.overrides, a.study == Study::Wft)?;
    if a.within_horizon {
        s.horizon = horizon_within_bound(&s)?;
    }
    let mut spec = match a.study {
        Study::Wft => StudySpec::wft_refinement(s, a.ladder_nu.clone()),
        Study::Gof => StudySpec::gof_refinement(s, a.ladder_dx.clone()),
        Study::Cross => StudySpec::cross_validate(s),
    };
    if let Some(t) = a.tolerance {
        spec.tolerance = t;
    }
    let report = converge(&spec)?;
    emit(&serde_json::to_value(&report).expect("json"), a.out.as_deref())?;
    Ok(if report.error.is_some() {
        EXIT_RUNTIME
    } else if report.pass {
        0
    } else {
        EXIT_VALIDATION
    })
}

fn cmd_validate(a: &ValidateArgs) -> Result<u8, Failure> {
    let opts = ValidateOptions {
        seed: a.seed,
        cases: a.cases,
        scenarios: a.scenarios,
        steps: a.steps,
        wft_runs: a.wft_runs,
        dt: a.dt,
        mutation: a.mutation.map(|m| match m {
            MutationArg::FluxSignFlip => Mutation::FluxSignFlip,
        }),
    };
    let results = validate_suite(&opts)?;
    let pass = results.iter().all(|r| r.passed);
    emit(&json!({ "pass": pass, "properties": results }), a.out.as_deref())?;
    Ok(if pass { 0 } else { EXIT_VALIDATION })
}

fn fail(f: &Failure) -> ExitCode {
    let doc = json!({ "error": { "kind": f.kind, "message": f.message, "exit_code": f.code } });
    eprintln!("{doc}");
    ExitCode::from(f.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            return fail(&Failure {
                code: EXIT_CONFIG,
                kind: "usage".into(),
                message: message.trim_end().into(),
            });
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Converge(a) => cmd_converge(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => fail(&f),
    }
}
