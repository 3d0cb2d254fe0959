//! `twocenter` command-line front end.
//!
//! Exit codes: 0 on success, 1 on configuration or input errors, 2 when the
//! solver fails at one or more separations. Failed rows are still written,
//! with the failure recorded in their `status` column.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use twocenter::asymptotics::FreeConstants;
use twocenter::eigen::SolverSettings;
use twocenter::run::{self, Mode, OutputFormat, RunConfig};
use twocenter::{fixtures, report, FormulaReading, PhysicalConfig, QuantumNumbers};

#[derive(Parser, Debug)]
#[command(
    name = "twocenter",
    version,
    about = "Two-center Coulomb plus oscillator eigenvalues in spheroidal coordinates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute energies and separation constants over a range of R.
    Run(RunArgs),
    /// Summarize residual orders from one or more run outputs.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Numeric,
    Asymptotic,
    Both,
    Oracle,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Nuclear charge.
    #[arg(long = "Z", default_value_t = 1.0, allow_negative_numbers = true)]
    z: f64,
    /// Oscillator frequency.
    #[arg(long, default_value_t = 0.25)]
    omega: f64,
    #[arg(long, default_value_t = 0)]
    m: u32,
    /// Radial node count.
    #[arg(long, default_value_t = 0)]
    n: u32,
    /// Angular node count.
    #[arg(long, default_value_t = 0)]
    q: u32,
    #[arg(long = "r-min", default_value_t = 5.0)]
    r_min: f64,
    #[arg(long = "r-max", default_value_t = 40.0)]
    r_max: f64,
    #[arg(long = "r-steps", default_value_t = 8)]
    r_steps: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    mode: ModeArg,
    /// Asymptotic energy order, 0 to 2.
    #[arg(long, default_value_t = 0)]
    order: u32,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Evaluate the asymptotic formulas in their literal form (on) or in the
    /// corrected reading (off).
    #[arg(long = "literal-formulas", value_enum, default_value_t = Switch::On)]
    literal_formulas: Switch,
    /// Matching tolerance of the shooting solver.
    #[arg(long)]
    tol: Option<f64>,
    /// Solve every R independently and in parallel.
    #[arg(long = "no-continuation")]
    no_continuation: bool,
    /// Fixture file written in oracle mode.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Fine-grid points per direction in oracle mode.
    #[arg(long = "grid-points", default_value_t = 128)]
    grid_points: usize,
    /// Free constant of the angular separation-constant series.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta: f64,
    /// Free constant of the radial separation-constant series.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    delta: f64,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Run outputs in CSV or JSON.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
}

enum Failure {
    Config(anyhow::Error),
    Solver,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Config(e)
    }
}

fn run_config(a: &RunArgs) -> Result<RunConfig> {
    let template = PhysicalConfig::new(a.z, a.omega, a.r_min)?;
    let mode = match a.mode {
        ModeArg::Numeric => Mode::Numeric,
        ModeArg::Asymptotic => Mode::Asymptotic,
        ModeArg::Both => Mode::Both,
        ModeArg::Oracle => Mode::Oracle,
    };
    let mut rc = RunConfig::new(mode, template, QuantumNumbers::new(a.n, a.q, a.m), a.r_min, a.r_max, a.r_steps);
    rc.order = a.order;
    rc.format = match a.format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Json => OutputFormat::Json,
    };
    rc.reading = match a.literal_formulas {
        Switch::On => FormulaReading::Literal,
        Switch::Off => FormulaReading::Corrected,
    };
    rc.continuation = !a.no_continuation;
    rc.grid_points = a.grid_points;
    rc.constants = FreeConstants { beta: a.beta, delta: a.delta };
    if let Some(tol) = a.tol {
        let defaults = SolverSettings::default();
        rc.settings = SolverSettings { match_tol: tol, rel_tol: defaults.rel_tol.min(tol), ..defaults };
    }
    if a.fixtures.is_some() && mode != Mode::Oracle {
        anyhow::bail!("--fixtures requires --mode oracle");
    }
    rc.validate()?;
    Ok(rc)
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_run(a: &RunArgs) -> std::result::Result<(), Failure> {
    let rc = run_config(a)?;
    let out = run::run(&rc).map_err(anyhow::Error::from)?;
    emit(a.out.as_deref(), &run::render(&out, rc.format))?;
    if let Some(path) = &a.fixtures {
        let header = format!(
            "grid oracle, Z = {}, omega = {}, m = {}, {} points per direction, fine-grid energies with Richardson error estimates",
            rc.template.z, rc.template.omega, rc.qn.m, rc.grid_points
        );
        fixtures::write(path, &out.fixtures, &header).map_err(anyhow::Error::from)?;
    }
    for row in out.rows.iter().filter(|r| !r.ok()) {
        eprintln!("R = {}: {}", row.r, row.status);
    }
    if out.any_failed() {
        return Err(Failure::Solver);
    }
    Ok(())
}

fn cmd_report(a: &ReportArgs) -> Result<()> {
    let outputs = a
        .inputs
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            run::parse_output(&text).with_context(|| format!("parsing {}", p.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    let rep = report::report(&outputs)?;
    let text = match a.format {
        ReportFormat::Text => report::render_text(&rep),
        ReportFormat::Json => report::render_json(&rep),
    };
    emit(a.out.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Report(a) => cmd_report(a).map_err(Failure::Config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Solver) => ExitCode::from(2),
    }
}
