//! Energy-curve runs over a grid of separations and their CSV/JSON output.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{energy_asym, lambda_eta_asym, lambda_xi_asym, FreeConstants};
use crate::eigen::{energy_curve, solve_state_seeded, Eigensolution, SolverSettings};
use crate::error::{Error, Result};
use crate::fixtures::{self, Fixture};
use crate::oracle::{solve_grid, GridSpec};
use crate::params::{PhysicalConfig, QuantumNumbers, ScaledParams};
use crate::FormulaReading;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Numeric,
    Asymptotic,
    Both,
    Oracle,
}

impl Mode {
    fn numeric(self) -> bool {
        matches!(self, Mode::Numeric | Mode::Both | Mode::Oracle)
    }
    fn asymptotic(self) -> bool {
        matches!(self, Mode::Asymptotic | Mode::Both)
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "numeric" => Ok(Mode::Numeric),
            "asymptotic" => Ok(Mode::Asymptotic),
            "both" => Ok(Mode::Both),
            "oracle" => Ok(Mode::Oracle),
            _ => Err(Error::InvalidConfig(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::InvalidConfig(format!("unknown format {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub template: PhysicalConfig,
    pub qn: QuantumNumbers,
    pub r_min: f64,
    pub r_max: f64,
    pub r_steps: usize,
    /// Asymptotic energy order, 0 to 2.
    pub order: u32,
    pub format: OutputFormat,
    pub reading: FormulaReading,
    pub settings: SolverSettings,
    pub continuation: bool,
    pub constants: FreeConstants,
    /// Fine-grid points per direction in oracle mode.
    pub grid_points: usize,
}

impl RunConfig {
    pub fn new(
        mode: Mode,
        template: PhysicalConfig,
        qn: QuantumNumbers,
        r_min: f64,
        r_max: f64,
        r_steps: usize,
    ) -> Self {
        RunConfig {
            mode,
            template,
            qn,
            r_min,
            r_max,
            r_steps,
            order: 0,
            format: OutputFormat::Csv,
            reading: FormulaReading::Literal,
            settings: SolverSettings::default(),
            continuation: true,
            constants: FreeConstants::default(),
            grid_points: 128,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0) || !(self.r_max >= self.r_min) || self.r_steps < 1 || !self.r_max.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "need 0 < r-min <= r-max and r-steps >= 1, got {}..{} in {} steps",
                self.r_min, self.r_max, self.r_steps
            )));
        }
        if self.order > 2 {
            return Err(Error::InvalidConfig(format!("order must be 0, 1 or 2, got {}", self.order)));
        }
        if !self.template.is_confined() {
            return Err(Error::InvalidConfig("omega must be positive".into()));
        }
        if self.mode == Mode::Oracle && self.grid_points < 32 {
            return Err(Error::InvalidConfig("oracle grids need at least 32 points per direction".into()));
        }
        self.settings.validate()
    }

    pub fn r_grid(&self) -> Vec<f64> {
        if self.r_steps == 1 {
            return vec![self.r_min];
        }
        let span = self.r_max - self.r_min;
        (0..self.r_steps)
            .map(|i| {
                if i + 1 == self.r_steps {
                    self.r_max
                } else {
                    self.r_min + span * i as f64 / (self.r_steps - 1) as f64
                }
            })
            .collect()
    }

    pub fn metadata(&self) -> RunMetadata {
        RunMetadata {
            mode: self.mode,
            z: self.template.z,
            omega: self.template.omega,
            n: self.qn.n,
            q: self.qn.q,
            m: self.qn.m,
            order: self.order,
            reading: self.reading,
            beta: self.constants.beta,
            delta: self.constants.delta,
            match_tol: self.settings.match_tol,
            rel_tol: self.settings.rel_tol,
        }
    }
}

/// Run parameters recorded alongside the rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub mode: Mode,
    pub z: f64,
    pub omega: f64,
    pub n: u32,
    pub q: u32,
    pub m: u32,
    pub order: u32,
    pub reading: FormulaReading,
    pub beta: f64,
    pub delta: f64,
    pub match_tol: f64,
    pub rel_tol: f64,
}

impl RunMetadata {
    pub fn qn(&self) -> QuantumNumbers {
        QuantumNumbers::new(self.n, self.q, self.m)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Row {
    pub r: f64,
    pub e_numeric: Option<f64>,
    pub lambda_numeric: Option<f64>,
    pub e_asym: Option<f64>,
    pub lambda_eta_asym: Option<f64>,
    pub lambda_xi_asym: Option<f64>,
    pub resid_e: Option<f64>,
    pub resid_lambda: Option<f64>,
    pub nodes_radial: Option<u32>,
    pub nodes_angular: Option<u32>,
    pub solver_iterations: Option<usize>,
    /// `ok`, or a failure marker.
    pub status: String,
    pub e_grid: Option<f64>,
    pub grid_error: Option<f64>,
    /// Radial residual is limited by energy resolution.
    #[serde(default)]
    pub at_floor: bool,
}

impl Row {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub metadata: RunMetadata,
    pub rows: Vec<Row>,
    /// Oracle fixtures produced in oracle mode.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fixtures: Vec<Fixture>,
}

impl RunOutput {
    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(|r| !r.ok())
    }
}

fn failure_marker(e: &Error) -> String {
    let msg: String = e.to_string().chars().map(|c| if c == ',' || c == '\n' || c == '"' { ';' } else { c }).collect();
    format!("failed: {msg}")
}

pub fn run(rc: &RunConfig) -> Result<RunOutput> {
    rc.validate()?;
    let grid = rc.r_grid();
    let configs: Vec<PhysicalConfig> = grid.iter().map(|&r| rc.template.with_distance(r)).collect::<Result<_>>()?;

    let numeric: Vec<Option<Result<Eigensolution>>> = if !rc.mode.numeric() {
        vec![None; grid.len()]
    } else if rc.continuation && rc.mode != Mode::Oracle {
        energy_curve(rc.qn, &rc.template, &grid, &rc.settings)?.into_iter().map(|p| Some(p.result)).collect()
    } else {
        configs.par_iter().map(|c| Some(solve_state_seeded(rc.qn, c, &rc.settings, None, None))).collect()
    };

    let oracle: Vec<Option<Result<OraclePoint>>> = if rc.mode == Mode::Oracle {
        configs.par_iter().map(|c| Some(oracle_point(rc, c))).collect()
    } else {
        vec![None; grid.len()]
    };

    let mut rows = Vec::with_capacity(grid.len());
    let mut all_fixtures = Vec::new();
    for ((config, num), orc) in configs.iter().zip(numeric).zip(oracle) {
        let mut row = Row { r: config.r, status: "ok".into(), ..Default::default() };
        let mut energy_for_asym = None;
        match num {
            Some(Ok(sol)) => {
                row.e_numeric = Some(sol.energy);
                row.lambda_numeric = sol.lambda;
                row.nodes_radial = Some(sol.nodes_radial);
                row.nodes_angular = Some(sol.nodes_angular);
                row.solver_iterations = Some(sol.iterations.outer);
                row.at_floor = sol.residuals.radial > 0.1 * rc.settings.match_tol && sol.residuals.at_floor();
                energy_for_asym = Some(sol.energy);
            }
            Some(Err(e)) => row.status = failure_marker(&e),
            None => {}
        }
        if rc.mode.asymptotic() {
            match energy_asym(rc.qn, config, rc.order) {
                Ok(e) => {
                    row.e_asym = Some(e);
                    energy_for_asym.get_or_insert(e);
                }
                Err(e) if row.ok() => row.status = failure_marker(&e),
                Err(_) => {}
            }
            if let Some(sp) = energy_for_asym.and_then(|e| ScaledParams::new(config, e).ok()) {
                row.lambda_eta_asym = Some(lambda_eta_asym(rc.qn, &sp, rc.constants.beta).value);
                row.lambda_xi_asym = Some(lambda_xi_asym(rc.qn, &sp, rc.constants.delta).value);
            }
            if let (Some(a), Some(b)) = (row.e_numeric, row.e_asym) {
                row.resid_e = Some((a - b).abs());
            }
            if let (Some(a), Some(b)) = (row.lambda_numeric, row.lambda_eta_asym) {
                row.resid_lambda = Some((a - b).abs());
            }
        }
        match orc {
            Some(Ok((e, err, fx))) => {
                row.e_grid = Some(e);
                row.grid_error = Some(err);
                all_fixtures.extend(fx);
            }
            Some(Err(e)) if row.ok() => row.status = failure_marker(&e),
            _ => {}
        }
        rows.push(row);
    }
    Ok(RunOutput { metadata: rc.metadata(), rows, fixtures: all_fixtures })
}

/// Grid energy, its error estimate and the block's fixtures.
type OraclePoint = (f64, f64, Vec<Fixture>);

/// Grid energy of `rc.qn` at one separation, located by its rank among the
/// shooting energies of the same m-block.
fn oracle_point(rc: &RunConfig, config: &PhysicalConfig) -> Result<OraclePoint> {
    let rank = rank_in_block(rc.qn, config, &rc.settings)?;
    let spec = GridSpec::for_config(config, rc.qn.principal() + 2, rc.grid_points, rc.grid_points)?;
    let sol = solve_grid(config, rc.qn.m, &spec, (rank + 1).max(2))?;
    Ok((sol.energies[rank], sol.grid_error[rank], fixtures::from_grid(config, rc.qn.m, &sol)))
}

/// Position of `qn` in the energy-ordered list of states with the same m.
pub fn rank_in_block(qn: QuantumNumbers, config: &PhysicalConfig, st: &SolverSettings) -> Result<usize> {
    let target = solve_state_seeded(qn, config, st, None, None)?.energy;
    let reach = qn.n + qn.q + 2;
    let mut below = 0;
    for n in 0..=reach {
        for q in 0..=(2 * reach) {
            if (n, q) == (qn.n, qn.q) {
                continue;
            }
            let other = QuantumNumbers::new(n, q, qn.m);
            if let Ok(s) = solve_state_seeded(other, config, st, None, None) {
                if s.energy < target {
                    below += 1;
                }
            }
        }
    }
    Ok(below)
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

pub const CSV_COLUMNS: [&str; 15] = [
    "R",
    "E_numeric",
    "lambda_numeric",
    "E_asym",
    "lambda_eta_asym",
    "lambda_xi_asym",
    "resid_E",
    "resid_lambda",
    "nodes_radial",
    "nodes_angular",
    "solver_iterations",
    "status",
    "E_grid",
    "grid_error",
    "at_floor",
];

const META_PREFIX: &str = "# meta ";

/// 17 significant digits, enough to round-trip any double.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_f(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn opt_u<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn to_csv(out: &RunOutput) -> String {
    let mut s = String::new();
    let meta = serde_json::to_string(&out.metadata).expect("metadata serializes");
    let _ = writeln!(s, "{META_PREFIX}{meta}");
    let _ = writeln!(s, "{}", CSV_COLUMNS.join(","));
    for r in &out.rows {
        let fields = [
            fmt_f64(r.r),
            opt_f(r.e_numeric),
            opt_f(r.lambda_numeric),
            opt_f(r.e_asym),
            opt_f(r.lambda_eta_asym),
            opt_f(r.lambda_xi_asym),
            opt_f(r.resid_e),
            opt_f(r.resid_lambda),
            opt_u(r.nodes_radial),
            opt_u(r.nodes_angular),
            opt_u(r.solver_iterations),
            r.status.clone(),
            opt_f(r.e_grid),
            opt_f(r.grid_error),
            r.at_floor.to_string(),
        ];
        let _ = writeln!(s, "{}", fields.join(","));
    }
    s
}

pub fn to_json(out: &RunOutput) -> String {
    serde_json::to_string_pretty(out).expect("run output serializes")
}

pub fn render(out: &RunOutput, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => to_csv(out),
        OutputFormat::Json => to_json(out),
    }
}

fn parse_opt<T: FromStr>(tok: &str, name: &str, line: usize) -> Result<Option<T>> {
    if tok.is_empty() {
        return Ok(None);
    }
    tok.parse().map(Some).map_err(|_| Error::Parse { line, message: format!("invalid {name} {tok:?}") })
}

/// Read CSV written by [`to_csv`]. Columns are matched by header name, so
/// extra columns are ignored and missing optional ones read as empty.
pub fn from_csv(text: &str) -> Result<RunOutput> {
    let mut metadata = None;
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        if let Some(meta) = raw.strip_prefix(META_PREFIX) {
            let m: RunMetadata =
                serde_json::from_str(meta).map_err(|e| Error::Parse { line, message: format!("bad metadata: {e}") })?;
            metadata = Some(m);
            continue;
        }
        if raw.starts_with('#') || raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        let Some(cols) = &header else {
            if !fields.contains(&"R") {
                return Err(Error::Parse { line, message: "header lacks an R column".into() });
            }
            header = Some(fields.iter().map(|s| s.to_string()).collect());
            continue;
        };
        if fields.len() != cols.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", cols.len(), fields.len()),
            });
        }
        let get = |name: &str| cols.iter().position(|c| c == name).map(|i| fields[i]).unwrap_or("");
        let r: f64 = parse_opt(get("R"), "R", line)?.ok_or(Error::Parse { line, message: "missing R".into() })?;
        rows.push(Row {
            r,
            e_numeric: parse_opt(get("E_numeric"), "E_numeric", line)?,
            lambda_numeric: parse_opt(get("lambda_numeric"), "lambda_numeric", line)?,
            e_asym: parse_opt(get("E_asym"), "E_asym", line)?,
            lambda_eta_asym: parse_opt(get("lambda_eta_asym"), "lambda_eta_asym", line)?,
            lambda_xi_asym: parse_opt(get("lambda_xi_asym"), "lambda_xi_asym", line)?,
            resid_e: parse_opt(get("resid_E"), "resid_E", line)?,
            resid_lambda: parse_opt(get("resid_lambda"), "resid_lambda", line)?,
            nodes_radial: parse_opt(get("nodes_radial"), "nodes_radial", line)?,
            nodes_angular: parse_opt(get("nodes_angular"), "nodes_angular", line)?,
            solver_iterations: parse_opt(get("solver_iterations"), "solver_iterations", line)?,
            status: match get("status") {
                "" => "ok".to_string(),
                s => s.to_string(),
            },
            e_grid: parse_opt(get("E_grid"), "E_grid", line)?,
            grid_error: parse_opt(get("grid_error"), "grid_error", line)?,
            at_floor: parse_opt(get("at_floor"), "at_floor", line)?.unwrap_or(false),
        });
    }
    let metadata = metadata.ok_or(Error::Parse { line: 0, message: "missing metadata line".into() })?;
    Ok(RunOutput { metadata, rows, fixtures: Vec::new() })
}

pub fn from_json(text: &str) -> Result<RunOutput> {
    serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })
}

/// Read either format, telling them apart by the first non-blank byte.
pub fn parse_output(text: &str) -> Result<RunOutput> {
    if text.trim_start().starts_with('{') {
        from_json(text)
    } else {
        from_csv(text)
    }
}
