//! `tunnelgate` command-line surface.
//!
//! Exit codes: 0 success, 1 verification failure or I/O error, 2 invalid
//! input, 3 singular denominator in the closed form.
//!
//! Tabular output is byte-deterministic: fixed column order, every float
//! printed as `%.12e`, LF line endings. CSV starts with a `#` metadata line
//! carrying the schema version; JSON is an array of flat objects with
//! identical keys. Files are written to a temporary sibling and renamed into
//! place, so a failed run leaves nothing behind.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{classify_lengths, threshold_curve_with, time_gain, traversal_velocity, CurvePoint, Region};
use crate::approx::phase_time_branch;
use crate::error::Error;
use crate::exact::{free_time, phase_time_exact};
use crate::grid::{linspace, map_ordered, Execution};
use crate::kinematics::{derive_kinematics, BarrierSystem, SolutionBranch};
use crate::units::UnitSystem;
use crate::verify::{run_all, VerifyOptions};

pub const SCHEMA_VERSION: u32 = 1;

pub const RECORD_COLUMNS: [&str; 16] = [
    "energy",
    "potential",
    "mass",
    "width",
    "gap",
    "k",
    "q",
    "qa",
    "branch",
    "tau_exact",
    "tau_branch",
    "tau_free",
    "time_gain",
    "traversal_velocity",
    "verdict",
    "error",
];

pub const CURVE_COLUMNS: [&str; 4] = ["branch", "beta", "alpha_ratio", "feasible"];

#[derive(Debug, Parser)]
#[command(
    name = "tunnelgate",
    version,
    about = "Phase times for relativistic double-barrier tunneling"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a single barrier system.
    PhaseTime(PointArgs),
    /// Evaluate a system while one parameter sweeps a range.
    Sweep(SweepArgs),
    /// Export the V_T = c threshold curves.
    Curve(CurveArgs),
    /// Run the closed-form vs oracle self-checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnitsArg {
    Natural,
    Si,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    Energy,
    Width,
    Gap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    A,
    B,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    /// Total energy (mc² in natural units, eV in SI).
    #[arg(long, allow_negative_numbers = true)]
    pub energy: Option<f64>,
    /// Barrier height (same unit as energy).
    #[arg(long, allow_negative_numbers = true)]
    pub potential: Option<f64>,
    /// Particle mass (natural units: energy unit, default 1; SI: kg, required).
    #[arg(long)]
    pub mass: Option<f64>,
    /// Barrier width a.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub width: f64,
    /// Gap L between the barriers.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub gap: f64,
    #[arg(long, value_enum, default_value = "natural")]
    pub units: UnitsArg,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, value_enum)]
    pub axis: Axis,
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long, default_value_t = 11)]
    pub samples: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[arg(long, value_enum, default_value = "both")]
    pub branch: BranchArg,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub beta_min: f64,
    #[arg(long, default_value_t = 0.999, allow_negative_numbers = true)]
    pub beta_max: f64,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Evaluate the grids on one thread.
    #[arg(long)]
    pub sequential: bool,
    /// Negative control: evaluate a deliberately corrupted h1.
    #[arg(long, hide = true)]
    pub inject_h1_fault: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub from: f64,
    pub to: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaRange {
    pub min: f64,
    pub max: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    PhaseTime,
    Sweep,
    Curve,
    Verify,
}

/// Validated configuration for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub system: Option<BarrierSystem>,
    pub sweep: Option<SweepSpec>,
    pub curve_branches: Vec<SolutionBranch>,
    pub beta_range: Option<BetaRange>,
    pub format: Format,
    pub output_path: Option<PathBuf>,
    pub verify: VerifyOptions,
}

#[derive(Debug)]
pub enum CliError {
    Invalid(Error),
    Singular(Error),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Singular(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    /// One-line `key=value` diagnostic.
    pub fn line(&self) -> String {
        let (kind, msg) = match self {
            CliError::Invalid(e) | CliError::Singular(e) => (e.kind(), e.to_string()),
            CliError::Io(e) => ("io", e.to_string()),
        };
        format!(
            "error kind={kind} message={}",
            serde_json::to_string(&msg).expect("string serializes")
        )
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::SingularDenominator { .. } => CliError::Singular(e),
            other => CliError::Invalid(other),
        }
    }
}

fn invalid(name: &'static str, reason: impl Into<String>) -> CliError {
    CliError::Invalid(Error::InvalidParameter {
        name,
        reason: reason.into(),
    })
}

fn build_system(args: &SystemArgs, energy_override: Option<f64>) -> Result<BarrierSystem, CliError> {
    let energy = energy_override
        .or(args.energy)
        .ok_or_else(|| invalid("energy", "--energy is required"))?;
    let potential = args
        .potential
        .ok_or_else(|| invalid("potential", "--potential is required"))?;
    let sys = match args.units {
        UnitsArg::Natural => BarrierSystem {
            mass: args.mass.unwrap_or(1.0),
            energy,
            potential,
            width: args.width,
            gap: args.gap,
            units: UnitSystem::Natural,
        },
        UnitsArg::Si => {
            let mass = args
                .mass
                .ok_or_else(|| invalid("mass", "--mass (kg) is required with --units si"))?;
            BarrierSystem::si(mass, energy, potential, args.width, args.gap)
        }
    };
    Ok(sys)
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig {
            command: CommandKind::Verify,
            system: None,
            sweep: None,
            curve_branches: Vec::new(),
            beta_range: None,
            format: Format::Csv,
            output_path: None,
            verify: VerifyOptions::default(),
        };
        match &cli.command {
            Command::PhaseTime(p) => {
                let sys = build_system(&p.system, None)?;
                sys.validate()?;
                cfg.command = CommandKind::PhaseTime;
                cfg.system = Some(sys);
                cfg.format = p.output.format;
                cfg.output_path = p.output.out.clone();
            }
            Command::Sweep(s) => {
                if s.samples < 2 {
                    return Err(invalid("samples", "need at least 2 samples"));
                }
                if !(s.from.is_finite() && s.to.is_finite()) || s.from == s.to {
                    return Err(invalid("range", "sweep range must be finite and non-degenerate"));
                }
                let override_energy = (s.axis == Axis::Energy).then_some(s.from);
                let sys = build_system(&s.system, override_energy)?;
                // Only the fixed parameters are validated here; rows may fail individually.
                if !(sys.mass > 0.0 && sys.mass.is_finite()) {
                    return Err(invalid("mass", "must be positive"));
                }
                cfg.command = CommandKind::Sweep;
                cfg.system = Some(sys);
                cfg.sweep = Some(SweepSpec {
                    axis: s.axis,
                    from: s.from,
                    to: s.to,
                    samples: s.samples,
                });
                cfg.format = s.output.format;
                cfg.output_path = s.output.out.clone();
            }
            Command::Curve(c) => {
                if c.samples < 2 {
                    return Err(invalid("samples", "need at least 2 samples"));
                }
                if !(c.beta_min > 0.0 && c.beta_min < c.beta_max && c.beta_max < 1.0) {
                    return Err(invalid("beta", "need 0 < beta-min < beta-max < 1"));
                }
                cfg.command = CommandKind::Curve;
                cfg.curve_branches = match c.branch {
                    BranchArg::A => vec![SolutionBranch::A],
                    BranchArg::B => vec![SolutionBranch::B],
                    BranchArg::Both => vec![SolutionBranch::A, SolutionBranch::B],
                };
                cfg.beta_range = Some(BetaRange {
                    min: c.beta_min,
                    max: c.beta_max,
                    samples: c.samples,
                });
                cfg.format = c.output.format;
                cfg.output_path = c.output.out.clone();
            }
            Command::Verify(v) => {
                cfg.command = CommandKind::Verify;
                cfg.verify = VerifyOptions {
                    exec: if v.sequential {
                        Execution::Sequential
                    } else {
                        Execution::Parallel
                    },
                    reading: if v.inject_h1_fault {
                        crate::exact::H1Reading::FaultInjected
                    } else {
                        crate::exact::H1Reading::Repaired
                    },
                };
            }
        }
        Ok(cfg)
    }
}

/// One output row of `phase-time` and `sweep`, in the system's units.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub system: BarrierSystem,
    pub k: Option<f64>,
    pub q: Option<f64>,
    pub qa: Option<f64>,
    pub branch: Option<SolutionBranch>,
    pub tau_exact: Option<f64>,
    pub tau_branch: Option<f64>,
    pub tau_free: Option<f64>,
    pub time_gain: Option<f64>,
    pub traversal_velocity: Option<f64>,
    pub verdict: Option<Region>,
    pub error: Option<&'static str>,
}

impl Record {
    fn failed(system: BarrierSystem, err: &Error) -> Record {
        Record {
            system,
            k: None,
            q: None,
            qa: None,
            branch: None,
            tau_exact: None,
            tau_branch: None,
            tau_free: None,
            time_gain: None,
            traversal_velocity: None,
            verdict: None,
            error: Some(err.kind()),
        }
    }
}

pub fn compute_record(sys: &BarrierSystem) -> Result<Record, Error> {
    let kin = derive_kinematics(sys)?;
    let tau_exact = phase_time_exact(sys)?;
    let tau_branch = phase_time_branch(sys)?.map(|t| t.value);
    let tau_free = free_time(sys)?.value;
    let (mut gain, mut vt, mut verdict) = (None, None, None);
    if kin.branch != SolutionBranch::Degenerate {
        gain = Some(time_gain(sys, kin.branch)?);
        match traversal_velocity(sys, kin.branch) {
            Ok(v) => {
                vt = Some(v);
                let r = sys.reduced();
                let beta = kin.group_velocity / sys.scales().velocity;
                verdict = Some(classify_lengths(beta, r.width, r.gap, kin.branch)?.region);
            }
            Err(Error::ZeroPath) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(Record {
        system: *sys,
        k: Some(kin.k),
        q: Some(kin.q),
        qa: Some(tau_exact.qa),
        branch: Some(kin.branch),
        tau_exact: Some(tau_exact.value),
        tau_branch,
        tau_free: Some(tau_free),
        time_gain: gain,
        traversal_velocity: vt,
        verdict,
        error: None,
    })
}

/// C-style `%.12e`: `1.234567890123e+01`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Num(f64),
    Text(&'static str),
    Bool(bool),
    Empty,
}

impl Cell {
    fn num(x: Option<f64>) -> Cell {
        x.map_or(Cell::Empty, Cell::Num)
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_float(*x),
            Cell::Text(s) => s.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format_float(*x),
            Cell::Num(_) | Cell::Empty => "null".into(),
            Cell::Text(s) => serde_json::to_string(s).expect("string serializes"),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

fn record_cells(r: &Record) -> Vec<Cell> {
    let s = &r.system;
    vec![
        Cell::Num(s.energy),
        Cell::Num(s.potential),
        Cell::Num(s.mass),
        Cell::Num(s.width),
        Cell::Num(s.gap),
        Cell::num(r.k),
        Cell::num(r.q),
        Cell::num(r.qa),
        r.branch.map_or(Cell::Empty, |b| Cell::Text(b.label())),
        Cell::num(r.tau_exact),
        Cell::num(r.tau_branch),
        Cell::num(r.tau_free),
        Cell::num(r.time_gain),
        Cell::num(r.traversal_velocity),
        r.verdict.map_or(Cell::Empty, |v| Cell::Text(v.label())),
        r.error.map_or(Cell::Empty, Cell::Text),
    ]
}

fn curve_cells(p: &CurvePoint) -> Vec<Cell> {
    vec![
        Cell::Text(p.branch.label()),
        Cell::Num(p.beta),
        Cell::Num(p.alpha_ratio),
        Cell::Bool(p.feasible),
    ]
}

fn render(format: Format, units: UnitSystem, columns: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str(&format!(
                "# tunnelgate v{} {} schema={}\n",
                env!("CARGO_PKG_VERSION"),
                units.label(),
                SCHEMA_VERSION
            ));
            out.push_str(&columns.join(","));
            out.push('\n');
            for row in rows {
                let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        Format::Json => {
            if rows.is_empty() {
                return "[]\n".into();
            }
            out.push_str("[\n");
            let objects: Vec<String> = rows
                .iter()
                .map(|row| {
                    let fields: Vec<String> = columns
                        .iter()
                        .zip(row)
                        .map(|(c, cell)| format!("\"{c}\":{}", cell.json()))
                        .collect();
                    format!("{{{}}}", fields.join(","))
                })
                .collect();
            out.push_str(&objects.join(",\n"));
            out.push_str("\n]\n");
        }
    }
    out
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit(cfg: &RunConfig, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cfg.output_path {
        Some(path) => write_atomic(path, text.as_bytes()).map_err(CliError::Io),
        None => stdout.write_all(text.as_bytes()).map_err(CliError::Io),
    }
}

fn sweep_systems(base: &BarrierSystem, spec: &SweepSpec) -> Vec<BarrierSystem> {
    linspace(spec.from, spec.to, spec.samples)
        .into_iter()
        .map(|x| match spec.axis {
            Axis::Energy => base.with_energy(x),
            Axis::Width => base.with_width(x),
            Axis::Gap => base.with_gap(x),
        })
        .collect()
}

pub fn cmd_phase_time(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let sys = cfg.system.expect("phase-time has a system");
    let record = compute_record(&sys)?;
    let text = render(cfg.format, sys.units, &RECORD_COLUMNS, &[record_cells(&record)]);
    emit(cfg, &text, stdout)?;
    Ok(0)
}

pub fn cmd_sweep(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let base = cfg.system.expect("sweep has a system");
    let spec = cfg.sweep.expect("sweep has a spec");
    let systems = sweep_systems(&base, &spec);
    let records = map_ordered(&systems, Execution::default(), |sys| {
        compute_record(sys).unwrap_or_else(|e| Record::failed(*sys, &e))
    });
    if records.iter().all(|r| r.error.is_some()) {
        let first = records[0].error.unwrap_or("unknown");
        return Err(invalid("sweep", format!("no row succeeded (first error: {first})")));
    }
    let rows: Vec<Vec<Cell>> = records.iter().map(record_cells).collect();
    emit(cfg, &render(cfg.format, base.units, &RECORD_COLUMNS, &rows), stdout)?;
    Ok(0)
}

pub fn cmd_curve(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let range = cfg.beta_range.expect("curve has a range");
    let betas = linspace(range.min, range.max, range.samples);
    let mut rows = Vec::new();
    for &branch in &cfg.curve_branches {
        for p in threshold_curve_with(branch, &betas, Execution::default())? {
            rows.push(curve_cells(&p));
        }
    }
    emit(
        cfg,
        &render(cfg.format, UnitSystem::Natural, &CURVE_COLUMNS, &rows),
        stdout,
    )?;
    Ok(0)
}

pub fn cmd_verify(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let reports = run_all(cfg.verify);
    let mut all = true;
    for r in &reports {
        writeln!(stdout, "{r}").map_err(CliError::Io)?;
        all &= r.passed;
    }
    writeln!(stdout, "overall={}", if all { "PASS" } else { "FAIL" }).map_err(CliError::Io)?;
    Ok(if all { 0 } else { 1 })
}

/// Parses `args` (including the program name) and runs the command, returning
/// the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(rendered.as_bytes());
            } else {
                let _ = stderr.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    let result = RunConfig::from_cli(&cli).and_then(|cfg| match cfg.command {
        CommandKind::PhaseTime => cmd_phase_time(&cfg, stdout),
        CommandKind::Sweep => cmd_sweep(&cfg, stdout),
        CommandKind::Curve => cmd_curve(&cfg, stdout),
        CommandKind::Verify => cmd_verify(&cfg, stdout),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.line());
            e.exit_code()
        }
    }
}
