//! Command-line front end: `report`, `sweep` and `verify`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 physical
//! precondition violated (Pauli exclusion).

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::dimensions::{dim_sector, Statistics};
use crate::error::Error;
use crate::mixing_entropy::{mixing_report_at, MixingReport, MixingScenario, Temperature};
use crate::oracle::{dimension_grid, verification_grid, Oracle, OracleCase};
use crate::spin_algebra::{pj_partial, SpinAngle};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

/// Largest `|formula - oracle|` accepted by `verify`.
pub const VERIFY_TOLERANCE: f64 = 1e-7;
const PJ_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "gibbs-mix",
    version,
    about = "Entropy change and extractable work for mixing spin-labelled quantum gases"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full report for one scenario
    Report(ReportArgs),
    /// One row per value of a swept parameter
    Sweep(SweepArgs),
    /// Compare the closed forms with the brute-force oracle
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Param {
    D,
    Theta,
    N,
}

#[derive(Debug, clap::Args)]
pub struct OutputArgs {
    /// Write to this file instead of standard output
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub m: u64,
    /// Total number of cells (even)
    #[arg(long)]
    pub d: u64,
    #[arg(long)]
    pub statistics: Statistics,
    /// Angle between the two spin directions, in [0, π]; π if omitted
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long = "kT", default_value_t = 1.0)]
    pub kt: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, clap::Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: Option<u64>,
    /// Defaults to `n` (also while sweeping `n`)
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long)]
    pub d: Option<u64>,
    #[arg(long)]
    pub statistics: Statistics,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long, value_enum)]
    pub param: Param,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    #[arg(long = "kT", default_value_t = 1.0)]
    pub kt: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    /// Bound on (2d)^N; overrides GIBBS_ORACLE_CAP
    #[arg(long)]
    pub cap: Option<u128>,
    /// Only check systems with at most this many particles
    #[arg(long)]
    pub max_particles: Option<u64>,
    #[arg(long)]
    pub statistics: Option<Statistics>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Shift every formula value (exercises the failure path)
    #[arg(long, hide = true, default_value_t = 0.0)]
    pub perturb: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Error with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::FermionCapacity { .. } | Error::NonexistentSector { .. } => EXIT_PRECONDITION,
            Error::Internal(_) => EXIT_VERIFY_FAILED,
            _ => EXIT_USAGE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::usage(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::usage(format!("csv error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::usage(format!("json error: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name) and runs the command.
pub fn run_from_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, stdout, stderr),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            code
        }
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Report(args) => cmd_report(&args, stdout),
        Command::Sweep(args) => cmd_sweep(&args, stdout),
        Command::Verify(args) => cmd_verify(&args, stdout, stderr),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

fn with_output(out: &OutputArgs, stdout: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<()> {
    match &out.output {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::usage(format!("cannot create {}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => {
            f(stdout)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn csv_writer(w: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// Seventeen significant digits, enough to round-trip any `f64`.
fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn angle(theta: Option<f64>) -> CliResult<SpinAngle> {
    match theta {
        None => Ok(SpinAngle::ORTHOGONAL),
        Some(t) => SpinAngle::new(t).map_err(CliError::from),
    }
}

#[derive(Debug, Serialize)]
struct SectorJson {
    #[serde(rename = "J2")]
    j2: i64,
    p_num: Option<String>,
    p_den: Option<String>,
    p: f64,
    dim: String,
    delta_s: f64,
}

#[derive(Debug, Serialize)]
struct ReportJson {
    n: u64,
    m: u64,
    d: u64,
    statistics: Statistics,
    theta: f64,
    #[serde(rename = "kT")]
    kt: f64,
    delta_s_informed: f64,
    delta_s_ignorant: f64,
    delta_s_identical: f64,
    delta_s_classical_dist: f64,
    delta_s_classical_indist: f64,
    shannon_hp: f64,
    work_variance: f64,
    work_informed: f64,
    work_ignorant: f64,
    work_identical: f64,
    sectors: Vec<SectorJson>,
}

fn report_json(r: &MixingReport, t: Temperature) -> ReportJson {
    let exact = r.is_orthogonal();
    let sectors = r
        .sectors
        .iter()
        .map(|s| {
            let (p_num, p_den) = if exact {
                let p = r.sector_distribution.probability(s.j);
                (Some(p.numer().to_string()), Some(p.denom().to_string()))
            } else {
                (None, None)
            };
            SectorJson {
                j2: s.j.twice(),
                p_num,
                p_den,
                p: s.probability,
                dim: s.dimension.to_string(),
                delta_s: s.delta_s,
            }
        })
        .collect();
    ReportJson {
        n: r.scenario.n(),
        m: r.scenario.m(),
        d: r.scenario.cells(),
        statistics: r.scenario.statistics(),
        theta: r.theta.radians(),
        kt: t.kt(),
        delta_s_informed: r.delta_s_informed,
        delta_s_ignorant: r.delta_s_ignorant,
        delta_s_identical: r.delta_s_identical,
        delta_s_classical_dist: r.delta_s_classical_dist,
        delta_s_classical_indist: r.delta_s_classical_indist,
        shannon_hp: r.shannon_hp,
        work_variance: r.work_variance,
        work_informed: r.work_informed(t),
        work_ignorant: r.work_ignorant(t),
        work_identical: r.work_identical(t),
        sectors,
    }
}

pub fn cmd_report(args: &ReportArgs, stdout: &mut dyn Write) -> CliResult<i32> {
    let t = Temperature::new(args.kt)?;
    let s = MixingScenario::new(args.n, args.m, args.d, args.statistics)?;
    let report = mixing_report_at(&s, angle(args.theta)?)?;
    let json = report_json(&report, t);
    with_output(&args.out, stdout, |w| {
        match args.format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *w, &json)?;
                writeln!(w)?;
            }
            Format::Csv => {
                let mut c = csv_writer(w);
                c.write_record(["J2", "p_num", "p_den", "p", "dim", "delta_s"])?;
                for s in &json.sectors {
                    c.write_record([
                        s.j2.to_string(),
                        s.p_num.clone().unwrap_or_default(),
                        s.p_den.clone().unwrap_or_default(),
                        float(s.p),
                        s.dim.clone(),
                        float(s.delta_s),
                    ])?;
                }
                c.flush()?;
            }
        }
        Ok(())
    })?;
    Ok(EXIT_OK)
}

const SWEEP_COLUMNS: [&str; 8] = [
    "param_value",
    "delta_s_informed",
    "delta_s_ignorant",
    "delta_s_identical",
    "delta_s_classical_dist",
    "delta_s_classical_indist",
    "shannon_hp",
    "work_variance",
];

/// Swept value: integers for `d` and `n`, radians for `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamValue {
    Int(u64),
    Angle(f64),
}

impl ParamValue {
    fn render(self) -> String {
        match self {
            ParamValue::Int(v) => v.to_string(),
            ParamValue::Angle(v) => float(v),
        }
    }
}

#[derive(Debug, Serialize)]
struct SweepRow {
    #[serde(skip)]
    param: String,
    param_value: f64,
    delta_s_informed: f64,
    delta_s_ignorant: f64,
    delta_s_identical: f64,
    delta_s_classical_dist: f64,
    delta_s_classical_indist: f64,
    shannon_hp: f64,
    work_variance: f64,
}

/// Values `from, from + step, …` up to `to`; the end point is included when
/// it lies on the grid up to rounding.
pub fn sweep_values(param: Param, from: f64, to: f64, step: f64) -> CliResult<Vec<ParamValue>> {
    if !(from.is_finite() && to.is_finite() && step.is_finite()) || step <= 0.0 {
        return Err(CliError::usage("sweep range needs finite bounds and a positive step"));
    }
    if from > to {
        return Err(CliError::usage(format!("empty sweep range {from}..{to}")));
    }
    let count = ((to - from) / step + 1e-9).floor() as u64 + 1;
    match param {
        Param::Theta => (0..count)
            .map(|k| {
                let v = (from + k as f64 * step).min(to);
                SpinAngle::new(v).map(|_| ParamValue::Angle(v)).map_err(CliError::from)
            })
            .collect(),
        Param::D | Param::N => {
            let is_int = |x: f64| x >= 0.0 && x.fract() == 0.0;
            if !(is_int(from) && is_int(to) && is_int(step)) {
                return Err(CliError::usage("d and n sweeps need non-negative integer bounds and step"));
            }
            let (from, step) = (from as u64, step as u64);
            (0..count)
                .map(|k| {
                    let v = from + k * step;
                    if param == Param::D && (v < 2 || v % 2 != 0) {
                        return Err(CliError::from(Error::InvalidCellCount(v)));
                    }
                    Ok(ParamValue::Int(v))
                })
                .collect()
        }
    }
}

fn sweep_scenario(args: &SweepArgs, value: ParamValue) -> CliResult<(MixingScenario, SpinAngle)> {
    let missing = |flag: &str| CliError::usage(format!("--{flag} is required unless it is swept"));
    let (n, d, theta) = match (args.param, value) {
        (Param::D, ParamValue::Int(d)) => (args.n.ok_or_else(|| missing("n"))?, d, angle(args.theta)?),
        (Param::N, ParamValue::Int(n)) => (n, args.d.ok_or_else(|| missing("d"))?, angle(args.theta)?),
        (Param::Theta, ParamValue::Angle(t)) => (
            args.n.ok_or_else(|| missing("n"))?,
            args.d.ok_or_else(|| missing("d"))?,
            SpinAngle::new(t)?,
        ),
        _ => return Err(CliError::usage("inconsistent sweep parameter")),
    };
    let m = args.m.unwrap_or(n);
    Ok((MixingScenario::new(n, m, d, args.statistics)?, theta))
}

pub fn cmd_sweep(args: &SweepArgs, stdout: &mut dyn Write) -> CliResult<i32> {
    Temperature::new(args.kt)?;
    let values = sweep_values(args.param, args.from, args.to, args.step)?;
    let scenarios = values
        .iter()
        .map(|&v| sweep_scenario(args, v).map(|s| (v, s)))
        .collect::<CliResult<Vec<_>>>()?;
    let rows = scenarios
        .par_iter()
        .map(|&(v, (s, theta))| {
            let r = mixing_report_at(&s, theta)?;
            Ok(SweepRow {
                param: v.render(),
                param_value: match v {
                    ParamValue::Int(i) => i as f64,
                    ParamValue::Angle(a) => a,
                },
                delta_s_informed: r.delta_s_informed,
                delta_s_ignorant: r.delta_s_ignorant,
                delta_s_identical: r.delta_s_identical,
                delta_s_classical_dist: r.delta_s_classical_dist,
                delta_s_classical_indist: r.delta_s_classical_indist,
                shannon_hp: r.shannon_hp,
                work_variance: r.work_variance,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    with_output(&args.out, stdout, |w| {
        match args.format {
            Format::Csv => {
                let mut c = csv_writer(w);
                c.write_record(SWEEP_COLUMNS)?;
                for r in &rows {
                    c.write_record([
                        r.param.clone(),
                        float(r.delta_s_informed),
                        float(r.delta_s_ignorant),
                        float(r.delta_s_identical),
                        float(r.delta_s_classical_dist),
                        float(r.delta_s_classical_indist),
                        float(r.shannon_hp),
                        float(r.work_variance),
                    ])?;
                }
                c.flush()?;
            }
            Format::Json => {
                serde_json::to_writer_pretty(&mut *w, &rows)?;
                writeln!(w)?;
            }
        }
        Ok(())
    })?;
    Ok(EXIT_OK)
}

/// One row of the verification table.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyRow {
    pub n: u64,
    pub m: u64,
    pub d: u64,
    pub theta: f64,
    pub statistics: Statistics,
    pub formula: f64,
    pub oracle: f64,
    pub abs_diff: f64,
    pub pj_max_diff: f64,
    pub pass: bool,
}

fn verify_case(oracle: &Oracle, case: &OracleCase, perturb: f64) -> CliResult<VerifyRow> {
    let s = MixingScenario::new(case.n, case.m, case.d, case.statistics)?;
    let formula = crate::mixing_entropy::delta_s_ignorant_partial(&s, case.theta)? + perturb;
    let outcome = oracle.run_case(case)?;
    let pj = pj_partial(case.n, case.m, case.theta)?;
    let mut pj_max_diff: f64 = 0.0;
    for (j, p) in &pj {
        let q = outcome.sector_probabilities.get(j).copied().unwrap_or(0.0);
        pj_max_diff = pj_max_diff.max((p + perturb - q).abs());
    }
    // sectors the oracle sees but the formula omits must carry no weight
    for (j, q) in &outcome.sector_probabilities {
        if !pj.iter().any(|(k, _)| k == j) {
            pj_max_diff = pj_max_diff.max(q.abs());
        }
    }
    let abs_diff = (formula - outcome.delta_s_ignorant).abs();
    Ok(VerifyRow {
        n: case.n,
        m: case.m,
        d: case.d,
        theta: case.theta.radians(),
        statistics: case.statistics,
        formula,
        oracle: outcome.delta_s_ignorant,
        abs_diff,
        pj_max_diff,
        pass: abs_diff <= VERIFY_TOLERANCE && pj_max_diff <= PJ_TOLERANCE,
    })
}

/// Brute-force against closed-form sector dimensions; returns mismatches.
pub fn verify_dimensions(oracle: &Oracle, max_particles: Option<u64>, only: Option<Statistics>) -> CliResult<(usize, Vec<String>)> {
    let mut checked = 0;
    let mut failures = Vec::new();
    for (total, d) in dimension_grid(oracle) {
        if max_particles.is_some_and(|k| total > k) {
            continue;
        }
        for stat in [Statistics::Boson, Statistics::Fermion] {
            if only.is_some_and(|o| o != stat) {
                continue;
            }
            let brute = oracle.sector_dimensions_bruteforce(total, d, stat)?;
            for (j, count) in brute {
                let expected = match dim_sector(stat, total, d, j) {
                    Ok(v) => v,
                    Err(Error::NonexistentSector { .. }) => 0.into(),
                    Err(e) => return Err(e.into()),
                };
                checked += 1;
                if expected != count.into() {
                    failures.push(format!(
                        "dimension N={total} d={d} {stat} J={j}: formula {expected}, oracle {count}"
                    ));
                }
            }
        }
    }
    Ok((checked, failures))
}

pub fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<i32> {
    let oracle = args.cap.map_or_else(Oracle::from_env, Oracle::with_cap);
    let cases: Vec<OracleCase> = verification_grid(&oracle)
        .into_iter()
        .filter(|c| args.max_particles.is_none_or(|k| c.n + c.m <= k))
        .filter(|c| args.statistics.is_none_or(|s| s == c.statistics))
        .collect();
    let rows = cases
        .par_iter()
        .map(|c| verify_case(&oracle, c, args.perturb))
        .collect::<CliResult<Vec<_>>>()?;
    let (dims_checked, dim_failures) = verify_dimensions(&oracle, args.max_particles, args.statistics)?;
    with_output(&args.out, stdout, |w| {
        match args.format {
            Format::Csv => {
                let mut c = csv_writer(w);
                c.write_record([
                    "n", "m", "d", "theta", "statistics", "formula", "oracle", "abs_diff", "pj_max_diff", "pass",
                ])?;
                for r in &rows {
                    c.write_record([
                        r.n.to_string(),
                        r.m.to_string(),
                        r.d.to_string(),
                        float(r.theta),
                        r.statistics.to_string(),
                        float(r.formula),
                        float(r.oracle),
                        float(r.abs_diff),
                        float(r.pj_max_diff),
                        r.pass.to_string(),
                    ])?;
                }
                c.flush()?;
            }
            Format::Json => {
                serde_json::to_writer_pretty(&mut *w, &rows)?;
                writeln!(w)?;
            }
        }
        Ok(())
    })?;
    let failed: Vec<&VerifyRow> = rows.iter().filter(|r| !r.pass).collect();
    writeln!(
        stderr,
        "{} cases, {} failed; {} sector dimensions, {} mismatched (cap {})",
        rows.len(),
        failed.len(),
        dims_checked,
        dim_failures.len(),
        oracle.cap
    )?;
    for r in &failed {
        writeln!(
            stderr,
            "FAIL n={} m={} d={} theta={} {}: formula {} oracle {} diff {:e} pj diff {:e}",
            r.n, r.m, r.d, r.theta, r.statistics, r.formula, r.oracle, r.abs_diff, r.pj_max_diff
        )?;
    }
    for f in &dim_failures {
        writeln!(stderr, "FAIL {f}")?;
    }
    if failed.is_empty() && dim_failures.is_empty() {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_VERIFY_FAILED)
    }
}
