//! Command-line front end: config loading, run modes, sweeps and output files.

pub mod modes;
pub mod table;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use agiven_core::scenario::{SweepAxis, SweepSection, SweepValue};
use agiven_core::{Error, Scenario, ScenarioFile};
use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use table::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Analyze,
    Simulate,
    Optimize,
    Sweep,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Analyze => "analyze",
            Mode::Simulate => "simulate",
            Mode::Optimize => "optimize",
            Mode::Sweep => "sweep",
        }
    }

    fn parse(text: &str) -> Option<Mode> {
        Mode::from_str(text, true).ok()
    }
}

#[derive(Debug, Parser)]
#[command(name = "agiven", version, about = "Map and popular-file push over HAP and RSU: analysis, simulation, slicing")]
struct Args {
    mode: Mode,
    /// TOML scenario, or an earlier output file to re-run from its header.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// `key=v1,v2,...` or `key=start:stop:step`; repeat for a cartesian product.
    #[arg(long = "sweep", value_name = "KEY=VALUES")]
    sweep: Vec<String>,
    /// Mode evaluated at each sweep point.
    #[arg(long, value_enum)]
    of: Option<Mode>,
    /// Write JSON instead of CSV.
    #[arg(long)]
    json: bool,
}

/// One invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub mode: Mode,
    pub config_path: PathBuf,
    pub output_path: PathBuf,
    pub seed: Option<u64>,
    pub sweep: Vec<SweepAxis>,
    pub of: Option<Mode>,
    pub json: bool,
}

/// Failure with its process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub const CONFIG: u8 = 1;
    pub const MODEL: u8 = 2;
    pub const IO: u8 = 3;

    fn config(message: impl Into<String>) -> Self {
        CliError { code: Self::CONFIG, message: message.into() }
    }

    fn io(path: &Path, e: impl fmt::Display) -> Self {
        CliError { code: Self::IO, message: format!("{}: {e}", path.display()) }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_model_error() { Self::MODEL } else { Self::CONFIG };
        CliError { code, message: e.to_string() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Parses `key=v1,v2` or `key=start:stop:step`.
pub fn parse_sweep_arg(arg: &str) -> Result<SweepAxis, CliError> {
    let (key, values) = arg
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("--sweep {arg:?}: expected key=values")))?;
    let key = key.trim().to_string();
    if key.is_empty() {
        return Err(CliError::config(format!("--sweep {arg:?}: empty key")));
    }
    let parts: Vec<&str> = values.split(':').collect();
    let axis = match parts.as_slice() {
        [a, b, h] => SweepAxis {
            key,
            values: Vec::new(),
            range: Some([SweepValue::parse(a), SweepValue::parse(b), SweepValue::parse(h)]),
        },
        [list] => SweepAxis { key, values: list.split(',').map(SweepValue::parse).collect(), range: None },
        _ => return Err(CliError::config(format!("--sweep {arg:?}: use v1,v2,... or start:stop:step"))),
    };
    axis.expanded()?;
    Ok(axis)
}

impl RunSpec {
    pub fn from_args<I, T>(args: I) -> Result<RunSpec, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        let a = Args::try_parse_from(args)?;
        let sweep = a
            .sweep
            .iter()
            .map(|s| parse_sweep_arg(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| clap::Error::raw(clap::error::ErrorKind::ValueValidation, format!("{e}\n")))?;
        Ok(RunSpec {
            mode: a.mode,
            config_path: a.config,
            output_path: a.out,
            seed: a.seed,
            sweep,
            of: a.of,
            json: a.json,
        })
    }
}

/// What an output header records; enough to repeat the run.
struct Loaded {
    file: ScenarioFile,
    seed: Option<u64>,
}

/// Reads a TOML scenario, or the `#` header line of an earlier output.
pub fn load_config(path: &Path) -> Result<(ScenarioFile, Option<u64>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let loaded = if text.starts_with("# {") {
        from_header(text[2..].lines().next().unwrap_or_default())?
    } else if text.trim_start().starts_with('{') {
        // A JSON output file carries the same header under "meta".
        let v: Value = serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        from_meta(&v["meta"])?
    } else {
        Loaded { file: ScenarioFile::from_toml_str(&text)?, seed: None }
    };
    let seed = loaded.seed.or(loaded.file.run.seed);
    Ok((loaded.file, seed))
}

fn from_header(line: &str) -> Result<Loaded, CliError> {
    let v: Value = serde_json::from_str(line).map_err(|e| CliError::config(format!("header: {e}")))?;
    from_meta(&v)
}

fn from_meta(meta: &Value) -> Result<Loaded, CliError> {
    let config = meta.get("config").ok_or_else(|| CliError::config("header has no config"))?;
    let mut file: ScenarioFile =
        serde_json::from_value(config.clone()).map_err(|e| CliError::config(format!("header config: {e}")))?;
    if let Some(axes) = meta.get("sweep") {
        let axes = serde_json::from_value(axes.clone()).map_err(|e| CliError::config(format!("header sweep: {e}")))?;
        let of = meta.get("of").and_then(Value::as_str).map(str::to_string);
        file.sweep = Some(SweepSection { of, axes });
    }
    Ok(Loaded { file, seed: meta.get("seed").and_then(Value::as_u64) })
}

fn fresh_seed() -> u64 {
    use std::hash::BuildHasher;
    std::collections::hash_map::RandomState::new().hash_one(std::time::SystemTime::now())
}

fn columns(mode: Mode) -> &'static [&'static str] {
    match mode {
        Mode::Analyze => modes::ANALYZE_COLUMNS,
        Mode::Simulate => modes::SIMULATE_COLUMNS,
        Mode::Optimize | Mode::Sweep => modes::OPTIMIZE_COLUMNS,
    }
}

fn rows(mode: Mode, s: &Scenario, seed: u64) -> agiven_core::Result<Vec<Vec<Cell>>> {
    match mode {
        Mode::Analyze => modes::analyze(s),
        Mode::Simulate => modes::simulate(s, seed),
        Mode::Optimize | Mode::Sweep => modes::optimize(s),
    }
}

/// A finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub table: Table,
    pub meta: Value,
    /// Set when the file was written but the model itself is infeasible.
    pub warning: Option<CliError>,
}

/// Computes the output of `spec` without touching the output path.
pub fn execute(spec: &RunSpec) -> Result<Report, CliError> {
    let (mut file, file_seed) = load_config(&spec.config_path)?;
    let (inner, axes) = match spec.mode {
        Mode::Sweep => {
            let section = file.sweep.clone().unwrap_or_default();
            let axes = if spec.sweep.is_empty() { section.axes } else { spec.sweep.clone() };
            if axes.is_empty() {
                return Err(CliError::config("sweep mode needs --sweep or a [sweep] section with axes"));
            }
            let of = match (spec.of, section.of.as_deref()) {
                (Some(m), _) => m,
                (None, Some(text)) => {
                    Mode::parse(text).ok_or_else(|| CliError::config(format!("sweep.of: unknown mode {text:?}")))?
                }
                (None, None) => Mode::Analyze,
            };
            if of == Mode::Sweep {
                return Err(CliError::config("sweep.of cannot be sweep"));
            }
            (of, axes)
        }
        _ if !spec.sweep.is_empty() => return Err(CliError::config("--sweep needs the sweep mode")),
        m => (m, Vec::new()),
    };
    let seed = match (spec.seed.or(file_seed), inner) {
        (Some(s), _) => Some(s),
        (None, Mode::Simulate) => Some(fresh_seed()),
        (None, _) => None,
    };
    file.run.seed = seed;
    file.sweep = None;
    let sim_seed = seed.unwrap_or_default();

    let mut meta = json!({
        "tool": "agiven",
        "version": env!("CARGO_PKG_VERSION"),
        "mode": spec.mode.name(),
    });
    if spec.mode == Mode::Sweep {
        meta["of"] = json!(inner.name());
        meta["sweep"] = serde_json::to_value(&axes).expect("sweep axes serialize");
    }
    meta["seed"] = json!(seed);
    meta["config"] = serde_json::to_value(&file).expect("config serializes");

    if spec.mode != Mode::Sweep {
        let scenario = file.resolve()?;
        let mut table = Table::new(columns(inner).iter().copied());
        for row in rows(inner, &scenario, sim_seed)? {
            table.push(row);
        }
        let warning = (inner == Mode::Optimize).then(|| optimum_warning(&table)).flatten();
        return Ok(Report { table, meta, warning });
    }

    let values = axes.iter().map(SweepAxis::expanded).collect::<Result<Vec<_>, _>>()?;
    let points = cartesian(&values);
    // Config errors at any point abort the sweep; model errors become rows.
    let scenarios = points
        .iter()
        .map(|p| {
            let mut f = file.clone();
            for (axis, v) in axes.iter().zip(p) {
                f = f.with_override(&axis.key, v)?;
            }
            f.resolve()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let results: Vec<_> = scenarios.par_iter().map(|s| rows(inner, s, sim_seed)).collect();

    let mut header: Vec<String> = axes.iter().map(|a| a.key.clone()).collect();
    header.push("error".into());
    header.extend(columns(inner).iter().map(|c| c.to_string()));
    let mut table = Table::new(header);
    for (point, result) in points.iter().zip(results) {
        let lead = || point.iter().map(|v| Cell::Text(v.to_string())).collect::<Vec<_>>();
        match result {
            Ok(rows) => {
                for r in rows {
                    let mut row = lead();
                    row.push(Cell::Empty);
                    row.extend(r);
                    table.push(row);
                }
            }
            Err(e) if e.is_model_error() => {
                let mut row = lead();
                row.push(Cell::Text(e.to_string()));
                row.extend(columns(inner).iter().map(|_| Cell::Empty));
                table.push(row);
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Report { table, meta, warning: None })
}

fn optimum_warning(table: &Table) -> Option<CliError> {
    let row = table.rows.first()?;
    let violated = &row[table.column("violated")?];
    match row[table.column("feasible")?] {
        Cell::Bool(true) => None,
        _ => Some(CliError {
            code: CliError::MODEL,
            message: format!("optimal allocation is infeasible: {}", violated.render()),
        }),
    }
}

fn cartesian(axes: &[Vec<SweepValue>]) -> Vec<Vec<SweepValue>> {
    axes.iter().fold(vec![Vec::new()], |acc, values| {
        acc.iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v.clone());
                    p
                })
            })
            .collect()
    })
}

/// Runs `spec` and writes its output file.
pub fn run(spec: &RunSpec) -> Result<Report, CliError> {
    let report = execute(spec)?;
    let bytes = if spec.json {
        let mut text = serde_json::to_string_pretty(&report.table.to_json(&report.meta)).expect("json renders");
        text.push('\n');
        text.into_bytes()
    } else {
        report.table.to_csv(&report.meta).map_err(|e| CliError::io(&spec.output_path, e))?
    };
    std::fs::write(&spec.output_path, bytes).map_err(|e| CliError::io(&spec.output_path, e))?;
    Ok(report)
}

/// Process entry point; returns the exit code.
pub fn entry<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let spec = match RunSpec::from_args(args) {
        Ok(s) => s,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { CliError::CONFIG } else { 0 };
        }
    };
    match run(&spec) {
        Ok(Report { warning: Some(w), .. }) => {
            eprintln!("agiven: {w} (output written to {})", spec.output_path.display());
            w.code
        }
        Ok(_) => 0,
        Err(e) => {
            eprintln!("agiven: {e}");
            e.code
        }
    }
}
