//! Argument parsing and subcommand drivers.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{read_config_value, RunConfig};
use crate::error::CliError;
use crate::report::{build_report, fmt_float, write_timeseries_csv, ReportDocument};
use crate::run::{
    evaluate_assertions, execute, execute_dual, refine_bound, AssertionSpec, RunOutcome,
};
use crate::scenario::build_hamiltonian;

pub const THREADS_ENV: &str = "ADIACHECK_THREADS";

#[derive(Debug, Parser)]
#[command(name = "adiacheck", version, about = "Check adiabatic-approximation criteria on driven quantum systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation and write its report.
    Simulate(RunArgs),
    /// Run with step refinement and gate on assertions.
    Check(CheckArgs),
    /// Build the companion system and report its residuals.
    Dual(DualArgs),
    /// Repeat a run over a list of values for one parameter.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration; the flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// amin, landau_zener, random_smooth or custom_csv.
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Drive amplitude of the amin scenario.
    #[arg(long = "V")]
    pub drive: Option<f64>,
    #[arg(long)]
    pub omega0: Option<f64>,
    /// Sweep rate of the landau_zener scenario.
    #[arg(long = "v")]
    pub sweep_rate: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub coupling: Option<f64>,
    /// Sample file of the custom_csv scenario.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    #[arg(long = "T", visible_alias = "horizon")]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub initial_level: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub record_every: Option<usize>,
    #[arg(long)]
    pub refinement: bool,
    #[arg(long)]
    pub eta_trad: Option<f64>,
    #[arg(long)]
    pub eta_suff: Option<f64>,
    #[arg(long)]
    pub eta_fid: Option<f64>,
    #[arg(long)]
    pub resonance_tol: Option<f64>,
    #[arg(long)]
    pub csv_dir: Option<PathBuf>,
    /// Report path; without it the report goes to stdout.
    #[arg(long = "json")]
    pub json_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// oracle:<limit>, bound, identity or dual; repeatable.
    #[arg(long = "assert", required = true)]
    pub assertions: Vec<String>,
    /// Repeat a random_smooth run over this many consecutive seeds.
    #[arg(long)]
    pub seeds: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct DualArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Also rerun at half the step; repeat to halve again.
    #[arg(long = "halve-dt", action = ArgAction::Count)]
    pub halve_dt: u8,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Dotted config path of the swept field, e.g. scenario.omega0.
    #[arg(long)]
    pub parameter: Option<String>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub values: Option<Vec<f64>>,
}

fn set(obj: &mut Value, key: &str, v: impl Into<Value>) {
    if !obj.is_object() {
        *obj = Value::Object(Map::new());
    }
    obj[key] = v.into();
}

// The scenario that parameter flags apply to: the innermost one of a
// `dual_of` chain.
fn innermost_scenario(root: &mut Value) -> &mut Value {
    let mut s = &mut root["scenario"];
    while s.get("kind").and_then(Value::as_str) == Some("dual_of") {
        s = &mut s["scenario"];
    }
    s
}

impl RunArgs {
    /// Loads `--config` (if any) and applies every flag on top of it.
    pub fn resolve(&self) -> Result<Value, CliError> {
        let mut v = match &self.config {
            Some(p) => read_config_value(p)?,
            None => json!({}),
        };
        if !v.is_object() {
            return Err(CliError::Config("configuration must be a JSON object".into()));
        }
        if let Some(kind) = &self.scenario {
            let same = v["scenario"].get("kind").and_then(Value::as_str) == Some(kind.as_str());
            if !same {
                v["scenario"] = json!({ "kind": kind });
            }
        }
        let scenario_fields: [(&str, Option<Value>); 9] = [
            ("epsilon", self.epsilon.map(Value::from)),
            ("V", self.drive.map(Value::from)),
            ("omega0", self.omega0.map(Value::from)),
            ("v", self.sweep_rate.map(Value::from)),
            ("delta", self.delta.map(Value::from)),
            ("dim", self.dim.map(Value::from)),
            ("seed", self.seed.map(Value::from)),
            ("coupling", self.coupling.map(Value::from)),
            (
                "path",
                self.samples
                    .as_ref()
                    .map(|p| Value::from(p.to_string_lossy().into_owned())),
            ),
        ];
        for (key, value) in scenario_fields {
            if let Some(value) = value {
                set(innermost_scenario(&mut v), key, value);
            }
        }
        if let Some(t) = self.horizon {
            v["horizon"] = t.into();
        }
        if let Some(n) = self.initial_level {
            v["initial_level"] = n.into();
        }
        if let Some(dt) = self.dt {
            set(&mut v["propagator"], "dt", dt);
        }
        if let Some(r) = self.record_every {
            set(&mut v["propagator"], "record_every", r);
        }
        if self.refinement {
            set(&mut v["propagator"], "refinement", true);
        }
        let thresholds = [
            ("eta_trad", self.eta_trad),
            ("eta_suff", self.eta_suff),
            ("eta_fid", self.eta_fid),
            ("resonance_tol", self.resonance_tol),
        ];
        for (key, value) in thresholds {
            if let Some(x) = value {
                set(&mut v["thresholds"], key, x);
            }
        }
        if let Some(p) = &self.csv_dir {
            set(&mut v["outputs"], "csv_dir", p.to_string_lossy().into_owned());
        }
        if let Some(p) = &self.json_path {
            set(&mut v["outputs"], "json_path", p.to_string_lossy().into_owned());
        }
        Ok(v)
    }

    pub fn load(&self) -> Result<RunConfig, CliError> {
        RunConfig::from_value(self.resolve()?)
    }
}

/// Files produced by a command, written only once every computation has
/// succeeded. Each file goes to a temporary sibling first and is renamed
/// into place.
#[derive(Default)]
struct PendingOutputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl PendingOutputs {
    fn add(&mut self, path: PathBuf, bytes: Vec<u8>) {
        self.files.push((path, bytes));
    }

    fn commit(self) -> Result<(), CliError> {
        let mut staged = Vec::with_capacity(self.files.len());
        for (path, bytes) in self.files {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            let tmp = tmp_path(&path);
            if let Err(e) = fs::write(&tmp, &bytes) {
                for (t, _) in &staged {
                    let _ = fs::remove_file(t);
                }
                return Err(e.into());
            }
            staged.push((tmp, path));
        }
        for (tmp, path) in staged {
            fs::rename(tmp, path)?;
        }
        Ok(())
    }
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".partial");
    path.with_file_name(name)
}

fn json_bytes<T: Serialize>(doc: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(doc).expect("report serializes");
    bytes.push(b'\n');
    bytes
}

fn csv_bytes(out: &RunOutcome) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_timeseries_csv(out, &mut buf)
        .map_err(|e| CliError::Io(io::Error::other(e.to_string())))?;
    Ok(buf)
}

fn emit<T: Serialize>(
    cfg: &RunConfig,
    doc: &T,
    csv: Vec<(String, Vec<u8>)>,
) -> Result<(), CliError> {
    let mut pending = PendingOutputs::default();
    if let Some(dir) = &cfg.outputs.csv_dir {
        for (name, bytes) in csv {
            pending.add(dir.join(name), bytes);
        }
    }
    match &cfg.outputs.json_path {
        Some(p) => pending.add(p.clone(), json_bytes(doc)),
        None => io::stdout().write_all(&json_bytes(doc))?,
    }
    pending.commit()
}

fn summary_line(doc: &ReportDocument) {
    eprintln!(
        "{}: P_{}(T) = {:.6}, max r = {:.3e}, S = {:.3e}, verdict {}",
        doc.command,
        doc.evolution.initial_level,
        doc.evolution.final_fidelity,
        doc.conditions.traditional_max.value,
        doc.conditions.sufficient_total,
        doc.verdict.classification
    );
}

pub fn cmd_simulate(args: &RunArgs) -> Result<(), CliError> {
    let cfg = args.load()?;
    let out = execute(&cfg)?;
    let doc = build_report("simulate", &out, None, Vec::new());
    let csv = vec![("timeseries.csv".to_string(), csv_bytes(&out)?)];
    emit(&cfg, &doc, csv)?;
    summary_line(&doc);
    Ok(())
}

pub fn cmd_check(args: &CheckArgs) -> Result<(), CliError> {
    let mut cfg = args.run.load()?;
    cfg.propagator.refinement = true;
    let specs: Vec<AssertionSpec> = args
        .assertions
        .iter()
        .map(|s| AssertionSpec::parse(s))
        .collect::<Result<_, _>>()?;
    let configs = match args.seeds {
        None => vec![cfg.clone()],
        Some(0) => return Err(CliError::Config("--seeds must be positive".into())),
        Some(n) => {
            let base = match &cfg.scenario {
                crate::config::ScenarioConfig::RandomSmooth { seed, .. } => *seed,
                _ => {
                    return Err(CliError::Config(
                        "--seeds needs a random_smooth scenario".into(),
                    ))
                }
            };
            (0..n)
                .map(|k| cfg.with_parameter("scenario.seed", (base + k) as f64))
                .collect::<Result<_, _>>()?
        }
    };
    let needs_dual = specs.iter().any(AssertionSpec::needs_dual);
    let mut docs = Vec::with_capacity(configs.len());
    let mut csv = Vec::new();
    let mut first_failure: Option<String> = None;
    for (k, c) in configs.iter().enumerate() {
        let mut out = execute(c)?;
        refine_bound(&mut out)?;
        let dual = if needs_dual {
            Some(execute_dual(c, &out.hamiltonian, 0)?)
        } else {
            None
        };
        let outcomes = evaluate_assertions(&specs, &out, dual.as_ref())?;
        if first_failure.is_none() {
            if let Some(f) = outcomes.iter().find(|o| !o.passed) {
                first_failure = Some(format!(
                    "{} ({}): value {} exceeds limit {}; {}",
                    f.name,
                    run_label(c, configs.len(), k),
                    f.value,
                    f.limit,
                    f.detail
                ));
            }
        }
        let name = if configs.len() == 1 {
            "timeseries.csv".to_string()
        } else {
            format!("timeseries_{k}.csv")
        };
        csv.push((name, csv_bytes(&out)?));
        docs.push(build_report("check", &out, dual.as_ref(), outcomes));
    }
    if docs.len() == 1 {
        emit(&cfg, &docs[0], csv)?;
    } else {
        emit(&cfg, &docs, csv)?;
    }
    match first_failure {
        Some(msg) => Err(CliError::Assertion(msg)),
        None => {
            eprintln!("check: {} run(s), all assertions hold", docs.len());
            Ok(())
        }
    }
}

fn run_label(cfg: &RunConfig, runs: usize, k: usize) -> String {
    match (&cfg.scenario, runs) {
        (crate::config::ScenarioConfig::RandomSmooth { seed, .. }, n) if n > 1 => {
            format!("seed {seed}")
        }
        _ => format!("run {k}"),
    }
}

pub fn cmd_dual(args: &DualArgs) -> Result<(), CliError> {
    let cfg = args.run.load()?;
    let out = execute(&cfg)?;
    let opts = cfg.propagator.options();
    let h_a = build_hamiltonian(&cfg.scenario, cfg.horizon, &opts)?;
    let dual = execute_dual(&cfg, &h_a, args.halve_dt as usize)?;
    let doc = build_report("dual", &out, Some(&dual), Vec::new());
    let csv = vec![("timeseries.csv".to_string(), csv_bytes(&out)?)];
    emit(&cfg, &doc, csv)?;
    for r in &dual.section.runs {
        eprintln!(
            "dual: dt = {:.3e}, spectrum {:.3e}, states {:.3e}, inverse {:.3e}, coupling {:.3e}",
            r.dt, r.spectrum, r.states, r.evolution_inverse, r.coupling_relation
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    parameter: &'a str,
    values: &'a [f64],
    reports: Vec<ReportDocument>,
}

/// Thread count from `ADIACHECK_THREADS`; 0 or unset lets rayon decide.
pub fn thread_limit() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(s) => s.trim().parse().map_err(|_| {
            CliError::Config(format!("{THREADS_ENV} must be a non-negative integer, got `{s}`"))
        }),
    }
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let mut v = args.run.resolve()?;
    if let Some(p) = &args.parameter {
        set(&mut v["sweep"], "parameter", p.clone());
    }
    if let Some(values) = &args.values {
        set(&mut v["sweep"], "values", values.clone());
    }
    let cfg = RunConfig::from_value(v)?;
    let sweep = cfg
        .sweep
        .clone()
        .ok_or_else(|| CliError::Config("sweep needs a sweep block or --parameter/--values".into()))?;
    if sweep.values.is_empty() {
        return Err(CliError::Config("sweep values list is empty".into()));
    }
    let configs: Vec<RunConfig> = sweep
        .values
        .iter()
        .map(|&x| cfg.with_parameter(&sweep.parameter, x))
        .collect::<Result<_, _>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_limit()?)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker threads: {e}")))?;
    // collect() keeps input order whatever the scheduling
    let results: Vec<Result<RunOutcome, CliError>> =
        pool.install(|| configs.par_iter().map(execute).collect());
    let outcomes: Vec<RunOutcome> = results.into_iter().collect::<Result<_, _>>()?;

    let mut aggregate = csv::Writer::from_writer(Vec::new());
    let agg_err = |e: csv::Error| CliError::Io(io::Error::other(e.to_string()));
    aggregate
        .write_record([
            sweep.parameter.as_str(),
            "max_ratio",
            "sufficient_total",
            "final_population",
            "epsilon_sum",
            "resonance",
            "classification",
        ])
        .map_err(agg_err)?;
    let mut csv = Vec::new();
    let mut reports = Vec::with_capacity(outcomes.len());
    for (k, (x, out)) in sweep.values.iter().zip(&outcomes).enumerate() {
        let doc = build_report("sweep", out, None, Vec::new());
        let resonance = doc
            .conditions
            .resonance
            .first()
            .map(|r| r.status.clone())
            .unwrap_or_else(|| "none".into());
        aggregate
            .write_record([
                fmt_float(*x),
                fmt_float(doc.conditions.traditional_max.value),
                fmt_float(doc.conditions.sufficient_total),
                fmt_float(doc.evolution.final_fidelity),
                fmt_float(doc.conditions.epsilon_sum),
                resonance,
                doc.verdict.classification.clone(),
            ])
            .map_err(agg_err)?;
        csv.push((format!("timeseries_{k}.csv"), csv_bytes(out)?));
        reports.push(doc);
    }
    let agg = aggregate
        .into_inner()
        .map_err(|e| CliError::Io(io::Error::other(e.to_string())))?;
    csv.push(("sweep.csv".to_string(), agg));
    let doc = SweepDocument {
        parameter: &sweep.parameter,
        values: &sweep.values,
        reports,
    };
    emit(&cfg, &doc, csv)?;
    eprintln!("sweep: {} value(s) of {}", sweep.values.len(), sweep.parameter);
    Ok(())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Check(a) => cmd_check(a),
        Command::Dual(a) => cmd_dual(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}
