// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or payoff matrix error, 3 I/O
//! error, 4 infeasible mapping, 5 results schema or coverage error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::device::{heavy_hex_graph, load_calibration, load_coupling_map, synth_calibration, CalibrationProfile};
use crate::experiment::{run_sweep, Device, MappingMode, SweepRow, SweepSettings, EAGLE_DISTANCE};
use crate::game::{
    advantage_percent, classical_mixed_equilibrium, FormulaVariant, PayoffMatrix, StrategyKind,
    DEFAULT_GAMMA_STEPS,
};
use crate::gcm::{refine_mapping, select_pairs, verify_separation, MappingPlan, ScoreWeights, DEFAULT_MIN_SEPARATION};
use crate::noise::NoiseModel;
use crate::plot::render_svg;
use crate::stats::{build_validation_report, RmseMode};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;
pub const EXIT_SCHEMA: i32 = 5;

/// Payoff both players receive at maximal entanglement.
const QUANTUM_PAYOFF: f64 = 2.5;

/// Noise scale at which the mean H-strategy RMSE on the default synthetic
/// device (calibration seed 0, realistic profile, guided mapping) is 0.118.
pub const DEFAULT_NOISE_SCALE: f64 = 1.937;

pub const CSV_COLUMNS: [&str; 11] = [
    "strategy", "gamma", "run", "p00", "p01", "p10", "p11", "ea", "eb", "ea_analytic", "eb_analytic",
];

#[derive(Debug, Parser)]
#[command(name = "qbos", version, about = "Quantized Battle of the Sexes on a simulated heavy-hex device")]
pub struct Cli {
    /// JSON config file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classical mixed equilibrium and the entangled advantage.
    Equilibrium(EquilibriumArgs),
    /// Simulate every strategy over the entanglement grid and write CSV.
    Sweep(SweepArgs),
    /// Select (or refine) qubit pairs and print the plan.
    Map(MapArgs),
    /// Compare a sweep CSV with the reference curves.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct EquilibriumArgs {
    /// Payoff matrix JSON file, or `battle-of-the-sexes` / `identity-coordination`.
    #[arg(long)]
    pub matrix: Option<String>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args, Default)]
pub struct DeviceArgs {
    /// Coupling-map JSON; defaults to the 127-qubit heavy-hex lattice.
    #[arg(long, value_name = "PATH")]
    pub coupling_map: Option<PathBuf>,
    /// Calibration JSON; synthesized when absent.
    #[arg(long, value_name = "PATH")]
    pub calibration: Option<PathBuf>,
    /// Synthesize the calibration even if a file is configured.
    #[arg(long)]
    pub synth: bool,
    /// Synthetic calibration profile: uniform or realistic.
    #[arg(long)]
    pub profile: Option<String>,
    /// Seed for shot sampling.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Seed for the synthetic calibration.
    #[arg(long)]
    pub calibration_seed: Option<u64>,
    #[arg(long, value_name = "S")]
    pub min_separation: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub device: DeviceArgs,
    #[arg(long)]
    pub gamma_steps: Option<usize>,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// Comma-separated, e.g. `I,H,RY(pi/4),RY(pi)`.
    #[arg(long)]
    pub strategies: Option<String>,
    #[arg(long)]
    pub noise_scale: Option<f64>,
    #[arg(long)]
    pub crosstalk_penalty: Option<f64>,
    /// Pack pairs in index order instead of guided selection.
    #[arg(long)]
    pub no_gcm: bool,
    #[arg(long, value_name = "published|corrected")]
    pub formula_variant: Option<String>,
    /// CSV destination; standard output when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Also write an SVG plot (next to `--out` when no path is given).
    #[arg(long, value_name = "PATH", num_args = 0..=1)]
    pub svg: Option<Option<PathBuf>>,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[command(flatten)]
    pub device: DeviceArgs,
    #[arg(long, value_name = "K")]
    pub pairs: Option<usize>,
    /// Existing plan to refine with `--feedback`.
    #[arg(long, value_name = "PATH", requires = "feedback")]
    pub plan: Option<PathBuf>,
    /// JSON array of per-circuit error figures.
    #[arg(long, value_name = "PATH", requires = "plan")]
    pub feedback: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Sweep CSV.
    pub results: PathBuf,
    #[arg(long, value_name = "published|corrected")]
    pub formula_variant: Option<String>,
    #[arg(long, value_name = "mean-of-runs|per-run-average")]
    pub rmse_mode: Option<String>,
    #[arg(long)]
    pub json: bool,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub svg: Option<PathBuf>,
}

/// Values accepted in the `--config` file. Every field is optional.
#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub gamma_steps: Option<usize>,
    pub shots: Option<u64>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub calibration_seed: Option<u64>,
    pub strategies: Option<Vec<StrategyKind>>,
    pub noise_scale: Option<f64>,
    pub crosstalk_penalty: Option<f64>,
    pub coupling_map: Option<PathBuf>,
    pub calibration: Option<PathBuf>,
    pub profile: Option<String>,
    pub pairs: Option<usize>,
    pub min_separation: Option<usize>,
    pub out: Option<PathBuf>,
    pub formula_variant: Option<FormulaVariant>,
    pub rmse_mode: Option<RmseMode>,
    pub matrix: Option<String>,
}

struct Failure {
    code: i32,
    message: String,
}

type CliResult<T> = std::result::Result<T, Failure>;

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

/// Default exit code for a library error.
fn code_for(err: &Error) -> i32 {
    match err {
        Error::Io { .. } => EXIT_IO,
        Error::Infeasible { .. } => EXIT_INFEASIBLE,
        _ => EXIT_CONFIG,
    }
}

fn lib(err: Error) -> Failure {
    fail(code_for(&err), err.to_string())
}

fn load_config(path: Option<&Path>) -> CliResult<ConfigFile> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| fail(EXIT_IO, format!("reading config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| fail(EXIT_CONFIG, format!("config {}: {e}", path.display())))
}

fn parse_flag<T: std::str::FromStr<Err = Error>>(value: &str) -> CliResult<T> {
    value.parse().map_err(|e: Error| fail(EXIT_CONFIG, e.to_string()))
}

fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| fail(EXIT_IO, format!("writing {}: {e}", path.display())))
}

/// Parses a payoff matrix from JSON `[[[a00,b00],[a01,b01]],[[a10,b10],[a11,b11]]]`,
/// optionally wrapped as `{"cells": ...}`.
pub fn parse_payoff_matrix(text: &str) -> crate::Result<PayoffMatrix> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::from_json(&e))?;
    let cells = value.get("cells").unwrap_or(&value);
    let rows = cells
        .as_array()
        .filter(|r| r.len() == 2)
        .ok_or_else(|| Error::Validation("payoff matrix must have 2 rows".into()))?;
    let mut out = [[(0.0, 0.0); 2]; 2];
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .filter(|r| r.len() == 2)
            .ok_or_else(|| Error::Validation(format!("payoff row {i} must have 2 cells")))?;
        for (j, cell) in row.iter().enumerate() {
            let pair = cell
                .as_array()
                .filter(|c| c.len() == 2)
                .and_then(|c| Some((c[0].as_f64()?, c[1].as_f64()?)))
                .ok_or_else(|| {
                    Error::Validation(format!(
                        "payoff cell [{i}][{j}] must be a pair of numbers [alice, bob], got {cell}"
                    ))
                })?;
            out[i][j] = pair;
        }
    }
    PayoffMatrix::new(out)
}

fn resolve_matrix(spec: Option<&str>) -> CliResult<PayoffMatrix> {
    match spec {
        None | Some("battle-of-the-sexes") => Ok(PayoffMatrix::battle_of_the_sexes()),
        Some("identity-coordination") => Ok(PayoffMatrix::identity_coordination()),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| fail(EXIT_CONFIG, format!("reading matrix {path}: {e}")))?;
            parse_payoff_matrix(&text).map_err(|e| fail(EXIT_CONFIG, format!("matrix {path}: {e}")))
        }
    }
}

#[derive(Serialize)]
struct EquilibriumReport {
    p_alice: f64,
    q_bob: f64,
    e_a: f64,
    e_b: f64,
    coordination_prob: f64,
    miscoordination_prob: f64,
    quantum_payoff: f64,
    advantage_percent_a: f64,
    advantage_percent_b: f64,
}

fn cmd_equilibrium(args: &EquilibriumArgs, cfg: &ConfigFile, out: &mut dyn Write) -> CliResult<()> {
    let matrix = resolve_matrix(args.matrix.as_deref().or(cfg.matrix.as_deref()))?;
    let eq = classical_mixed_equilibrium(&matrix).map_err(|e| fail(EXIT_CONFIG, e.to_string()))?;
    let report = EquilibriumReport {
        p_alice: eq.p_alice,
        q_bob: eq.q_bob,
        e_a: eq.e_a,
        e_b: eq.e_b,
        coordination_prob: eq.coordination_prob,
        miscoordination_prob: 1.0 - eq.coordination_prob,
        quantum_payoff: QUANTUM_PAYOFF,
        advantage_percent_a: advantage_percent(QUANTUM_PAYOFF, eq.e_a).map_err(lib)?,
        advantage_percent_b: advantage_percent(QUANTUM_PAYOFF, eq.e_b).map_err(lib)?,
    };
    let text = if args.json {
        format!("{}\n", serde_json::to_string_pretty(&report).expect("serializable"))
    } else {
        format!(
            "p (Alice plays action 0): {:.4}\n\
             q (Bob plays action 0):   {:.4}\n\
             e_a: {:.4}\n\
             e_b: {:.4}\n\
             coordination probability:    {:.4}\n\
             miscoordination probability: {:.4}\n\
             entangled payoff: {QUANTUM_PAYOFF}\n\
             advantage: Alice {:.2}%, Bob {:.2}%\n",
            report.p_alice,
            report.q_bob,
            report.e_a,
            report.e_b,
            report.coordination_prob,
            report.miscoordination_prob,
            report.advantage_percent_a,
            report.advantage_percent_b,
        )
    };
    out.write_all(text.as_bytes()).map_err(|e| fail(EXIT_IO, e.to_string()))
}

fn resolve_device(args: &DeviceArgs, cfg: &ConfigFile) -> CliResult<Device> {
    let seed = args.calibration_seed.or(cfg.calibration_seed).unwrap_or(0);
    let graph = match args.coupling_map.as_ref().or(cfg.coupling_map.as_ref()) {
        Some(p) => load_coupling_map(p).map_err(lib)?,
        None => heavy_hex_graph(EAGLE_DISTANCE).map_err(lib)?,
    };
    let calibration_path = if args.synth {
        None
    } else {
        args.calibration.as_ref().or(cfg.calibration.as_ref())
    };
    let calibration = match calibration_path {
        Some(p) => load_calibration(p).map_err(lib)?,
        None => {
            let profile: CalibrationProfile = match args.profile.as_deref().or(cfg.profile.as_deref()) {
                Some(p) => parse_flag(p)?,
                None => CalibrationProfile::default(),
            };
            synth_calibration(&graph, seed, profile)
        }
    };
    Device::new(graph, calibration).map_err(lib)
}

fn min_separation(args: &DeviceArgs, cfg: &ConfigFile) -> usize {
    args.min_separation
        .or(cfg.min_separation)
        .unwrap_or(DEFAULT_MIN_SEPARATION)
}

fn parse_strategies(list: &str) -> CliResult<Vec<StrategyKind>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse_flag)
        .collect()
}

fn sweep_settings(args: &SweepArgs, cfg: &ConfigFile) -> CliResult<SweepSettings> {
    let strategies = match (&args.strategies, &cfg.strategies) {
        (Some(list), _) => parse_strategies(list)?,
        (None, Some(list)) => list.clone(),
        (None, None) => StrategyKind::standard_set().to_vec(),
    };
    let variant = match &args.formula_variant {
        Some(v) => parse_flag(v)?,
        None => cfg.formula_variant.unwrap_or_default(),
    };
    let settings = SweepSettings {
        gamma_steps: args.gamma_steps.or(cfg.gamma_steps).unwrap_or(DEFAULT_GAMMA_STEPS),
        shots: args.shots.or(cfg.shots).unwrap_or(2048),
        runs: args.runs.or(cfg.runs).unwrap_or(5),
        seed: args.device.seed.or(cfg.seed).unwrap_or(0),
        strategies,
        noise: NoiseModel {
            scale: args.noise_scale.or(cfg.noise_scale).unwrap_or(DEFAULT_NOISE_SCALE),
            crosstalk_penalty: args
                .crosstalk_penalty
                .or(cfg.crosstalk_penalty)
                .unwrap_or(NoiseModel::default().crosstalk_penalty),
            ..NoiseModel::default()
        },
        mapping: if args.no_gcm {
            MappingMode::Packed
        } else {
            MappingMode::Guided {
                min_separation: min_separation(&args.device, cfg),
            }
        },
        variant,
    };
    settings.validate().map_err(lib)?;
    Ok(settings)
}

/// Shortest round-trip decimal form.
fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.strategy.to_string(),
            num(r.gamma),
            r.run.to_string(),
            num(r.p00),
            num(r.p01),
            num(r.p10),
            num(r.p11),
            num(r.ea),
            num(r.eb),
            num(r.ea_analytic),
            num(r.eb_analytic),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// Reads a sweep CSV, reporting missing columns and malformed rows.
pub fn parse_sweep_csv(text: &str) -> crate::Result<Vec<SweepRow>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Validation(format!("unreadable header: {e}")))?
        .clone();
    let missing: Vec<&str> = CSV_COLUMNS
        .iter()
        .copied()
        .filter(|c| !headers.iter().any(|h| h == *c))
        .collect();
    let unknown: Vec<&str> = headers.iter().filter(|h| !CSV_COLUMNS.contains(h)).collect();
    if !missing.is_empty() || !unknown.is_empty() {
        return Err(Error::Validation(format!(
            "bad columns: missing [{}], unexpected [{}]",
            missing.join(", "),
            unknown.join(", ")
        )));
    }
    let col = |name: &str| headers.iter().position(|h| h == name).expect("checked");
    let idx: Vec<usize> = CSV_COLUMNS.iter().map(|c| col(c)).collect();
    let mut rows = Vec::new();
    for (n, record) in reader.records().enumerate() {
        let line = n + 2;
        let record = record.map_err(|e| Error::Parse {
            line,
            column: 0,
            message: e.to_string(),
        })?;
        let field = |k: usize| record.get(idx[k]).unwrap_or("");
        let float = |k: usize| -> crate::Result<f64> {
            field(k).trim().parse::<f64>().map_err(|_| Error::Parse {
                line,
                column: idx[k] + 1,
                message: format!("{} = {:?} is not a number", CSV_COLUMNS[k], field(k)),
            })
        };
        let strategy: StrategyKind = field(0).parse().map_err(|e: Error| Error::Parse {
            line,
            column: idx[0] + 1,
            message: e.to_string(),
        })?;
        let run = field(2).trim().parse::<usize>().map_err(|_| Error::Parse {
            line,
            column: idx[2] + 1,
            message: format!("run = {:?} is not an integer", field(2)),
        })?;
        rows.push(SweepRow {
            strategy,
            gamma: float(1)?,
            run,
            p00: float(3)?,
            p01: float(4)?,
            p10: float(5)?,
            p11: float(6)?,
            ea: float(7)?,
            eb: float(8)?,
            ea_analytic: float(9)?,
            eb_analytic: float(10)?,
        });
    }
    if rows.is_empty() {
        return Err(Error::Validation("results file has no rows".into()));
    }
    Ok(rows)
}

fn report_for(rows: &[SweepRow], variant: FormulaVariant, mode: RmseMode) -> crate::Result<crate::stats::ValidationReport> {
    let obs: Vec<_> = rows.iter().map(SweepRow::observation).collect();
    build_validation_report(&obs, None, variant, mode)
}

fn cmd_sweep(args: &SweepArgs, cfg: &ConfigFile, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let settings = sweep_settings(args, cfg)?;
    let device = resolve_device(&args.device, cfg)?;
    let rows = run_sweep(&device, &settings).map_err(lib)?;
    let csv_text = rows_to_csv(&rows);
    let out_path = args.out.as_ref().or(cfg.out.as_ref());
    match out_path {
        Some(p) => {
            write_file(p, csv_text.as_bytes())?;
            let _ = writeln!(err, "wrote {} rows to {}", rows.len(), p.display());
        }
        None => out.write_all(csv_text.as_bytes()).map_err(|e| fail(EXIT_IO, e.to_string()))?,
    }
    if let Some(svg) = &args.svg {
        let path = match (svg, out_path) {
            (Some(p), _) => p.clone(),
            (None, Some(o)) => o.with_extension("svg"),
            (None, None) => return Err(fail(EXIT_CONFIG, "--svg without a path needs --out")),
        };
        if settings.runs < 2 {
            return Err(fail(EXIT_CONFIG, "--svg needs at least 2 runs for confidence intervals"));
        }
        let report = report_for(&rows, settings.variant, RmseMode::default()).map_err(lib)?;
        write_file(&path, render_svg(&report).as_bytes())?;
    }
    Ok(())
}

fn cmd_map(args: &MapArgs, cfg: &ConfigFile, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let device = resolve_device(&args.device, cfg)?;
    let plan = match (&args.plan, &args.feedback) {
        (Some(plan_path), Some(fb_path)) => {
            let plan_text = fs::read_to_string(plan_path)
                .map_err(|e| fail(EXIT_IO, format!("reading {}: {e}", plan_path.display())))?;
            let plan = MappingPlan::from_json(&plan_text).map_err(|e| fail(EXIT_CONFIG, e.to_string()))?;
            let fb_text = fs::read_to_string(fb_path)
                .map_err(|e| fail(EXIT_IO, format!("reading {}: {e}", fb_path.display())))?;
            let feedback: Vec<f64> = serde_json::from_str(&fb_text)
                .map_err(|e| fail(EXIT_CONFIG, format!("feedback {}: {e}", fb_path.display())))?;
            refine_mapping(&plan, &feedback, &device.calibration, &device.graph).map_err(lib)?
        }
        _ => {
            let k = args.pairs.or(cfg.pairs).unwrap_or(DEFAULT_GAMMA_STEPS);
            select_pairs(&device.graph, &device.calibration, k, min_separation(&args.device, cfg))
                .map_err(lib)?
        }
    };
    let check = verify_separation(&plan, &device.graph);
    let score = plan
        .total_score(&device.calibration, &ScoreWeights::default())
        .map_err(lib)?;
    let verdict = match &check.violation {
        None => "OK".to_string(),
        Some(v) => format!("FAILED ({v})"),
    };
    let summary = format!(
        "pairs: {}\nqubits: {}\ntotal score: {score:.6}\nseparation check (min {}): {verdict}\n",
        plan.len(),
        plan.qubits().len(),
        plan.min_separation
    );
    let json = format!("{}\n", plan.to_json());
    match args.out.as_ref().or(cfg.out.as_ref()) {
        Some(p) => {
            write_file(p, json.as_bytes())?;
            out.write_all(summary.as_bytes()).map_err(|e| fail(EXIT_IO, e.to_string()))?;
        }
        None => {
            out.write_all(json.as_bytes()).map_err(|e| fail(EXIT_IO, e.to_string()))?;
            let _ = err.write_all(summary.as_bytes());
        }
    }
    if !check.ok {
        return Err(fail(EXIT_INFEASIBLE, format!("plan violates separation: {verdict}")));
    }
    Ok(())
}

fn cmd_validate(args: &ValidateArgs, cfg: &ConfigFile, out: &mut dyn Write) -> CliResult<()> {
    let variant = match &args.formula_variant {
        Some(v) => parse_flag(v)?,
        None => cfg.formula_variant.unwrap_or_default(),
    };
    let mode = match &args.rmse_mode {
        Some(m) => parse_flag(m)?,
        None => cfg.rmse_mode.unwrap_or_default(),
    };
    let text = fs::read_to_string(&args.results)
        .map_err(|e| fail(EXIT_IO, format!("reading {}: {e}", args.results.display())))?;
    let rows = parse_sweep_csv(&text).map_err(|e| fail(EXIT_SCHEMA, e.to_string()))?;
    let report = report_for(&rows, variant, mode).map_err(|e| fail(EXIT_SCHEMA, e.to_string()))?;
    let body = if args.json {
        format!("{}\n", serde_json::to_string_pretty(&report).expect("serializable"))
    } else {
        report.to_text_table()
    };
    match &args.out {
        Some(p) => write_file(p, body.as_bytes())?,
        None => out.write_all(body.as_bytes()).map_err(|e| fail(EXIT_IO, e.to_string()))?,
    }
    if let Some(p) = &args.svg {
        write_file(p, render_svg(&report).as_bytes())?;
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = out.write_all(rendered.as_bytes());
            } else {
                let _ = err.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    let result = load_config(cli.config.as_deref()).and_then(|cfg| match &cli.command {
        Command::Equilibrium(a) => cmd_equilibrium(a, &cfg, out),
        Command::Sweep(a) => cmd_sweep(a, &cfg, out, err),
        Command::Map(a) => cmd_map(a, &cfg, out, err),
        Command::Validate(a) => cmd_validate(a, &cfg, out),
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
