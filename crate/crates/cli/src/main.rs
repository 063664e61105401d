//! `ymhlab` — batch runner for the lab's check suites.
//!
//! Every subcommand writes `report.json` (deterministic for a fixed config and
//! seed), `timings.json` (wall clock, kept apart so reports stay
//! byte-identical) and one CSV per plotted series.
//!
//! Exit codes: 0 all metrics pass, 1 a metric or budget failed, 2 bad config.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;
use ymhlab::recovery::Scenario;
use ymhlab::suites::{self, Metric, Settings, SuiteOutput};
use ymhlab::LabError;

#[derive(Parser)]
#[command(name = "ymhlab", version, about = "Yang–Mills–Higgs lab experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pairing identity, equivariance and charge/faithfulness classification.
    AlgebraChecks(Common),
    /// Coupled transport: three routes and reparametrization.
    TransportChecks(Common),
    /// Gauge covariance of transports and field equations.
    GaugeChecks(Common),
    /// κ splitting and the threefold limit.
    InteractionSweep(Common),
    /// Direct solver and linearization checks; optional grid snapshots.
    YmhEvolve {
        #[command(flatten)]
        common: Common,
        /// Dump every K-th time level of a showcase run as flat binary.
        #[arg(long, value_name = "K")]
        snapshot_every: Option<usize>,
    },
    /// Higgs reconstruction; a config `scenario` replaces the built-in suite.
    RecoverHiggs(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Largest number of points per axis for the direct solver.
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
    /// Transport integrator tolerance.
    #[arg(long, value_name = "X")]
    tol: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    experiment: Option<String>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scenario: Option<Scenario>,
    /// Error budget for a scenario run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    snapshot_every: Option<usize>,
}

const DEFAULT_SCENARIO_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Error)]
enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lab(
                LabError::NoConvergence { .. }
                | LabError::FixedPointDivergence { .. }
                | LabError::IllConditioned(_)
                | LabError::NoValidPlacement(_),
            ) => 1,
            CliError::Output(_) | CliError::Csv(_) => 1,
            _ => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("ymhlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn name_of(cmd: &Command) -> &'static str {
    match cmd {
        Command::AlgebraChecks(_) => "algebra-checks",
        Command::TransportChecks(_) => "transport-checks",
        Command::GaugeChecks(_) => "gauge-checks",
        Command::InteractionSweep(_) => "interaction-sweep",
        Command::YmhEvolve { .. } => "ymh-evolve",
        Command::RecoverHiggs(_) => "recover-higgs",
    }
}

fn load_config(common: &Common, experiment: &str) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<ExperimentConfig>(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(name) = &cfg.experiment {
        if name != experiment {
            return Err(CliError::Config(format!("config is for `{name}`, not `{experiment}`")));
        }
    }
    cfg.experiment = Some(experiment.to_string());
    cfg.seed = common.seed.or(cfg.seed);
    cfg.grid = common.grid.or(cfg.grid);
    cfg.tol = common.tol.or(cfg.tol);
    cfg.out = common.out.clone().or(cfg.out);
    // scenario runs carry their own seeds
    if cfg.seed.is_none() && cfg.scenario.is_none() {
        return Err(CliError::Config("a seed is required (--seed or \"seed\")".into()));
    }
    if cfg.scenario.is_some() && experiment != "recover-higgs" {
        return Err(CliError::Config("`scenario` only applies to recover-higgs".into()));
    }
    if cfg.snapshot_every.is_some() && experiment != "ymh-evolve" {
        return Err(CliError::Config("`snapshot_every` only applies to ymh-evolve".into()));
    }
    if matches!(cfg.tol, Some(t) if !(t > 0.0)) || matches!(cfg.tolerance, Some(t) if !(t > 0.0)) {
        return Err(CliError::Config("tolerances must be positive".into()));
    }
    Ok(cfg)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("YMHLAB_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("YMHLAB_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn run(cmd: Command) -> Result<bool, CliError> {
    let experiment = name_of(&cmd);
    let (common, snapshot_flag) = match &cmd {
        Command::YmhEvolve { common, snapshot_every } => (common, *snapshot_every),
        Command::AlgebraChecks(c)
        | Command::TransportChecks(c)
        | Command::GaugeChecks(c)
        | Command::InteractionSweep(c)
        | Command::RecoverHiggs(c) => (c, None),
    };
    let mut cfg = load_config(common, experiment)?;
    cfg.snapshot_every = snapshot_flag.or(cfg.snapshot_every);
    if cfg.snapshot_every == Some(0) {
        return Err(CliError::Config("snapshot cadence must be ≥ 1".into()));
    }
    configure_threads()?;

    let settings = Settings { seed: cfg.seed.unwrap_or(0), grid: cfg.grid, tol: cfg.tol };
    let out_dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out").join(experiment));

    let mut metrics: BTreeMap<String, Metric> = BTreeMap::new();
    let mut series: BTreeMap<String, Vec<[f64; 2]>> = BTreeMap::new();
    let mut timings = Vec::new();
    let mut budgets_ok = true;
    let mut absorb = |prefix: &str, o: SuiteOutput| {
        for (k, m) in o.metrics {
            metrics.insert(format!("{prefix}.{k}"), m);
        }
        for (k, s) in o.series {
            series.insert(format!("{prefix}.{k}"), s);
        }
    };

    if let Some(scenario) = &cfg.scenario {
        let start = std::time::Instant::now();
        let o = suites::scenario_recovery(scenario, cfg.tolerance.unwrap_or(DEFAULT_SCENARIO_TOLERANCE))?;
        absorb("scenario", o);
        timings.push(json!({ "run": "scenario", "seconds": start.elapsed().as_secs_f64() }));
    } else {
        let ids = suites::SUBCOMMANDS.iter().find(|(n, _)| *n == experiment).map(|(_, ids)| *ids).unwrap_or(&[]);
        for &id in ids {
            let run = suites::run_criterion(id, &settings)?;
            eprintln!(
                "{} criterion {id} [{}] {:.1} s",
                if run.pass() { "PASS" } else { "FAIL" },
                run.title,
                run.seconds
            );
            budgets_ok &= run.within_budget();
            timings.push(json!({
                "run": format!("criterion{id}"),
                "title": run.title,
                "seconds": run.seconds,
                "budget": run.budget,
                "within_budget": run.within_budget(),
            }));
            absorb(&format!("criterion{id}"), run.output);
        }
    }

    fs::create_dir_all(&out_dir)?;
    if let Some(every) = cfg.snapshot_every {
        let start = std::time::Instant::now();
        write_snapshots(&out_dir, &settings, every)?;
        timings.push(json!({ "run": "snapshots", "seconds": start.elapsed().as_secs_f64() }));
    }

    let pass = metrics.values().all(|m| m.pass);
    let mut shown = cfg.clone();
    shown.out = None;
    let report = json!({
        "experiment": experiment,
        "config": shown,
        "metrics": metrics,
        "provenance": {
            "seed": cfg.seed,
            "versions": {
                "ymhlab": ymhlab::VERSION,
                "ymhlab-cli": env!("CARGO_PKG_VERSION"),
            },
        },
    });
    fs::write(out_dir.join("report.json"), serde_json::to_string_pretty(&report).expect("report serializes") + "\n")?;
    fs::write(
        out_dir.join("timings.json"),
        serde_json::to_string_pretty(&json!({ "runs": timings })).expect("timings serialize") + "\n",
    )?;
    for (name, s) in &series {
        write_series(&out_dir.join(format!("{name}.csv")), s)?;
    }
    for (name, m) in &metrics {
        println!("{} {name} = {:e} (tolerance {:e})", if m.pass { "ok  " } else { "FAIL" }, m.value, m.tolerance);
    }
    Ok(pass && budgets_ok)
}

fn write_series(path: &Path, s: &[[f64; 2]]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "y"])?;
    for [x, y] in s {
        w.serialize((x, y))?;
    }
    w.flush()?;
    Ok(())
}

fn write_snapshots(out_dir: &Path, settings: &Settings, every: usize) -> Result<(), CliError> {
    let sol = suites::showcase_evolution(settings)?;
    let dir = out_dir.join("snapshots");
    fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    for level in (0..=sol.grid.steps).step_by(every) {
        let name = format!("level_{level:05}.bin");
        let mut f = std::io::BufWriter::new(fs::File::create(dir.join(&name))?);
        sol.write_snapshot(level, &mut f)?;
        files.push(json!({ "level": level, "t": sol.grid.time(level), "file": name }));
    }
    let meta = json!({
        "grid": sol.grid,
        "algebra_dim": sol.n,
        "rep_dim": sol.d,
        "layout": "u64 points, n, d; f64 t, dt, dx; then W[node][alpha][i], Upsilon[node][r] as (re, im), J0[node][i]; little-endian",
        "snapshots": files,
    });
    fs::write(dir.join("snapshots.json"), serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n")?;
    Ok(())
}
