//! Scripted, unthrottled entry points.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use rover_core::trace::{GestureTrace, TraceError};
use rover_core::world::{load_scenario, run, MetricsReport, Scenario, ScenarioError};

use crate::persist::{self, RunRecord};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Scenario { path: PathBuf, source: ScenarioError },
    #[error("{path}: {source}")]
    Trace { path: PathBuf, source: TraceError },
}

impl CliError {
    /// 2 for unreadable input, 3 for content that fails validation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } => 2,
            CliError::Scenario { .. } | CliError::Trace { .. } => 3,
            CliError::Write { .. } => 1,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_owned(), source })
}

pub fn read_scenario(path: &Path) -> Result<Scenario, CliError> {
    load_scenario(&read(path)?).map_err(|source| CliError::Scenario { path: path.to_owned(), source })
}

fn read_trace(path: &Path) -> Result<GestureTrace, CliError> {
    GestureTrace::parse(&read(path)?).map_err(|source| CliError::Trace { path: path.to_owned(), source })
}

#[derive(Debug)]
pub struct SimulateOutput {
    pub metrics: MetricsReport,
    pub record: RunRecord,
    pub summary: String,
}

pub fn summary_line(m: &MetricsReport) -> String {
    format!(
        "{}: humans {}/{}, animals {}/{}, ticks {}, uplink delivery {:.4}, downlink delivery {:.4}",
        m.scenario,
        m.humans_detected,
        m.humans_total,
        m.animals_detected,
        m.animals_total,
        m.ticks_run,
        m.uplink.delivery_ratio(),
        m.downlink.delivery_ratio(),
    )
}

/// Run a scenario against a trace and write `events.jsonl`, `metrics.json`
/// and `run.json` into `out_dir`.
pub fn simulate(
    scenario_path: &Path,
    trace_path: &Path,
    out_dir: &Path,
    seed_override: Option<u64>,
) -> Result<SimulateOutput, CliError> {
    let mut scenario = read_scenario(scenario_path)?;
    let trace = read_trace(trace_path)?;
    if let Some(seed) = seed_override {
        scenario.seed = seed;
    }
    let name = scenario.name.clone();
    let seed = scenario.seed;
    let (sim, metrics) = run(scenario, &trace).map_err(|source| CliError::Trace { path: trace_path.to_owned(), source })?;

    let write_err = |path: &Path| {
        let path = path.to_owned();
        move |source| CliError::Write { path, source }
    };
    fs::create_dir_all(out_dir).map_err(write_err(out_dir))?;
    let record = RunRecord::new(&name, seed, out_dir);
    persist::write_events(&record.events_path, &sim.state().event_log).map_err(write_err(&record.events_path))?;
    persist::write_metrics(&record.metrics_path, &metrics).map_err(write_err(&record.metrics_path))?;
    persist::write_record(out_dir, &record).map_err(write_err(out_dir))?;

    let summary = summary_line(&metrics);
    Ok(SimulateOutput { metrics, record, summary })
}

/// Lines of the form `tick: Command`, one per classifier transition.
pub fn decode_trace(trace_path: &Path) -> Result<Vec<String>, CliError> {
    let trace = read_trace(trace_path)?;
    Ok(trace.command_transitions().into_iter().map(|(tick, cmd)| format!("{tick}: {cmd}")).collect())
}
