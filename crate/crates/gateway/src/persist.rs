//! Run persistence: `events.jsonl`, `metrics.json` and a `run.json` record.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use rover_core::world::{MetricsReport, TelemetryEvent};

pub const EVENTS_FILE: &str = "events.jsonl";
pub const METRICS_FILE: &str = "metrics.json";
pub const RECORD_FILE: &str = "run.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub seed: u64,
    /// Seconds since the Unix epoch.
    pub started_at: u64,
    pub events_path: PathBuf,
    pub metrics_path: PathBuf,
}

impl RunRecord {
    pub fn new(scenario: &str, seed: u64, dir: &Path) -> Self {
        Self {
            scenario: scenario.to_owned(),
            seed,
            started_at: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            events_path: dir.join(EVENTS_FILE),
            metrics_path: dir.join(METRICS_FILE),
        }
    }
}

pub fn event_line(e: &TelemetryEvent) -> String {
    serde_json::to_string(e).expect("events always serialize")
}

pub fn write_events(path: &Path, events: &[TelemetryEvent]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for e in events {
        writeln!(w, "{}", event_line(e))?;
    }
    w.flush()
}

pub fn write_metrics(path: &Path, m: &MetricsReport) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(m).expect("metrics always serialize");
    text.push('\n');
    fs::write(path, text)
}

pub fn write_record(dir: &Path, record: &RunRecord) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(record).expect("record always serializes");
    text.push('\n');
    fs::write(dir.join(RECORD_FILE), text)
}

/// Appends events as they happen, for live sessions.
#[derive(Debug)]
pub struct RunRecorder {
    record: RunRecord,
    events: BufWriter<File>,
}

impl RunRecorder {
    pub fn create(dir: &Path, scenario: &str, seed: u64) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        let record = RunRecord::new(scenario, seed, dir);
        let events = BufWriter::new(File::create(&record.events_path)?);
        write_record(dir, &record)?;
        Ok(Self { record, events })
    }

    pub fn record(&self) -> &RunRecord {
        &self.record
    }

    pub fn append(&mut self, events: &[TelemetryEvent]) -> io::Result<()> {
        for e in events {
            writeln!(self.events, "{}", event_line(e))?;
        }
        self.events.flush()
    }

    pub fn finish(mut self, metrics: &MetricsReport) -> io::Result<RunRecord> {
        self.events.flush()?;
        write_metrics(&self.record.metrics_path, metrics)?;
        Ok(self.record)
    }
}
