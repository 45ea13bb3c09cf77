//! Gesture trace files: CSV with header `tick,x_g,y_g`.

use std::collections::BTreeMap;

use serde::Deserialize;
use thiserror::Error;

use crate::gesture::{classify, sample_to_counts, AccelSample, DriveCommand};

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("trace is empty")]
    Empty,
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}: tick {tick} goes backwards")]
    NonMonotonic { line: u64, tick: u64 },
    #[error("tick {tick} is outside the run window [0, {max_ticks})")]
    OutOfWindow { tick: u64, max_ticks: u64 },
}

#[derive(Debug, Deserialize)]
struct Row {
    tick: u64,
    x_g: f64,
    y_g: f64,
}

/// Operator samples keyed by tick. A tick listed more than once keeps its
/// last sample.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GestureTrace {
    samples: BTreeMap<u64, AccelSample>,
}

impl GestureTrace {
    pub fn parse(text: &str) -> Result<Self, TraceError> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| TraceError::Malformed { line: 1, message: e.to_string() })?
            .clone();
        if headers.is_empty() {
            return Err(TraceError::Empty);
        }
        if headers.iter().collect::<Vec<_>>() != ["tick", "x_g", "y_g"] {
            return Err(TraceError::Malformed { line: 1, message: "expected header `tick,x_g,y_g`".into() });
        }
        let mut samples = BTreeMap::new();
        let mut last_tick = None;
        for record in reader.records() {
            let record = record.map_err(|e| TraceError::Malformed {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let row: Row = record
                .deserialize(Some(&headers))
                .map_err(|e| TraceError::Malformed { line, message: e.to_string() })?;
            if !row.x_g.is_finite() || !row.y_g.is_finite() {
                return Err(TraceError::Malformed { line, message: "non-finite acceleration".into() });
            }
            if last_tick.is_some_and(|t| row.tick < t) {
                return Err(TraceError::NonMonotonic { line, tick: row.tick });
            }
            last_tick = Some(row.tick);
            samples.insert(row.tick, AccelSample::new(row.tick, row.x_g, row.y_g));
        }
        if samples.is_empty() {
            return Err(TraceError::Empty);
        }
        Ok(Self { samples })
    }

    pub fn from_samples(samples: impl IntoIterator<Item = AccelSample>) -> Self {
        Self { samples: samples.into_iter().map(|s| (s.tick, s)).collect() }
    }

    pub fn sample_at(&self, tick: u64) -> Option<AccelSample> {
        self.samples.get(&tick).copied()
    }

    pub fn last_tick(&self) -> Option<u64> {
        self.samples.keys().next_back().copied()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> impl Iterator<Item = &AccelSample> {
        self.samples.values()
    }

    pub fn check_window(&self, max_ticks: u64) -> Result<(), TraceError> {
        match self.last_tick() {
            Some(tick) if tick >= max_ticks => Err(TraceError::OutOfWindow { tick, max_ticks }),
            _ => Ok(()),
        }
    }

    /// Classifier output at each tick where it changes, starting with the
    /// first sample.
    pub fn command_transitions(&self) -> Vec<(u64, DriveCommand)> {
        let mut out: Vec<(u64, DriveCommand)> = Vec::new();
        let mut prev = DriveCommand::Stop;
        for s in self.samples.values() {
            let cmd = classify(&sample_to_counts(s), prev);
            if out.is_empty() || cmd != prev {
                out.push((s.tick, cmd));
            }
            prev = cmd;
        }
        out
    }
}
