use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::drive::Pose;
use crate::radio::LinkStats;

/// Summary of one run, written as `metrics.json`.
///
/// Runs are bounded by `max_ticks` only. The field endurance of the real
/// rover (about 72 hours) is context, not a simulated time limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub scenario: String,
    pub seed: u64,
    pub ticks_run: u64,
    pub humans_detected: u64,
    pub humans_total: u64,
    pub animals_detected: u64,
    pub animals_total: u64,
    /// Detection events whose frame reached the base.
    pub detections_delivered: u64,
    pub tick_of_first_detection: BTreeMap<u32, u64>,
    pub uplink: LinkStats,
    pub downlink: LinkStats,
    pub distance_traveled_m: f64,
    pub gas_alarms: u64,
    pub auto_stops: u64,
    pub final_pose: Pose,
}
