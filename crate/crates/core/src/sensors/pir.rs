//! Passive-infrared sensor on an oscillating mount.
//!
//! A PIR element only reacts to *changes* in incident infrared. A warm body
//! therefore triggers the sensor when it enters or leaves the cone, or when
//! its bearing in the sensor frame moves by at least
//! `min_relative_motion_rad` between ticks. Sweeping the sensor makes a
//! stationary body appear to move.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::drive::{normalize_angle, DriveParams, Pose};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PirConfig {
    pub range_m: f64,
    pub cone_half_angle_rad: f64,
    pub sweep_amplitude_rad: f64,
    pub sweep_period_s: f64,
    pub min_relative_motion_rad: f64,
    pub sweep_enabled: bool,
}

impl Default for PirConfig {
    fn default() -> Self {
        Self {
            range_m: 7.0,
            cone_half_angle_rad: 55f64.to_radians(),
            sweep_amplitude_rad: 90f64.to_radians(),
            sweep_period_s: 4.0,
            min_relative_motion_rad: 0.5f64.to_radians(),
            sweep_enabled: true,
        }
    }
}

impl PirConfig {
    /// Ticks in one full sweep cycle.
    pub fn sweep_period_ticks(&self, params: &DriveParams) -> u64 {
        (self.sweep_period_s / params.dt).round() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyKind {
    Human,
    Animal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmBody {
    pub id: u32,
    pub kind: BodyKind,
    pub position: [f64; 2],
    #[serde(default = "default_true")]
    pub stationary: bool,
}

fn default_true() -> bool {
    true
}

/// What the sensor saw of one body on the previous tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyObservation {
    pub in_cone: bool,
    pub bearing_rad: f64,
}

/// Per-body observations from the previous tick, keyed by body id.
pub type PirFrame = BTreeMap<u32, BodyObservation>;

#[derive(Debug, Clone, PartialEq)]
pub struct PirOutput {
    pub triggered: bool,
    pub detected: Vec<u32>,
    pub frame: PirFrame,
}

/// Mount angle relative to the robot heading at `tick`.
pub fn sweep_angle(tick: u64, cfg: &PirConfig, params: &DriveParams) -> f64 {
    if !cfg.sweep_enabled {
        return 0.0;
    }
    let t = tick as f64 * params.dt;
    cfg.sweep_amplitude_rad * (2.0 * PI * t / cfg.sweep_period_s).sin()
}

fn observe(pose: &Pose, boresight: f64, body: &WarmBody, cfg: &PirConfig) -> (f64, BodyObservation) {
    let dx = body.position[0] - pose.x_m;
    let dy = body.position[1] - pose.y_m;
    let distance = dx.hypot(dy);
    let bearing = normalize_angle(dy.atan2(dx) - boresight);
    let in_cone = distance <= cfg.range_m && bearing.abs() <= cfg.cone_half_angle_rad;
    (distance, BodyObservation { in_cone, bearing_rad: bearing })
}

/// Observe all bodies without evaluating triggers; used to seed the frame
/// before the first tick.
pub fn pir_frame(pose: &Pose, boresight: f64, bodies: &[WarmBody], cfg: &PirConfig) -> PirFrame {
    bodies.iter().map(|b| (b.id, observe(pose, boresight, b, cfg).1)).collect()
}

/// Evaluate the sensor for one tick. `boresight` is the absolute sensor
/// direction (robot heading plus mount angle).
///
/// The output line goes high on any cone edge or sufficient in-cone bearing
/// change. Only bodies within range are reported as detected, so a body
/// that leaves the cone by moving out of range raises the line without
/// being named.
pub fn pir_sense(
    pose: &Pose,
    boresight: f64,
    prev: &PirFrame,
    bodies: &[WarmBody],
    cfg: &PirConfig,
) -> PirOutput {
    let mut triggered = false;
    let mut detected = Vec::new();
    let mut frame = PirFrame::new();
    for body in bodies {
        let (distance, now) = observe(pose, boresight, body, cfg);
        let before = prev.get(&body.id).copied().unwrap_or(BodyObservation { in_cone: false, bearing_rad: now.bearing_rad });
        let edge = now.in_cone != before.in_cone;
        let moved = now.in_cone
            && normalize_angle(now.bearing_rad - before.bearing_rad).abs() >= cfg.min_relative_motion_rad;
        if edge || moved {
            triggered = true;
            if distance <= cfg.range_m {
                detected.push(body.id);
            }
        }
        frame.insert(body.id, now);
    }
    PirOutput { triggered, detected, frame }
}
