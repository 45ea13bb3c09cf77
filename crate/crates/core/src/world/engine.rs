//! Fixed-timestep engine tying the control unit, radio, drive train and
//! sensors into one tick pipeline.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::drive::{command_to_pins, integrate_pose, pins_to_wheel_speeds, DriveParams, Pose};
use crate::gesture::{classify, command_code, decode_command, sample_to_counts, AccelSample, DriveCommand};
use crate::radio::{loss_probability, DeliveryResult, Frame, FrameType, Link, BASE_ADDR, ROVER_ADDR};
use crate::sensors::{
    camera_capture, gas_sense, pir_frame, pir_sense, sweep_angle, BodyKind, CameraSnapshot, GasReading, PirConfig,
    PirFrame,
};
use crate::terrain::Terrain;
use crate::trace::{GestureTrace, TraceError};

use super::metrics::MetricsReport;
use super::scenario::Scenario;
use super::telemetry::{encode_detection, encode_gas, encode_status, EventKind, StatusReport, TelemetryEvent};

const UPLINK_STREAM: u64 = 1;
const DOWNLINK_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EngineConfig {
    pub drive: DriveParams,
    pub pir: PirConfig,
    /// Ticks between status events.
    pub status_every: u64,
    /// Consecutive ticks without a delivered command after which the rover
    /// halts on its own.
    pub auto_stop_after: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { drive: DriveParams::default(), pir: PirConfig::default(), status_every: 10, auto_stop_after: 40 }
    }
}

/// Everything that changes from tick to tick.
#[derive(Debug, Clone)]
pub struct SimState {
    pub tick: u64,
    pub robot_pose: Pose,
    /// Command the rover is executing.
    pub current_command: DriveCommand,
    /// Last classifier output on the control unit.
    pub operator_command: DriveCommand,
    pub pir_frame: PirFrame,
    pub uplink: Link,
    pub downlink: Link,
    pub event_log: Vec<TelemetryEvent>,
    pub detected_ids: BTreeSet<u32>,
    pub ticks_without_command: u64,
    pub gas: GasReading,
    pub distance_traveled_m: f64,
    pub first_detection_tick: BTreeMap<u32, u64>,
    pub gas_alarms: u64,
    pub auto_stops: u64,
    /// Consecutive ticks with the rover halted and not moving.
    pub idle_ticks: u64,
}

/// Keep the proposed heading but refuse translation into rubble or out of
/// the world.
pub fn move_with_collision(old: &Pose, proposed: &Pose, terrain: &Terrain) -> Pose {
    if terrain.is_blocked(proposed.x_m, proposed.y_m) {
        Pose { x_m: old.x_m, y_m: old.y_m, heading_rad: proposed.heading_rad }
    } else {
        *proposed
    }
}

#[derive(Debug, Clone)]
pub struct Simulation {
    scenario: Scenario,
    config: EngineConfig,
    state: SimState,
}

impl Simulation {
    pub fn new(scenario: Scenario) -> Self {
        Self::with_config(scenario, EngineConfig::default())
    }

    pub fn with_config(scenario: Scenario, config: EngineConfig) -> Self {
        let pose = scenario.robot_start;
        let boresight = pose.heading_rad + sweep_angle(0, &config.pir, &config.drive);
        let state = SimState {
            tick: 0,
            robot_pose: pose,
            current_command: DriveCommand::Stop,
            operator_command: DriveCommand::Stop,
            pir_frame: pir_frame(&pose, boresight, &scenario.bodies, &config.pir),
            uplink: Link::new(scenario.seed, UPLINK_STREAM),
            downlink: Link::new(scenario.seed, DOWNLINK_STREAM),
            event_log: Vec::new(),
            detected_ids: BTreeSet::new(),
            ticks_without_command: 0,
            gas: gas_sense((pose.x_m, pose.y_m), &scenario.gas_sources),
            distance_traveled_m: 0.0,
            first_detection_tick: BTreeMap::new(),
            gas_alarms: 0,
            auto_stops: 0,
            idle_ticks: 0,
        };
        Self { scenario, config, state }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    /// Direct access for hosts and tests that need to stage a situation.
    pub fn state_mut(&mut self) -> &mut SimState {
        &mut self.state
    }

    pub fn set_sweep_enabled(&mut self, enabled: bool) {
        self.config.pir.sweep_enabled = enabled;
    }

    pub fn distance_to_base(&self) -> f64 {
        let [bx, by] = self.scenario.base_position;
        self.state.robot_pose.distance_to(bx, by)
    }

    pub fn uplink_loss_probability(&self) -> f64 {
        loss_probability(self.distance_to_base())
    }

    pub fn camera(&self) -> CameraSnapshot {
        camera_capture(&self.state.robot_pose, &self.scenario.terrain)
    }

    /// Advance one tick. Returns the events appended during this tick.
    pub fn step(&mut self, operator_sample: Option<AccelSample>) -> &[TelemetryEvent] {
        let first_new = self.state.event_log.len();
        let tick = self.state.tick;

        self.uplink_phase(operator_sample);
        self.drive_phase();
        self.pir_phase(tick);
        self.gas_phase(tick);
        if tick % self.config.status_every == 0 {
            let report = StatusReport {
                pose: self.state.robot_pose,
                command: self.state.current_command,
                uplink: self.state.uplink.stats,
                downlink: self.state.downlink.stats,
            };
            let payload = encode_status(&report);
            self.emit(tick, EventKind::Status(report), FrameType::Status, payload);
        }

        self.state.tick += 1;
        &self.state.event_log[first_new..]
    }

    fn uplink_phase(&mut self, sample: Option<AccelSample>) {
        let distance = self.distance_to_base();
        let st = &mut self.state;
        st.uplink.channel.distance_m = distance;

        let mut received = None;
        if let Some(sample) = sample {
            let cmd = classify(&sample_to_counts(&sample), st.operator_command);
            st.operator_command = cmd;
            let frame = Frame::new(BASE_ADDR, FrameType::Drive, vec![command_code(cmd)])
                .expect("one-byte payload");
            if let (_, Some(rx)) = st.uplink.send(&frame) {
                received = rx.payload.first().and_then(|&b| decode_command(b).ok());
            }
        }

        match received {
            Some(cmd) => {
                st.current_command = cmd;
                st.ticks_without_command = 0;
            }
            None => {
                st.ticks_without_command += 1;
                if st.ticks_without_command > self.config.auto_stop_after && st.current_command != DriveCommand::Stop {
                    st.current_command = DriveCommand::Stop;
                    st.auto_stops += 1;
                }
            }
        }
    }

    fn drive_phase(&mut self) {
        let params = &self.config.drive;
        let st = &mut self.state;
        let (v_left, v_right) = pins_to_wheel_speeds(&command_to_pins(st.current_command), params);
        let old = st.robot_pose;
        let proposed = integrate_pose(&old, v_left, v_right, params);
        let next = move_with_collision(&old, &proposed, &self.scenario.terrain);
        let moved = next.distance_to(old.x_m, old.y_m);
        st.distance_traveled_m += moved;
        st.robot_pose = next;
        if st.current_command == DriveCommand::Stop && moved == 0.0 {
            st.idle_ticks += 1;
        } else {
            st.idle_ticks = 0;
        }
    }

    fn pir_phase(&mut self, tick: u64) {
        let pose = self.state.robot_pose;
        let boresight = pose.heading_rad + sweep_angle(tick, &self.config.pir, &self.config.drive);
        let out = pir_sense(&pose, boresight, &self.state.pir_frame, &self.scenario.bodies, &self.config.pir);
        self.state.pir_frame = out.frame;
        for id in out.detected {
            if !self.state.detected_ids.insert(id) {
                continue;
            }
            let kind = self
                .scenario
                .bodies
                .iter()
                .find(|b| b.id == id)
                .map(|b| b.kind)
                .expect("detected id belongs to a scenario body");
            self.state.first_detection_tick.insert(id, tick);
            self.emit(
                tick,
                EventKind::Detection { body_id: id, body_kind: kind },
                FrameType::PirDetection,
                encode_detection(id, kind),
            );
        }
    }

    fn gas_phase(&mut self, tick: u64) {
        let pose = self.state.robot_pose;
        let reading = gas_sense((pose.x_m, pose.y_m), &self.scenario.gas_sources);
        let was_alarm = self.state.gas.alarm;
        self.state.gas = reading;
        if reading.alarm && !was_alarm {
            self.state.gas_alarms += 1;
            self.emit(tick, EventKind::GasAlarm(reading), FrameType::Gas, encode_gas(&reading));
        }
    }

    fn emit(&mut self, tick: u64, event: EventKind, ftype: FrameType, payload: Vec<u8>) {
        self.state.downlink.channel.distance_m = self.distance_to_base();
        let frame = Frame::new(ROVER_ADDR, ftype, payload).expect("telemetry payloads fit in a frame");
        let (result, _) = self.state.downlink.send(&frame);
        let (delivered, attempts) = match result {
            DeliveryResult::Delivered { attempts_used } => (true, attempts_used),
            DeliveryResult::Dropped { attempts } => (false, attempts),
        };
        self.state.event_log.push(TelemetryEvent { tick, event, delivered, attempts });
    }

    pub fn metrics(&self) -> MetricsReport {
        let st = &self.state;
        let count = |kind: BodyKind| self.scenario.bodies.iter().filter(|b| b.kind == kind).count() as u64;
        let detected = |kind: BodyKind| {
            self.scenario.bodies.iter().filter(|b| b.kind == kind && st.detected_ids.contains(&b.id)).count() as u64
        };
        let reported = st
            .event_log
            .iter()
            .filter(|e| e.delivered && matches!(e.event, EventKind::Detection { .. }))
            .count() as u64;
        MetricsReport {
            scenario: self.scenario.name.clone(),
            seed: self.scenario.seed,
            ticks_run: st.tick,
            humans_detected: detected(BodyKind::Human),
            humans_total: count(BodyKind::Human),
            animals_detected: detected(BodyKind::Animal),
            animals_total: count(BodyKind::Animal),
            detections_delivered: reported,
            tick_of_first_detection: st.first_detection_tick.clone(),
            uplink: st.uplink.stats,
            downlink: st.downlink.stats,
            distance_traveled_m: st.distance_traveled_m,
            gas_alarms: st.gas_alarms,
            auto_stops: st.auto_stops,
            final_pose: st.robot_pose,
        }
    }
}

/// Run a scenario headless against a recorded trace.
///
/// Stops at `max_ticks`, or earlier once the trace is exhausted and the
/// rover has sat halted for a full PIR sweep period.
pub fn run(scenario: Scenario, trace: &GestureTrace) -> Result<(Simulation, MetricsReport), TraceError> {
    run_with_config(scenario, trace, EngineConfig::default())
}

pub fn run_with_config(
    scenario: Scenario,
    trace: &GestureTrace,
    config: EngineConfig,
) -> Result<(Simulation, MetricsReport), TraceError> {
    trace.check_window(scenario.max_ticks)?;
    let quiet_after = config.pir.sweep_period_ticks(&config.drive).max(1);
    let last_sample = trace.last_tick();
    let max_ticks = scenario.max_ticks;
    let mut sim = Simulation::with_config(scenario, config);
    while sim.state.tick < max_ticks {
        let tick = sim.state.tick;
        sim.step(trace.sample_at(tick));
        let trace_done = last_sample.is_none_or(|last| tick >= last);
        if trace_done && sim.state.idle_ticks >= quiet_after {
            break;
        }
    }
    let metrics = sim.metrics();
    Ok((sim, metrics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensors::WarmBody;
    use crate::world::scenario::load_scenario;

    fn open_field(extra: &str) -> Scenario {
        load_scenario(&format!(
            r#"{{"world_size_m": [40, 40], "robot_start": {{"x_m": 5, "y_m": 20, "heading_rad": 0}},
                "base_position": [5, 20], "seed": 7, "max_ticks": 2000 {extra}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn forward_tilt_at_base_moves_one_tick() {
        let mut sim = Simulation::new(open_field(""));
        sim.step(Some(AccelSample::new(0, 0.0, 1.0)));
        assert_eq!(sim.state().current_command, DriveCommand::Forward);
        assert!((sim.state().robot_pose.x_m - 5.025).abs() < 1e-12);
        assert_eq!(sim.state().uplink.stats.frames_delivered, 1);
    }

    #[test]
    fn held_command_without_samples() {
        let mut sim = Simulation::new(open_field(""));
        sim.step(Some(AccelSample::new(0, 0.0, 1.0)));
        for _ in 1..30 {
            sim.step(None);
        }
        let st = sim.state();
        assert_eq!(st.current_command, DriveCommand::Forward);
        assert!((st.robot_pose.x_m - (5.0 + 30.0 * 0.025)).abs() < 1e-9);
        assert!(st.event_log.iter().all(|e| matches!(e.event, EventKind::Status(_))));
        assert_eq!(st.event_log.iter().map(|e| e.tick).collect::<Vec<_>>(), vec![0, 10, 20]);
        assert_eq!(st.uplink.stats.frames_sent, 1);
    }

    #[test]
    fn auto_stop_after_silence() {
        let mut sim = Simulation::new(open_field(""));
        sim.step(Some(AccelSample::new(0, 0.0, 1.0)));
        for _ in 0..100 {
            sim.step(None);
        }
        let st = sim.state();
        assert_eq!(st.current_command, DriveCommand::Stop);
        assert_eq!(st.auto_stops, 1);
        // One commanded tick plus forty held ticks.
        assert!((st.distance_traveled_m - 41.0 * 0.025).abs() < 1e-9);
    }

    #[test]
    fn collision_keeps_position_but_turns() {
        let mut t = Terrain::open(10.0, 10.0);
        t.rubble.insert((8, 4));
        let old = Pose::new(1.9, 1.1, 0.0);
        let into_rubble = Pose::new(2.05, 1.1, 0.2);
        assert_eq!(move_with_collision(&old, &into_rubble, &t), Pose::new(1.9, 1.1, 0.2));
        let outside = Pose::new(-0.01, 1.1, -0.3);
        assert_eq!(move_with_collision(&old, &outside, &t), Pose::new(1.9, 1.1, -0.3));
        let free = Pose::new(1.95, 1.3, 0.1);
        assert_eq!(move_with_collision(&old, &free, &t), free);
    }

    #[test]
    fn detection_is_reported_once() {
        let mut sc = open_field("");
        sc.bodies.push(WarmBody { id: 3, kind: BodyKind::Human, position: [8.0, 20.0], stationary: true });
        let mut sim = Simulation::new(sc);
        for _ in 0..400 {
            sim.step(None);
        }
        let hits: Vec<_> = sim
            .state()
            .event_log
            .iter()
            .filter(|e| matches!(e.event, EventKind::Detection { body_id: 3, .. }))
            .collect();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].tick, 1);
        assert!(hits[0].delivered);
        let m = sim.metrics();
        assert_eq!((m.humans_detected, m.humans_total), (1, 1));
        assert_eq!(m.tick_of_first_detection.get(&3), Some(&1));
    }

    #[test]
    fn gas_alarm_on_rising_edge_only() {
        let sc = open_field(
            r#", "gas_sources": [{"species": "CO", "position": [6.0, 20.0], "c0_ppm": 400, "r0_m": 0.5}]"#,
        );
        let mut sim = Simulation::new(sc);
        // 5.0 -> 6.0 is 40 ticks forward; keep tilting until past the source.
        for t in 0..120 {
            sim.step(Some(AccelSample::new(t, 0.0, 1.0)));
        }
        let alarms: Vec<_> = sim.state().event_log.iter().filter(|e| matches!(e.event, EventKind::GasAlarm(_))).collect();
        assert_eq!(alarms.len(), 1);
        assert_eq!(sim.metrics().gas_alarms, 1);
        assert!(!sim.state().gas.alarm);
    }

    #[test]
    fn empty_scenario_run() {
        let (sim, m) = run(open_field(""), &GestureTrace::default()).unwrap();
        assert_eq!((m.humans_detected, m.humans_total), (0, 0));
        assert!(sim.state().event_log.iter().all(|e| matches!(e.event, EventKind::Status(_))));
        // Nothing to do: quiesces after one sweep period.
        assert_eq!(m.ticks_run, 80);
    }

    #[test]
    fn trace_outside_window_rejected() {
        let mut sc = open_field("");
        sc.max_ticks = 5;
        let trace = GestureTrace::from_samples([AccelSample::new(5, 0.0, 0.0)]);
        assert!(run(sc, &trace).is_err());
    }
}
