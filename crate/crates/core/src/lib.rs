//! Deterministic simulator of a gesture-driven search-and-rescue rover.
//!
//! A hand-held control unit reads a two-axis accelerometer, classifies the
//! tilt into a drive command and sends it over a lossy 2.4 GHz link. The
//! rover drives a differential base, sweeps a PIR sensor to find trapped
//! people and animals, samples gas, and reports back over the same link.

pub mod drive;
pub mod gesture;
pub mod radio;
pub mod sensors;
pub mod terrain;
pub mod trace;
pub mod world;

pub use drive::{DriveParams, MotorPins, Pose};
pub use gesture::{AccelSample, AdcReading, DriveCommand};
pub use radio::{DeliveryResult, Frame, FrameType, LinkStats};
pub use trace::{GestureTrace, TraceError};
pub use world::{MetricsReport, Scenario, SimState, Simulation, TelemetryEvent};
