pub mod camera;
pub mod gas;
pub mod pir;

pub use camera::{camera_capture, CameraSnapshot, CellState};
pub use gas::{gas_sense, GasReading, GasSource, GasSpecies};
pub use pir::{pir_frame, pir_sense, sweep_angle, BodyKind, BodyObservation, PirConfig, PirFrame, PirOutput, WarmBody};
