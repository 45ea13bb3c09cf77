pub mod engine;
pub mod metrics;
pub mod scenario;
pub mod telemetry;

pub use engine::{move_with_collision, run, run_with_config, EngineConfig, SimState, Simulation};
pub use metrics::MetricsReport;
pub use scenario::{load_scenario, Scenario, ScenarioDocument, ScenarioError};
pub use telemetry::{EventKind, StatusReport, TelemetryEvent};
