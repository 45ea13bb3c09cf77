//! Entry points for the rover simulator: headless scripted runs and a live
//! WebSocket service for the operator console.

pub mod headless;
pub mod live;
pub mod persist;
pub mod protocol;

pub use headless::{decode_trace, simulate, CliError, SimulateOutput};
pub use live::{serve, LiveSession};
pub use protocol::{Inbound, Outbound};
