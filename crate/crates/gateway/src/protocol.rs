//! WebSocket message schema. One JSON document per text frame, tagged by
//! `type`.

use serde::{Deserialize, Serialize};

use rover_core::drive::Pose;
use rover_core::gesture::DriveCommand;
use rover_core::radio::LinkStats;
use rover_core::sensors::{CameraSnapshot, GasReading};
use rover_core::world::TelemetryEvent;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Inbound {
    Tilt {
        x_g: f64,
        y_g: f64,
    },
    SetSweep {
        enabled: bool,
    },
    Reset {
        scenario_name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkView {
    pub up_loss_p: f64,
    pub up_stats: LinkStats,
    pub down_stats: LinkStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateMessage {
    pub tick: u64,
    pub pose: Pose,
    pub current_command: DriveCommand,
    pub link: LinkView,
    pub gas: GasReading,
    pub camera: CameraSnapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Outbound {
    State(StateMessage),
    Alert { event: TelemetryEvent },
    Error { message: String },
}

impl Outbound {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("outbound messages always serialize")
    }
}

pub fn parse_inbound(text: &str) -> Result<Inbound, String> {
    let msg: Inbound = serde_json::from_str(text).map_err(|e| format!("malformed message: {e}"))?;
    if let Inbound::Tilt { x_g, y_g } = msg {
        if !x_g.is_finite() || !y_g.is_finite() {
            return Err("malformed message: tilt values must be finite".into());
        }
    }
    Ok(msg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inbound_forms() {
        assert_eq!(parse_inbound(r#"{"type":"tilt","x_g":0,"y_g":0.5}"#), Ok(Inbound::Tilt { x_g: 0.0, y_g: 0.5 }));
        assert_eq!(parse_inbound(r#"{"type":"set_sweep","enabled":false}"#), Ok(Inbound::SetSweep { enabled: false }));
        assert_eq!(
            parse_inbound(r#"{"type":"reset","scenario_name":"demo-corridor"}"#),
            Ok(Inbound::Reset { scenario_name: "demo-corridor".into(), seed: None })
        );
        assert_eq!(
            parse_inbound(r#"{"type":"reset","scenario_name":"x","seed":9}"#),
            Ok(Inbound::Reset { scenario_name: "x".into(), seed: Some(9) })
        );
    }

    #[test]
    fn malformed_inbound() {
        for text in [
            "not json",
            r#"{"type":"tilt","x_g":0}"#,
            r#"{"type":"fly"}"#,
            r#"{"x_g":0,"y_g":0}"#,
            r#"{"type":"tilt","x_g":0,"y_g":0,"z_g":1}"#,
        ] {
            assert!(parse_inbound(text).is_err(), "{text}");
        }
    }

    #[test]
    fn error_shape() {
        let json = Outbound::Error { message: "nope".into() }.to_json();
        assert_eq!(json, r#"{"type":"error","message":"nope"}"#);
    }
}
