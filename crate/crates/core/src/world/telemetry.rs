//! Downlink telemetry: events recorded by the engine and the compact frame
//! payloads that carry them over the radio.

use serde::{Deserialize, Serialize};

use crate::drive::Pose;
use crate::gesture::{command_code, decode_command, DriveCommand};
use crate::radio::LinkStats;
use crate::sensors::{BodyKind, GasReading};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatusReport {
    pub pose: Pose,
    pub command: DriveCommand,
    pub uplink: LinkStats,
    pub downlink: LinkStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventKind {
    Detection { body_id: u32, body_kind: BodyKind },
    GasAlarm(GasReading),
    Status(StatusReport),
}

/// One downlink message, with the fate of its frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelemetryEvent {
    pub tick: u64,
    #[serde(flatten)]
    pub event: EventKind,
    pub delivered: bool,
    pub attempts: u32,
}

impl TelemetryEvent {
    pub fn is_alert(&self) -> bool {
        matches!(self.event, EventKind::Detection { .. } | EventKind::GasAlarm(_))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("malformed telemetry payload")]
pub struct PayloadError;

fn kind_code(k: BodyKind) -> u8 {
    match k {
        BodyKind::Human => 0,
        BodyKind::Animal => 1,
    }
}

/// `id(u32 BE) ‖ kind(u8)`
pub fn encode_detection(body_id: u32, kind: BodyKind) -> Vec<u8> {
    let mut out = body_id.to_be_bytes().to_vec();
    out.push(kind_code(kind));
    out
}

pub fn decode_detection(p: &[u8]) -> Result<(u32, BodyKind), PayloadError> {
    match p {
        [a, b, c, d, k] => {
            let kind = match k {
                0 => BodyKind::Human,
                1 => BodyKind::Animal,
                _ => return Err(PayloadError),
            };
            Ok((u32::from_be_bytes([*a, *b, *c, *d]), kind))
        }
        _ => Err(PayloadError),
    }
}

/// `co, lpg, ch4 (f32 BE ppm) ‖ alarm(u8)`
pub fn encode_gas(r: &GasReading) -> Vec<u8> {
    let mut out = Vec::with_capacity(13);
    for v in [r.co_ppm, r.lpg_ppm, r.ch4_ppm] {
        out.extend_from_slice(&(v as f32).to_be_bytes());
    }
    out.push(u8::from(r.alarm));
    out
}

pub fn decode_gas(p: &[u8]) -> Result<GasReading, PayloadError> {
    if p.len() != 13 {
        return Err(PayloadError);
    }
    let f = |i: usize| f64::from(f32::from_be_bytes([p[i], p[i + 1], p[i + 2], p[i + 3]]));
    Ok(GasReading { co_ppm: f(0), lpg_ppm: f(4), ch4_ppm: f(8), alarm: p[12] != 0 })
}

fn saturating_u32(v: u64) -> u32 {
    u32::try_from(v).unwrap_or(u32::MAX)
}

/// `x, y, heading (f32 BE) ‖ command(u8) ‖ up sent, up delivered,
/// down sent, down delivered (u32 BE)`: 29 bytes.
pub fn encode_status(s: &StatusReport) -> Vec<u8> {
    let mut out = Vec::with_capacity(29);
    for v in [s.pose.x_m, s.pose.y_m, s.pose.heading_rad] {
        out.extend_from_slice(&(v as f32).to_be_bytes());
    }
    out.push(command_code(s.command));
    for v in [s.uplink.frames_sent, s.uplink.frames_delivered, s.downlink.frames_sent, s.downlink.frames_delivered] {
        out.extend_from_slice(&saturating_u32(v).to_be_bytes());
    }
    out
}

/// Status as the base station sees it: f32 pose and the counters carried.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatusSummary {
    pub pose: [f32; 3],
    pub command: DriveCommand,
    pub up_sent: u32,
    pub up_delivered: u32,
    pub down_sent: u32,
    pub down_delivered: u32,
}

pub fn decode_status(p: &[u8]) -> Result<StatusSummary, PayloadError> {
    if p.len() != 29 {
        return Err(PayloadError);
    }
    let f = |i: usize| f32::from_be_bytes([p[i], p[i + 1], p[i + 2], p[i + 3]]);
    let u = |i: usize| u32::from_be_bytes([p[i], p[i + 1], p[i + 2], p[i + 3]]);
    Ok(StatusSummary {
        pose: [f(0), f(4), f(8)],
        command: decode_command(p[12]).map_err(|_| PayloadError)?,
        up_sent: u(13),
        up_delivered: u(17),
        down_sent: u(21),
        down_delivered: u(25),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn payloads_fit_a_frame() {
        let s = StatusReport {
            pose: Pose::new(1.0, 2.0, 0.5),
            command: DriveCommand::Left,
            uplink: LinkStats { frames_sent: 10, frames_delivered: 9, retransmissions: 3, frames_dropped: 1 },
            downlink: LinkStats::default(),
        };
        let p = encode_status(&s);
        assert_eq!(p.len(), 29);
        let d = decode_status(&p).unwrap();
        assert_eq!(d.command, DriveCommand::Left);
        assert_eq!((d.up_sent, d.up_delivered), (10, 9));
        assert_eq!(d.pose, [1.0, 2.0, 0.5]);

        let g = GasReading::new(250.0, 0.0, 12.5);
        assert_eq!(decode_gas(&encode_gas(&g)).unwrap(), g);
        assert_eq!(decode_detection(&encode_detection(7, BodyKind::Animal)).unwrap(), (7, BodyKind::Animal));
        assert!(decode_detection(&[0, 0, 0, 1, 9]).is_err());
    }

    #[test]
    fn event_json_shape() {
        let e = TelemetryEvent {
            tick: 12,
            event: EventKind::Detection { body_id: 1, body_kind: BodyKind::Human },
            delivered: true,
            attempts: 1,
        };
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(
            json,
            r#"{"tick":12,"kind":"detection","payload":{"body_id":1,"body_kind":"human"},"delivered":true,"attempts":1}"#
        );
        assert_eq!(serde_json::from_str::<TelemetryEvent>(&json).unwrap(), e);
    }
}
