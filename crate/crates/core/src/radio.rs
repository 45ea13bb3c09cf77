//! Link layer between the control unit and the rover.
//!
//! Frames follow an nRF24L01-like envelope: 5-byte address, type byte,
//! length byte, up to 32 payload bytes and a big-endian CRC-16/CCITT-FALSE
//! trailer. The channel drops each transmission with a probability that
//! depends only on the base-to-rover distance; auto-acknowledge ARQ retries
//! up to 15 times and resolves within a single tick.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ADDR_LEN: usize = 5;
pub const MAX_PAYLOAD: usize = 32;
const HEADER_LEN: usize = ADDR_LEN + 2;
const CRC_LEN: usize = 2;

/// Retries after the first attempt.
pub const MAX_RETRIES: u32 = 15;
pub const MAX_ATTEMPTS: u32 = MAX_RETRIES + 1;

/// Distance up to which the link never loses a frame.
pub const RELIABLE_RANGE_M: f64 = 250.0;
/// Hard limit of control.
pub const MAX_RANGE_M: f64 = 1000.0;
/// Recorded for reference only; it does not enter the loss model.
pub const CARRIER_GHZ: f64 = 2.4;

pub const BASE_ADDR: [u8; ADDR_LEN] = *b"BASE0";
pub const ROVER_ADDR: [u8; ADDR_LEN] = *b"ROVR1";

const CRC16: crc::Crc<u16> = crc::Crc::<u16>::new(&crc::CRC_16_IBM_3740);

/// CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF, no reflection, no xorout).
pub fn crc16(bytes: &[u8]) -> u16 {
    CRC16.checksum(bytes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum FrameType {
    Drive = 0x01,
    PirDetection = 0x02,
    Gas = 0x03,
    Status = 0x04,
    Ack = 0x05,
}

impl TryFrom<u8> for FrameType {
    type Error = FrameError;

    fn try_from(b: u8) -> Result<Self, FrameError> {
        Ok(match b {
            0x01 => FrameType::Drive,
            0x02 => FrameType::PirDetection,
            0x03 => FrameType::Gas,
            0x04 => FrameType::Status,
            0x05 => FrameType::Ack,
            other => return Err(FrameError::UnknownType(other)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub addr: [u8; ADDR_LEN],
    pub ftype: FrameType,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("payload of {0} bytes exceeds the {MAX_PAYLOAD}-byte limit")]
    PayloadTooLong(usize),
    #[error("truncated frame: need {needed} bytes, got {got}")]
    Truncated { needed: usize, got: usize },
    #[error("{0} trailing bytes after frame")]
    TrailingBytes(usize),
    #[error("unknown frame type 0x{0:02x}")]
    UnknownType(u8),
    #[error("crc mismatch: frame carries 0x{carried:04x}, computed 0x{computed:04x}")]
    Integrity { carried: u16, computed: u16 },
}

impl Frame {
    pub fn new(addr: [u8; ADDR_LEN], ftype: FrameType, payload: Vec<u8>) -> Result<Self, FrameError> {
        if payload.len() > MAX_PAYLOAD {
            return Err(FrameError::PayloadTooLong(payload.len()));
        }
        Ok(Self { addr, ftype, payload })
    }

    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.payload.len() + CRC_LEN
    }
}

/// Serialize as `addr(5) ‖ type(1) ‖ len(1) ‖ payload ‖ crc(2, BE)`.
pub fn encode_frame(f: &Frame) -> Result<Vec<u8>, FrameError> {
    if f.payload.len() > MAX_PAYLOAD {
        return Err(FrameError::PayloadTooLong(f.payload.len()));
    }
    let mut out = Vec::with_capacity(f.encoded_len());
    out.extend_from_slice(&f.addr);
    out.push(f.ftype as u8);
    out.push(f.payload.len() as u8);
    out.extend_from_slice(&f.payload);
    let crc = crc16(&out);
    out.extend_from_slice(&crc.to_be_bytes());
    Ok(out)
}

pub fn decode_frame(bytes: &[u8]) -> Result<Frame, FrameError> {
    if bytes.len() < HEADER_LEN + CRC_LEN {
        return Err(FrameError::Truncated { needed: HEADER_LEN + CRC_LEN, got: bytes.len() });
    }
    let len = usize::from(bytes[ADDR_LEN + 1]);
    if len > MAX_PAYLOAD {
        return Err(FrameError::PayloadTooLong(len));
    }
    let total = HEADER_LEN + len + CRC_LEN;
    if bytes.len() < total {
        return Err(FrameError::Truncated { needed: total, got: bytes.len() });
    }
    if bytes.len() > total {
        return Err(FrameError::TrailingBytes(bytes.len() - total));
    }
    let body = &bytes[..total - CRC_LEN];
    let carried = u16::from_be_bytes([bytes[total - 2], bytes[total - 1]]);
    let computed = crc16(body);
    if carried != computed {
        return Err(FrameError::Integrity { carried, computed });
    }
    let mut addr = [0u8; ADDR_LEN];
    addr.copy_from_slice(&bytes[..ADDR_LEN]);
    Ok(Frame {
        addr,
        ftype: FrameType::try_from(bytes[ADDR_LEN])?,
        payload: body[HEADER_LEN..].to_vec(),
    })
}

/// Per-transmission loss probability at distance `d` meters.
///
/// Zero inside 250 m, a quadratic ramp to one at 1000 m, one beyond.
pub fn loss_probability(d: f64) -> f64 {
    if d.is_nan() || d > MAX_RANGE_M {
        1.0
    } else if d <= RELIABLE_RANGE_M {
        0.0
    } else {
        let t = (d - RELIABLE_RANGE_M) / (MAX_RANGE_M - RELIABLE_RANGE_M);
        (t * t).min(1.0)
    }
}

/// Distance-parameterized lossy channel with its own seeded generator.
#[derive(Debug, Clone)]
pub struct ChannelState {
    pub distance_m: f64,
    rng: ChaCha8Rng,
}

impl ChannelState {
    /// `stream` separates independent channels derived from one scenario seed.
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { distance_m: 0.0, rng }
    }

    pub fn carrier_ghz(&self) -> f64 {
        CARRIER_GHZ
    }

    pub fn loss_probability(&self) -> f64 {
        loss_probability(self.distance_m)
    }

    /// A draw in (0, 1]; compared strictly against the loss probability so
    /// that p = 0 never loses and p = 1 always does.
    fn draw(&mut self) -> f64 {
        1.0 - self.rng.gen::<f64>()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkStats {
    pub frames_sent: u64,
    pub frames_delivered: u64,
    pub retransmissions: u64,
    pub frames_dropped: u64,
}

impl LinkStats {
    pub fn delivery_ratio(&self) -> f64 {
        if self.frames_sent == 0 {
            1.0
        } else {
            self.frames_delivered as f64 / self.frames_sent as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum DeliveryResult {
    Delivered { attempts_used: u32 },
    Dropped { attempts: u32 },
}

impl DeliveryResult {
    pub fn is_delivered(&self) -> bool {
        matches!(self, DeliveryResult::Delivered { .. })
    }
}

/// Send one frame with auto-acknowledge ARQ. Each attempt consumes exactly
/// two draws: one for the data direction, one for the acknowledgement.
pub fn transmit(f: &Frame, ch: &mut ChannelState, stats: &mut LinkStats) -> DeliveryResult {
    debug_assert!(f.payload.len() <= MAX_PAYLOAD);
    let p = ch.loss_probability();
    stats.frames_sent += 1;
    for attempt in 1..=MAX_ATTEMPTS {
        let data_ok = ch.draw() > p;
        let ack_ok = ch.draw() > p;
        if data_ok && ack_ok {
            stats.frames_delivered += 1;
            stats.retransmissions += u64::from(attempt - 1);
            return DeliveryResult::Delivered { attempts_used: attempt };
        }
    }
    stats.frames_dropped += 1;
    stats.retransmissions += u64::from(MAX_RETRIES);
    DeliveryResult::Dropped { attempts: MAX_ATTEMPTS }
}

/// One direction of the radio: channel plus its counters.
#[derive(Debug, Clone)]
pub struct Link {
    pub channel: ChannelState,
    pub stats: LinkStats,
}

impl Link {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { channel: ChannelState::new(seed, stream), stats: LinkStats::default() }
    }

    /// Encode, send, and on success hand back the frame as decoded by the
    /// receiver.
    pub fn send(&mut self, f: &Frame) -> (DeliveryResult, Option<Frame>) {
        let result = transmit(f, &mut self.channel, &mut self.stats);
        let received = match result {
            DeliveryResult::Delivered { .. } => {
                let wire = encode_frame(f).expect("frame payload validated at construction");
                Some(decode_frame(&wire).expect("lossless channel preserves integrity"))
            }
            DeliveryResult::Dropped { .. } => None,
        };
        (result, received)
    }
}
