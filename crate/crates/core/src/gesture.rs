//! Control-unit sensing chain: hand tilt → ADC counts → drive command.
//!
//! The accelerometer is modeled with a linear ratiometric transfer function
//! (1.65 V at zero g, 0.330 V/g, 3.3 V rail) sampled by a 10-bit converter
//! referenced to 5.0 V. Only the X and Y axes are wired.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sensor full-scale, in g.
pub const FULL_SCALE_G: f64 = 3.0;
pub const ZERO_G_VOLTS: f64 = 1.65;
pub const VOLTS_PER_G: f64 = 0.330;
pub const SUPPLY_VOLTS: f64 = 3.3;
pub const ADC_REF_VOLTS: f64 = 5.0;
pub const ADC_MAX: u16 = 1023;

/// ADC count produced by a level hand.
pub const NEUTRAL_COUNTS: i32 = 338;
/// Deflection (counts) required to engage a command from rest.
pub const ENGAGE_COUNTS: i32 = 30;
/// Deflection (counts) below which an engaged command is released.
pub const RELEASE_COUNTS: i32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccelSample {
    pub tick: u64,
    pub x_g: f64,
    pub y_g: f64,
}

impl AccelSample {
    pub fn new(tick: u64, x_g: f64, y_g: f64) -> Self {
        Self { tick, x_g, y_g }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdcReading {
    pub tick: u64,
    pub x_counts: u16,
    pub y_counts: u16,
}

impl AdcReading {
    pub fn new(tick: u64, x_counts: u16, y_counts: u16) -> Self {
        Self {
            tick,
            x_counts: x_counts.min(ADC_MAX),
            y_counts: y_counts.min(ADC_MAX),
        }
    }

    /// Signed deflection from neutral, `(dx, dy)`.
    pub fn deflection(&self) -> (i32, i32) {
        (
            i32::from(self.x_counts) - NEUTRAL_COUNTS,
            i32::from(self.y_counts) - NEUTRAL_COUNTS,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum DriveCommand {
    #[default]
    Stop,
    Forward,
    Backward,
    Left,
    Right,
}

impl DriveCommand {
    pub const ALL: [DriveCommand; 5] = [
        DriveCommand::Stop,
        DriveCommand::Forward,
        DriveCommand::Backward,
        DriveCommand::Left,
        DriveCommand::Right,
    ];

    /// Signed deflection along the axis this command is bound to.
    /// `None` for `Stop`.
    fn axis_deflection(self, dx: i32, dy: i32) -> Option<i32> {
        match self {
            DriveCommand::Stop => None,
            DriveCommand::Forward => Some(dy),
            DriveCommand::Backward => Some(-dy),
            DriveCommand::Right => Some(dx),
            DriveCommand::Left => Some(-dx),
        }
    }
}

impl std::fmt::Display for DriveCommand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            DriveCommand::Stop => "Stop",
            DriveCommand::Forward => "Forward",
            DriveCommand::Backward => "Backward",
            DriveCommand::Left => "Left",
            DriveCommand::Right => "Right",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("malformed drive command byte 0x{0:02x}")]
pub struct MalformedCommand(pub u8);

fn axis_to_counts(a_g: f64) -> u16 {
    let a_g = if a_g.is_nan() { 0.0 } else { a_g.clamp(-FULL_SCALE_G, FULL_SCALE_G) };
    let volts = (ZERO_G_VOLTS + VOLTS_PER_G * a_g).clamp(0.0, SUPPLY_VOLTS);
    let counts = (f64::from(ADC_MAX) * volts / ADC_REF_VOLTS).round();
    counts.clamp(0.0, f64::from(ADC_MAX)) as u16
}

/// Quantize a tilt sample the way the control unit's ADC sees it.
pub fn sample_to_counts(s: &AccelSample) -> AdcReading {
    AdcReading {
        tick: s.tick,
        x_counts: axis_to_counts(s.x_g),
        y_counts: axis_to_counts(s.y_g),
    }
}

/// Map a reading to a drive command given the previously emitted one.
///
/// Dead zone below [`RELEASE_COUNTS`]; an engaged command is held while its
/// own axis stays at or above the release threshold; a new command needs
/// [`ENGAGE_COUNTS`] on the dominant axis. Exact diagonal ties keep `prev`.
pub fn classify(r: &AdcReading, prev: DriveCommand) -> DriveCommand {
    let (dx, dy) = r.deflection();
    let peak = dx.abs().max(dy.abs());
    if peak < RELEASE_COUNTS {
        return DriveCommand::Stop;
    }
    if let Some(held) = prev.axis_deflection(dx, dy) {
        if held >= RELEASE_COUNTS {
            return prev;
        }
    }
    if peak >= ENGAGE_COUNTS {
        return match dy.abs().cmp(&dx.abs()) {
            std::cmp::Ordering::Greater if dy > 0 => DriveCommand::Forward,
            std::cmp::Ordering::Greater => DriveCommand::Backward,
            std::cmp::Ordering::Less if dx > 0 => DriveCommand::Right,
            std::cmp::Ordering::Less => DriveCommand::Left,
            std::cmp::Ordering::Equal => prev,
        };
    }
    prev
}

pub fn command_code(c: DriveCommand) -> u8 {
    match c {
        DriveCommand::Stop => 0x00,
        DriveCommand::Forward => 0x01,
        DriveCommand::Backward => 0x02,
        DriveCommand::Left => 0x03,
        DriveCommand::Right => 0x04,
    }
}

pub fn decode_command(b: u8) -> Result<DriveCommand, MalformedCommand> {
    match b {
        0x00 => Ok(DriveCommand::Stop),
        0x01 => Ok(DriveCommand::Forward),
        0x02 => Ok(DriveCommand::Backward),
        0x03 => Ok(DriveCommand::Left),
        0x04 => Ok(DriveCommand::Right),
        other => Err(MalformedCommand(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reading(x: i32, y: i32) -> AdcReading {
        AdcReading::new(0, x as u16, y as u16)
    }

    // Independent oracle: evaluate the transfer function in integer
    // millivolts so the rounding path differs from the implementation.
    fn counts_oracle(a_milli_g: i64) -> u16 {
        let a = a_milli_g.clamp(-3000, 3000);
        let mv = (1650 * 1000 + 330 * a).clamp(0, 3_300_000); // micro-volts
        // round(1023 * uv / 5_000_000)
        let num = 1023 * mv;
        ((num + 2_500_000) / 5_000_000) as u16
    }

    #[test]
    fn oracle_agrees_on_spot_values() {
        assert_eq!(counts_oracle(0), 338);
        assert_eq!(counts_oracle(1000), 405);
        for milli in (-4000..=4000).step_by(125) {
            let s = AccelSample::new(0, milli as f64 / 1000.0, 0.0);
            assert_eq!(sample_to_counts(&s).x_counts, counts_oracle(milli), "{milli}");
        }
    }

    #[test]
    fn level_hand_is_neutral() {
        let r = sample_to_counts(&AccelSample::new(7, 0.0, 0.0));
        assert_eq!((r.x_counts, r.y_counts, r.tick), (338, 338, 7));
    }

    #[test]
    fn one_g_on_x() {
        let r = sample_to_counts(&AccelSample::new(0, 1.0, 0.0));
        assert_eq!((r.x_counts, r.y_counts), (405, 338));
    }

    #[test]
    fn out_of_range_is_clamped() {
        let lo = sample_to_counts(&AccelSample::new(0, -10.0, 0.0));
        let edge = sample_to_counts(&AccelSample::new(0, -3.0, 0.0));
        assert_eq!(lo.x_counts, edge.x_counts);
        let hi = sample_to_counts(&AccelSample::new(0, 99.0, 0.0));
        assert_eq!(hi.x_counts, sample_to_counts(&AccelSample::new(0, 3.0, 0.0)).x_counts);
    }

    #[test]
    fn forward_from_rest() {
        assert_eq!(classify(&reading(338, 405), DriveCommand::Stop), DriveCommand::Forward);
    }

    #[test]
    fn neutral_releases() {
        assert_eq!(classify(&reading(338, 338), DriveCommand::Forward), DriveCommand::Stop);
    }

    #[test]
    fn hysteresis_band() {
        let r = reading(338, 360);
        assert_eq!(classify(&r, DriveCommand::Forward), DriveCommand::Forward);
        assert_eq!(classify(&r, DriveCommand::Stop), DriveCommand::Stop);
    }

    #[test]
    fn canonical_directions() {
        let cases = [
            ((338, 338), DriveCommand::Stop),
            ((338, 405), DriveCommand::Forward),
            ((338, 271), DriveCommand::Backward),
            ((405, 338), DriveCommand::Right),
            ((271, 338), DriveCommand::Left),
        ];
        for ((x, y), want) in cases {
            assert_eq!(classify(&reading(x, y), DriveCommand::Stop), want);
        }
    }

    #[test]
    fn diagonal_tie_holds_previous() {
        let r = reading(338 + 40, 338 + 40);
        assert_eq!(classify(&r, DriveCommand::Stop), DriveCommand::Stop);
        // Left is not supported by +dx so it is not "held", but the tie keeps it.
        assert_eq!(classify(&r, DriveCommand::Left), DriveCommand::Left);
    }

    #[test]
    fn codes() {
        assert_eq!(command_code(DriveCommand::Forward), 0x01);
        assert_eq!(decode_command(0x00), Ok(DriveCommand::Stop));
        assert_eq!(decode_command(0x07), Err(MalformedCommand(0x07)));
        for c in DriveCommand::ALL {
            assert_eq!(decode_command(command_code(c)), Ok(c));
        }
        for b in 0x05..=0xFF {
            assert!(decode_command(b).is_err());
        }
    }

    fn any_command() -> impl Strategy<Value = DriveCommand> {
        prop::sample::select(DriveCommand::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn quantization_is_monotone(y in -4.0f64..4.0, a in -4.0f64..4.0, b in -4.0f64..4.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let rl = sample_to_counts(&AccelSample::new(0, lo, y));
            let rh = sample_to_counts(&AccelSample::new(0, hi, y));
            prop_assert!(rl.x_counts <= rh.x_counts);
            prop_assert!(rh.x_counts <= ADC_MAX && rh.y_counts <= ADC_MAX);
        }

        #[test]
        fn dead_zone_always_stops(dx in -19i32..=19, dy in -19i32..=19, prev in any_command()) {
            prop_assert_eq!(classify(&reading(338 + dx, 338 + dy), prev), DriveCommand::Stop);
        }

        #[test]
        fn classify_is_pure(x in 0u16..=1023, y in 0u16..=1023, prev in any_command()) {
            let r = AdcReading::new(0, x, y);
            prop_assert_eq!(classify(&r, prev), classify(&r, prev));
        }

        #[test]
        fn alternating_band_never_chatters(
            pattern in prop::collection::vec(any::<bool>(), 1..200),
            axis in 0usize..4,
        ) {
            let place = |mag: i32| match axis {
                0 => reading(338, 338 + mag),
                1 => reading(338, 338 - mag),
                2 => reading(338 + mag, 338),
                _ => reading(338 - mag, 338),
            };
            let mut prev = DriveCommand::Stop;
            let mut engaged = false;
            for high in pattern {
                let next = classify(&place(if high { 35 } else { 22 }), prev);
                if engaged {
                    prop_assert_eq!(next, prev);
                }
                if next != DriveCommand::Stop {
                    engaged = true;
                }
                prev = next;
            }
        }
    }
}
