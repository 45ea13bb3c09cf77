//! Rover actuation: L293D pin levels, wheel speeds, and differential-drive
//! pose integration.
//!
//! Channel 1 (EN1,2 / 1A / 2A) drives the left motor, channel 2
//! (EN3,4 / 3A / 4A) the right one. `(A, B) = (1, 0)` spins a wheel forward.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::gesture::DriveCommand;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MotorPins {
    pub en12: bool,
    pub in1: bool,
    pub in2: bool,
    pub en34: bool,
    pub in3: bool,
    pub in4: bool,
}

impl MotorPins {
    /// Pin levels as `(en12, in1, in2, en34, in3, in4)` in 0/1 form.
    pub fn levels(&self) -> [u8; 6] {
        [self.en12, self.in1, self.in2, self.en34, self.in3, self.in4].map(u8::from)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x_m: f64,
    pub y_m: f64,
    pub heading_rad: f64,
}

impl Pose {
    pub fn new(x_m: f64, y_m: f64, heading_rad: f64) -> Self {
        Self { x_m, y_m, heading_rad: normalize_angle(heading_rad) }
    }

    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        (self.x_m - x).hypot(self.y_m - y)
    }
}

impl Default for Pose {
    fn default() -> Self {
        Pose::new(0.0, 0.0, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    /// m/s of a fully driven wheel.
    pub wheel_speed_full: f64,
    /// m between wheel contact points.
    pub wheel_base: f64,
    /// s per tick.
    pub dt: f64,
}

impl Default for DriveParams {
    fn default() -> Self {
        Self { wheel_speed_full: 0.5, wheel_base: 0.3, dt: 0.05 }
    }
}

/// Wrap an angle into (−π, π].
pub fn normalize_angle(a: f64) -> f64 {
    if !a.is_finite() {
        return 0.0;
    }
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    // rem_euclid can return exactly 2π for tiny negative inputs.
    if r <= -PI {
        r += 2.0 * PI;
    }
    r
}

pub fn command_to_pins(c: DriveCommand) -> MotorPins {
    const FWD: (bool, bool) = (true, false);
    const REV: (bool, bool) = (false, true);
    let (left, right) = match c {
        DriveCommand::Stop => return MotorPins::default(),
        DriveCommand::Forward => (FWD, FWD),
        DriveCommand::Backward => (REV, REV),
        DriveCommand::Left => (REV, FWD),
        DriveCommand::Right => (FWD, REV),
    };
    MotorPins {
        en12: true,
        in1: left.0,
        in2: left.1,
        en34: true,
        in3: right.0,
        in4: right.1,
    }
}

fn channel_speed(enable: bool, a: bool, b: bool, full: f64) -> f64 {
    match (enable, a, b) {
        (false, _, _) => 0.0,
        (true, true, false) => full,
        (true, false, true) => -full,
        // equal inputs brake
        (true, _, _) => 0.0,
    }
}

/// `(v_left, v_right)` in m/s.
pub fn pins_to_wheel_speeds(p: &MotorPins, params: &DriveParams) -> (f64, f64) {
    (
        channel_speed(p.en12, p.in1, p.in2, params.wheel_speed_full),
        channel_speed(p.en34, p.in3, p.in4, params.wheel_speed_full),
    )
}

/// Advance the pose by one tick with exact arc integration.
pub fn integrate_pose(p: &Pose, v_left: f64, v_right: f64, params: &DriveParams) -> Pose {
    let v = 0.5 * (v_left + v_right);
    let omega = (v_right - v_left) / params.wheel_base;
    let dt = params.dt;
    let theta = p.heading_rad;
    let (x, y) = if omega.abs() < 1e-9 {
        (p.x_m + v * dt * theta.cos(), p.y_m + v * dt * theta.sin())
    } else if v == 0.0 {
        (p.x_m, p.y_m)
    } else {
        let r = v / omega;
        let next = theta + omega * dt;
        (p.x_m + r * (next.sin() - theta.sin()), p.y_m - r * (next.cos() - theta.cos()))
    };
    Pose { x_m: x, y_m: y, heading_rad: normalize_angle(theta + omega * dt) }
}
