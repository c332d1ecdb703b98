use std::f64::consts::FRAC_PI_2;

use super::FlightError;
use crate::registration::wrap_angle;

pub const MAX_XZ_ANGLE: f64 = FRAC_PI_2;
pub const MAX_THRUST: f64 = 5.0;
pub const MAX_TAIL: f64 = 1.0;
pub const MAX_DT: f64 = 0.5;

/// Pose, lagged actuator values and latched commands of the blimp.
///
/// `xz_angle` is the tilt of the thrust bar in radians (0 = forward, pi/2 =
/// straight up). `v_thrust` is the thrust speed along that bar in m/s.
/// `v_yaw` is the yaw rate produced by the tail propeller in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlimpState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
    pub v_thrust: f64,
    pub v_yaw: f64,
    pub xz_angle: f64,
    pub cmd_thrust: f64,
    pub cmd_yaw_rate: f64,
    pub cmd_xz_angle: f64,
}

impl BlimpState {
    /// At rest at the given pose with all actuators and commands zero.
    pub fn at_rest(x: f64, y: f64, z: f64, yaw: f64) -> Self {
        Self {
            x,
            y,
            z,
            yaw: wrap_angle(yaw),
            v_thrust: 0.0,
            v_yaw: 0.0,
            xz_angle: 0.0,
            cmd_thrust: 0.0,
            cmd_yaw_rate: 0.0,
            cmd_xz_angle: 0.0,
        }
    }

    /// Latches new motor commands, clamped to the actuator limits.
    ///
    /// Pose and actual actuator values are untouched; [`BlimpModel::step`]
    /// moves the actuals toward the commands.
    pub fn set_motor_speeds(&self, xz_angle: f64, thrust: f64, tail: f64) -> BlimpState {
        let clamp = |v: f64, lim: f64| if v.is_finite() { v.clamp(-lim, lim) } else { 0.0 };
        BlimpState {
            cmd_xz_angle: clamp(xz_angle, MAX_XZ_ANGLE),
            cmd_thrust: clamp(thrust, MAX_THRUST),
            cmd_yaw_rate: clamp(tail, MAX_TAIL),
            ..*self
        }
    }
}

/// Kinematics with a first-order actuator lag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlimpModel {
    /// Lag time constant in seconds.
    pub tau: f64,
    /// Altitude floor in meters.
    pub z_min: f64,
}

impl Default for BlimpModel {
    fn default() -> Self {
        Self {
            tau: 2.0,
            z_min: 0.5,
        }
    }
}

impl BlimpModel {
    /// Fraction of the command gap closed over `dt`: `1 - e^(-dt/tau)`.
    pub fn lag_fraction(&self, dt: f64) -> f64 {
        -(-dt / self.tau).exp_m1()
    }

    /// Advances the state by `dt` seconds.
    ///
    /// The actuators are lagged first, then the pose is integrated with the
    /// lagged values.
    pub fn step(&self, s: &BlimpState, dt: f64) -> Result<BlimpState, FlightError> {
        if !(dt > 0.0 && dt <= MAX_DT) {
            return Err(FlightError::InvalidDt(dt));
        }
        let k = self.lag_fraction(dt);
        let v_thrust = s.v_thrust + (s.cmd_thrust - s.v_thrust) * k;
        let v_yaw = s.v_yaw + (s.cmd_yaw_rate - s.v_yaw) * k;
        let xz_angle = s.xz_angle + (s.cmd_xz_angle - s.xz_angle) * k;

        let forward = v_thrust * xz_angle.cos();
        let climb = v_thrust * xz_angle.sin();
        let (sin_yaw, cos_yaw) = s.yaw.sin_cos();
        Ok(BlimpState {
            x: s.x + forward * cos_yaw * dt,
            y: s.y + forward * sin_yaw * dt,
            z: (s.z + climb * dt).max(self.z_min),
            yaw: wrap_angle(s.yaw + v_yaw * dt),
            v_thrust,
            v_yaw,
            xz_angle,
            ..*s
        })
    }
}
