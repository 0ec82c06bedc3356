//! Tracking control: the PI law, the pan-tilt plant model and the mode
//! supervisor that switches between vision and GNSS guidance.

mod supervisor;

use serde::{Deserialize, Serialize};

use crate::geo::{wrap_angle, MisalignmentAngles, PtuPose};

pub use supervisor::{
    supervisor_step, StationGeometry, SupervisorConfig, SupervisorOutput, TelemetryFix, TrackerMode, TrackerState,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PiGains {
    /// Proportional gain, 1/s.
    pub kp: f64,
    /// Integral gain, 1/s².
    pub ki: f64,
    /// Clamp on each accumulated integral, rad·s.
    pub integral_limit: f64,
}

impl Default for PiGains {
    /// Critically damped double pole at -4/s for a rate-controlled axis.
    fn default() -> Self {
        Self {
            kp: 8.0,
            ki: 16.0,
            integral_limit: 10f64.to_radians(),
        }
    }
}

impl PiGains {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.kp >= 0.0 && self.ki >= 0.0 && self.kp.is_finite() && self.ki.is_finite()) {
            return Err("gains must be finite and >= 0".into());
        }
        if !(self.integral_limit >= 0.0) {
            return Err("integral_limit must be >= 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PtuLimits {
    pub pan_resolution: f64,
    pub tilt_resolution: f64,
    pub max_pan_speed: f64,
    pub max_tilt_speed: f64,
    pub tilt_min: f64,
    pub tilt_max: f64,
}

impl Default for PtuLimits {
    fn default() -> Self {
        Self {
            pan_resolution: 0.006f64.to_radians(),
            tilt_resolution: 0.003f64.to_radians(),
            max_pan_speed: 60f64.to_radians(),
            max_tilt_speed: 30f64.to_radians(),
            tilt_min: (-45f64).to_radians(),
            tilt_max: 75f64.to_radians(),
        }
    }
}

impl PtuLimits {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.pan_resolution > 0.0 && self.tilt_resolution > 0.0) {
            return Err("resolutions must be > 0".into());
        }
        if !(self.max_pan_speed > 0.0 && self.max_tilt_speed > 0.0) {
            return Err("max speeds must be > 0".into());
        }
        if !(self.tilt_min < self.tilt_max) {
            return Err("tilt_min must be below tilt_max".into());
        }
        Ok(())
    }
}

/// Commanded axis rates, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VelocityCommand {
    pub pan_rate: f64,
    pub tilt_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PiState {
    pub integral_phi: f64,
    pub integral_theta: f64,
    pub last_update: Option<f64>,
}

impl PiState {
    pub fn reset(&mut self) {
        self.integral_phi = 0.0;
        self.integral_theta = 0.0;
    }
}

/// One axis with conditional integration: the integral only advances when
/// the resulting output stays inside the rate limit.
fn pi_axis(e: f64, integral: f64, kp: f64, ki: f64, i_max: f64, u_max: f64, dt: f64) -> (f64, f64) {
    let candidate = (integral + e * dt).clamp(-i_max, i_max);
    let u = kp * e + ki * candidate;
    if u.abs() <= u_max {
        (u, candidate)
    } else {
        ((kp * e + ki * integral).clamp(-u_max, u_max), integral)
    }
}

pub fn pi_step(
    err: MisalignmentAngles,
    s: &PiState,
    gains: &PiGains,
    limits: &PtuLimits,
    dt: f64,
) -> (VelocityCommand, PiState) {
    debug_assert!(dt > 0.0);
    let (pan_rate, integral_phi) =
        pi_axis(err.d_phi, s.integral_phi, gains.kp, gains.ki, gains.integral_limit, limits.max_pan_speed, dt);
    let (tilt_rate, integral_theta) =
        pi_axis(err.d_theta, s.integral_theta, gains.kp, gains.ki, gains.integral_limit, limits.max_tilt_speed, dt);
    let next = PiState {
        integral_phi,
        integral_theta,
        last_update: Some(s.last_update.unwrap_or(0.0) + dt),
    };
    (VelocityCommand { pan_rate, tilt_rate }, next)
}

fn quantize(x: f64, res: f64) -> f64 {
    (x / res).round() * res
}

/// Advances one axis and snaps it to the resolution grid without exceeding
/// `max_step` in magnitude.
fn axis_step(pos: f64, rate: f64, max_rate: f64, res: f64, dt: f64) -> f64 {
    let max_step = max_rate * dt;
    let target = pos + rate.clamp(-max_rate, max_rate) * dt;
    let mut q = quantize(target, res);
    if (q - pos).abs() > max_step + 1e-9 * res {
        q -= res * (q - pos).signum();
    }
    q
}

pub fn ptu_step(pose: PtuPose, cmd: VelocityCommand, lim: &PtuLimits, dt: f64) -> PtuPose {
    debug_assert!(dt > 0.0);
    let pan = axis_step(pose.pan, cmd.pan_rate, lim.max_pan_speed, lim.pan_resolution, dt);
    let tilt = axis_step(pose.tilt, cmd.tilt_rate, lim.max_tilt_speed, lim.tilt_resolution, dt);
    PtuPose {
        pan: wrap_angle(pan),
        tilt: tilt.clamp(lim.tilt_min, lim.tilt_max),
    }
}

/// Snaps a pose onto the resolution grid and into the tilt range.
pub fn snap_pose(pose: PtuPose, lim: &PtuLimits) -> PtuPose {
    PtuPose {
        pan: wrap_angle(quantize(pose.pan, lim.pan_resolution)),
        tilt: quantize(pose.tilt, lim.tilt_resolution).clamp(lim.tilt_min, lim.tilt_max),
    }
}
