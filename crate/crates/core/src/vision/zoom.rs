use serde::{Deserialize, Serialize};

use super::Detection;
use crate::geo::CameraIntrinsics;

pub const MIN_ZOOM: f64 = 1.0;
pub const MAX_ZOOM: f64 = 12.0;

/// Optical zoom as one of `steps` discrete levels spread evenly over
/// `[1, 12]`, plus the time since the last level change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoomState {
    pub step: u32,
    pub steps: u32,
    pub since_change: f64,
}

impl ZoomState {
    pub fn new(step: u32, steps: u32) -> Self {
        let steps = steps.max(2);
        Self {
            step: step.min(steps - 1),
            steps,
            since_change: f64::INFINITY,
        }
    }

    pub fn zoom(&self) -> f64 {
        MIN_ZOOM + (MAX_ZOOM - MIN_ZOOM) * f64::from(self.step) / f64::from(self.steps - 1)
    }

    pub fn at_max(&self) -> bool {
        self.step + 1 >= self.steps
    }

    pub fn at_min(&self) -> bool {
        self.step == 0
    }

    pub fn tick(&mut self, dt: f64) {
        self.since_change += dt;
    }

    pub fn apply(&mut self, cmd: ZoomCommand) {
        match cmd {
            ZoomCommand::In if !self.at_max() => self.step += 1,
            ZoomCommand::Out if !self.at_min() => self.step -= 1,
            _ => return,
        }
        self.since_change = 0.0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZoomPolicy {
    /// Zoom in when the ring's major diameter drops below this, pixels.
    pub lower_px: f64,
    /// Zoom out when it exceeds this, pixels.
    pub upper_px: f64,
    /// Minimum time between two level changes, seconds.
    pub dwell_s: f64,
    pub steps: u32,
}

impl Default for ZoomPolicy {
    fn default() -> Self {
        Self {
            lower_px: 20.0,
            upper_px: 120.0,
            dwell_s: 0.5,
            steps: 12,
        }
    }
}

impl ZoomPolicy {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.lower_px > 0.0 && self.lower_px < self.upper_px) {
            return Err("zoom thresholds need 0 < lower_px < upper_px".into());
        }
        if !(self.dwell_s >= 0.0) {
            return Err("dwell_s must be >= 0".into());
        }
        if self.steps < 2 {
            return Err("zoom needs at least 2 steps".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZoomCommand {
    In,
    Out,
    Hold,
}

pub fn zoom_step(det: Option<&Detection>, z: &ZoomState, policy: &ZoomPolicy) -> ZoomCommand {
    if z.since_change < policy.dwell_s {
        return ZoomCommand::Hold;
    }
    match det {
        None if !z.at_min() => ZoomCommand::Out,
        None => ZoomCommand::Hold,
        Some(d) => {
            let size = d.ellipse.major_diameter();
            if size < policy.lower_px && !z.at_max() {
                ZoomCommand::In
            } else if size > policy.upper_px && !z.at_min() {
                ZoomCommand::Out
            } else {
                ZoomCommand::Hold
            }
        }
    }
}

/// Focal-length-proportional field of view: `tan(fov/2)` shrinks as `1/zoom`.
pub fn fov_for_zoom(zoom: f64, base: &CameraIntrinsics) -> CameraIntrinsics {
    let z = zoom.clamp(MIN_ZOOM, MAX_ZOOM);
    CameraIntrinsics {
        hfov: 2.0 * ((0.5 * base.hfov).tan() / z).atan(),
        vfov: 2.0 * ((0.5 * base.vfov).tan() / z).atan(),
    }
}
