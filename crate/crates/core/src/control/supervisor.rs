use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geo::{misalignment_from_offset, misalignment_from_positions, CameraIntrinsics, MisalignmentAngles, Position3, PtuPose};
use crate::vision::Detection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TrackerMode {
    Visual,
    GnssFallback,
    Search,
}

impl TrackerMode {
    pub const ALL: [TrackerMode; 3] = [TrackerMode::Visual, TrackerMode::GnssFallback, TrackerMode::Search];

    pub fn as_str(self) -> &'static str {
        match self {
            TrackerMode::Visual => "VISUAL",
            TrackerMode::GnssFallback => "GNSS_FALLBACK",
            TrackerMode::Search => "SEARCH",
        }
    }
}

impl fmt::Display for TrackerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrackerMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown tracker mode {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackerState {
    pub mode: TrackerMode,
    /// Seconds since the last frame with a detection; infinite if none yet.
    pub since_detection: f64,
    /// Age of the freshest telemetry fix; infinite if none yet.
    pub since_telemetry: f64,
    pub updated_at: Option<f64>,
}

impl Default for TrackerState {
    fn default() -> Self {
        Self {
            mode: TrackerMode::Search,
            since_detection: f64::INFINITY,
            since_telemetry: f64::INFINITY,
            updated_at: None,
        }
    }
}

/// Latest drone position known to the ground unit, stamped with the drone's
/// own clock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelemetryFix {
    pub t: f64,
    pub position: Position3,
}

/// Where the camera sits and which azimuth pan zero points to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationGeometry {
    pub position: Position3,
    pub mount_heading: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SupervisorConfig {
    /// Oldest telemetry still usable for GNSS guidance, seconds.
    pub staleness_limit: f64,
    /// Height of the GNSS antenna above the LED ring center, meters.
    pub antenna_height: f64,
}

impl Default for SupervisorConfig {
    fn default() -> Self {
        Self {
            staleness_limit: 1.0,
            antenna_height: 0.4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupervisorOutput {
    pub error: Option<MisalignmentAngles>,
    pub state: TrackerState,
    pub reset_integrals: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn supervisor_step(
    det: Option<&Detection>,
    telemetry: Option<&TelemetryFix>,
    station: &StationGeometry,
    pose: PtuPose,
    intrinsics: &CameraIntrinsics,
    st: &TrackerState,
    cfg: &SupervisorConfig,
    now: f64,
) -> SupervisorOutput {
    let since_telemetry = telemetry.map_or(f64::INFINITY, |fix| (now - fix.t).max(0.0));
    let fresh = telemetry.filter(|_| since_telemetry <= cfg.staleness_limit);

    let (mode, error, since_detection) = if let Some(d) = det {
        (TrackerMode::Visual, Some(misalignment_from_offset(d.w, intrinsics)), 0.0)
    } else {
        let gnss = fresh.and_then(|fix| {
            let target = fix.position - Position3::new(0.0, 0.0, cfg.antenna_height);
            misalignment_from_positions(station.position, station.mount_heading, pose, target).ok()
        });
        let mode = if gnss.is_some() { TrackerMode::GnssFallback } else { TrackerMode::Search };
        let elapsed = st.updated_at.map_or(0.0, |t| (now - t).max(0.0));
        (mode, gnss, st.since_detection + elapsed)
    };
    SupervisorOutput {
        error,
        state: TrackerState {
            mode,
            since_detection,
            since_telemetry,
            updated_at: Some(now),
        },
        reset_integrals: mode == TrackerMode::Search && st.mode != TrackerMode::Search,
    }
}
