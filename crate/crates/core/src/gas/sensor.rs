use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{beam_integral, GasField};
use crate::geo::{GeodeticPosition, Position3};
use crate::quadrature::QuadratureParams;

/// Laser sensor and reflector parameters.
///
/// Returned signal strength is the fraction of the beam footprint landing on
/// the reflector disc, scaled by `(overexposure_distance / d)^2` and capped at
/// one. The validity floor is the strength of a perfectly aligned shot at
/// `max_range`, so the usable range ends exactly there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorModel {
    pub max_range: f64,
    pub reflector_radius: f64,
    /// Half-angle beam divergence, radians.
    pub beam_divergence: f64,
    /// Range fraction beyond which an aligned shot reports low signal.
    pub warn_fraction: f64,
    /// Below this distance the receiver saturates.
    pub overexposure_distance: f64,
    /// Standard deviation of additive reading noise, ppm·m.
    pub noise_sd: f64,
}

impl Default for SensorModel {
    fn default() -> Self {
        Self {
            max_range: 60.0,
            reflector_radius: 0.125,
            beam_divergence: 1e-3,
            warn_fraction: 0.8,
            overexposure_distance: 3.0,
            noise_sd: 20.0,
        }
    }
}

impl SensorModel {
    pub fn validate(&self) -> Result<(), String> {
        let mut bad = Vec::new();
        if !(self.max_range > 0.0) {
            bad.push("max_range must be > 0");
        }
        if !(self.reflector_radius > 0.0) {
            bad.push("reflector_radius must be > 0");
        }
        if !(self.beam_divergence >= 0.0) {
            bad.push("beam_divergence must be >= 0");
        }
        if !(self.warn_fraction > 0.0 && self.warn_fraction < 1.0) {
            bad.push("warn_fraction must lie in (0, 1)");
        }
        if !(self.overexposure_distance > 0.0 && self.overexposure_distance < self.warn_fraction * self.max_range) {
            bad.push("overexposure_distance must lie in (0, warn_fraction * max_range)");
        }
        if !(self.noise_sd >= 0.0) {
            bad.push("noise_sd must be >= 0");
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(bad.join("; "))
        }
    }

    /// Strength of an aligned shot at `max_range`.
    pub fn valid_threshold(&self) -> f64 {
        (self.overexposure_distance / self.max_range).powi(2)
    }

    pub fn warn_threshold(&self) -> f64 {
        (self.overexposure_distance / (self.warn_fraction * self.max_range)).powi(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StatusCode {
    Ok,
    WarnLowSignal,
    WarnHighTransmission,
    ErrorNoSignal,
    ErrorLightPollution,
}

impl StatusCode {
    pub const ALL: [StatusCode; 5] = [
        StatusCode::Ok,
        StatusCode::WarnLowSignal,
        StatusCode::WarnHighTransmission,
        StatusCode::ErrorNoSignal,
        StatusCode::ErrorLightPollution,
    ];

    /// OK and both warnings carry a usable reading.
    pub fn is_valid(self) -> bool {
        !self.is_error()
    }

    pub fn is_error(self) -> bool {
        matches!(self, StatusCode::ErrorNoSignal | StatusCode::ErrorLightPollution)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StatusCode::Ok => "OK",
            StatusCode::WarnLowSignal => "WARN_LOW_SIGNAL",
            StatusCode::WarnHighTransmission => "WARN_HIGH_TRANSMISSION",
            StatusCode::ErrorNoSignal => "ERROR_NO_SIGNAL",
            StatusCode::ErrorLightPollution => "ERROR_LIGHT_POLLUTION",
        }
    }
}

impl fmt::Display for StatusCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StatusCode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StatusCode::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown status code {s:?}"))
    }
}

/// One sensor sample as logged by the ground unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub t: f64,
    /// Path-integrated concentration, ppm·m; `None` for error statuses.
    pub m_ppm_m: Option<f64>,
    pub status: StatusCode,
    pub signal_strength: f64,
    /// Ground unit GNSS antenna position at `t`.
    pub tdlas_position: GeodeticPosition,
}

/// Laser origin and unit pointing direction in the local frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamGeometry {
    pub origin: Position3,
    pub direction: Position3,
}

impl BeamGeometry {
    /// Range along the beam and perpendicular miss distance of `target`.
    /// Targets behind the laser never get hit.
    pub fn range_and_miss(&self, target: Position3) -> (f64, f64) {
        let r = target - self.origin;
        let along = r.dot(self.direction);
        let d = r.norm();
        if along <= 0.0 {
            return (d, f64::INFINITY);
        }
        let perp = (r - self.direction * along).norm();
        (d, perp)
    }
}

/// Area of the intersection of two discs.
fn disc_overlap(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return PI * r * r;
    }
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0).acos();
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0).acos();
    let k = ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).max(0.0).sqrt();
    r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * k
}

/// Returned signal strength in `[0, 1]` for a reflector at distance `d` whose
/// center sits `lateral_miss` meters off the beam axis.
pub fn link_budget(d: f64, lateral_miss: f64, s: &SensorModel) -> f64 {
    if !lateral_miss.is_finite() {
        return 0.0;
    }
    let footprint = d.max(0.0) * s.beam_divergence;
    let hit = if footprint == 0.0 {
        if lateral_miss <= s.reflector_radius {
            1.0
        } else {
            0.0
        }
    } else {
        disc_overlap(footprint, s.reflector_radius, lateral_miss) / (PI * footprint * footprint)
    };
    let attenuation = if d <= s.overexposure_distance {
        1.0
    } else {
        (s.overexposure_distance / d).powi(2)
    };
    (hit * attenuation).clamp(0.0, 1.0)
}

fn classify(s: &SensorModel, d: f64, strength: f64, sun_glare: bool) -> StatusCode {
    // relative slack so an aligned shot at exactly max_range still counts
    let floor = s.valid_threshold() * (1.0 - 1e-12);
    if sun_glare {
        StatusCode::ErrorLightPollution
    } else if d > s.max_range || strength <= 0.0 || strength < floor {
        StatusCode::ErrorNoSignal
    } else if d < s.overexposure_distance {
        StatusCode::WarnHighTransmission
    } else if strength < s.warn_threshold() * (1.0 - 1e-12) {
        StatusCode::WarnLowSignal
    } else {
        StatusCode::Ok
    }
}

/// Simulates one sensor shot along `beam` at the true reflector position.
#[allow(clippy::too_many_arguments)]
pub fn tdlas_measure<R: Rng + ?Sized>(
    s: &SensorModel,
    field: &GasField,
    beam: &BeamGeometry,
    reflector: Position3,
    t: f64,
    sun_glare: bool,
    tdlas_position: GeodeticPosition,
    q: &QuadratureParams,
    rng: &mut R,
) -> MeasurementRecord {
    let (d, miss) = beam.range_and_miss(reflector);
    let strength = if d > 0.0 { link_budget(d, miss, s) } else { 0.0 };
    let status = classify(s, d, strength, sun_glare);
    let m_ppm_m = if status.is_error() {
        None
    } else {
        let clean = beam_integral(field, beam.origin, reflector, t, q).unwrap_or(0.0);
        let noise = if s.noise_sd > 0.0 {
            Normal::new(0.0, s.noise_sd).map(|n| n.sample(rng)).unwrap_or(0.0)
        } else {
            0.0
        };
        Some((clean + noise).max(0.0))
    };
    MeasurementRecord {
        t,
        m_ppm_m,
        status,
        signal_strength: strength,
        tdlas_position,
    }
}
