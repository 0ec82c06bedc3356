//! Postprocessing of the two logged streams: aligning drone positions to
//! measurement times, path-average concentrations, validity statistics and
//! projection of beams onto a vertical plane.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gas::{MeasurementRecord, StatusCode};
use crate::geo::{euclidean_distance, GeoError, GeodeticPosition, LocalFrame, Position3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PostError {
    #[error("time {t} outside telemetry range [{first}, {last}]")]
    OutOfRange { t: f64, first: f64, last: f64 },
    #[error("path length {0} m below the minimum distance")]
    DegenerateDistance(f64),
    #[error("beam lies in the projection plane")]
    DegenerateProjection,
    #[error("record has an error status and no usable reading")]
    NoReading,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Geo(#[from] GeoError),
}

/// Drone positions in the local frame, strictly increasing in time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Track {
    times: Vec<f64>,
    positions: Vec<Position3>,
}

impl Track {
    pub fn new(samples: Vec<(f64, Position3)>) -> Result<Self, PostError> {
        if let Some(k) = samples.windows(2).position(|w| !(w[1].0 > w[0].0)) {
            return Err(PostError::InvalidInput(format!(
                "sample times must be strictly increasing (sample {})",
                k + 1
            )));
        }
        if samples.iter().any(|(t, p)| !t.is_finite() || !p.is_finite()) {
            return Err(PostError::InvalidInput("non-finite sample".into()));
        }
        let (times, positions) = samples.into_iter().unzip();
        Ok(Self { times, positions })
    }

    /// Converts geodetic telemetry into the local frame.
    pub fn from_geodetic(samples: &[(f64, GeodeticPosition)], frame: &LocalFrame) -> Result<Self, PostError> {
        let local = samples
            .iter()
            .map(|(t, g)| Ok((*t, frame.to_local(*g)?)))
            .collect::<Result<Vec<_>, PostError>>()?;
        Self::new(local)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn time_range(&self) -> Option<(f64, f64)> {
        Some((*self.times.first()?, *self.times.last()?))
    }

    /// Linear interpolation between the bracketing samples; no extrapolation.
    pub fn interpolate(&self, t: f64) -> Result<Position3, PostError> {
        let (first, last) = self.time_range().unwrap_or((f64::NAN, f64::NAN));
        if !(t >= first && t <= last) {
            return Err(PostError::OutOfRange { t, first, last });
        }
        let k = self.times.partition_point(|&s| s <= t);
        if k == self.times.len() {
            return Ok(self.positions[k - 1]);
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let s = (t - t0) / (t1 - t0);
        if s == 0.0 {
            return Ok(self.positions[k - 1]);
        }
        Ok(self.positions[k - 1].lerp(self.positions[k], s))
    }
}

pub fn interpolate_position(
    log: &[(f64, GeodeticPosition)],
    frame: &LocalFrame,
    t: f64,
) -> Result<Position3, PostError> {
    Track::from_geodetic(log, frame)?.interpolate(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationSample {
    pub t: f64,
    /// Path-average concentration, ppm.
    pub u_bar: f64,
    /// Path length, meters.
    pub d: f64,
    pub tdlas: Position3,
    pub drone: Position3,
    pub status: StatusCode,
}

pub const DEFAULT_MIN_DISTANCE: f64 = 1.0;

pub fn average_concentration(
    rec: &MeasurementRecord,
    tdlas: Position3,
    drone: Position3,
    min_distance: f64,
) -> Result<ConcentrationSample, PostError> {
    let m = rec.m_ppm_m.filter(|_| !rec.status.is_error()).ok_or(PostError::NoReading)?;
    let d = euclidean_distance(tdlas, drone);
    if !(d >= min_distance) {
        return Err(PostError::DegenerateDistance(d));
    }
    Ok(ConcentrationSample {
        t: rec.t,
        u_bar: m / d,
        d,
        tdlas,
        drone,
        status: rec.status,
    })
}

pub fn filter_valid(records: &[MeasurementRecord]) -> Vec<MeasurementRecord> {
    records.iter().filter(|r| r.status.is_valid()).copied().collect()
}

/// Vertical plane through `origin` with a horizontal unit `normal`. In-plane
/// coordinates are `(lateral, height)`: lateral along `normal × up`, height
/// as `up - origin.up`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneSpec {
    pub origin: Position3,
    pub normal: Position3,
}

impl PlaneSpec {
    pub fn new(origin: Position3, normal_east: f64, normal_north: f64) -> Result<Self, PostError> {
        let n = normal_east.hypot(normal_north);
        if !(n > 0.0 && n.is_finite()) || !origin.is_finite() {
            return Err(PostError::InvalidInput("plane normal must be horizontal and nonzero".into()));
        }
        Ok(Self {
            origin,
            normal: Position3::new(normal_east / n, normal_north / n, 0.0),
        })
    }

    pub fn lateral_axis(&self) -> Position3 {
        self.normal.cross(Position3::new(0.0, 0.0, 1.0))
    }

    fn signed_distance(&self, p: Position3) -> f64 {
        (p - self.origin).dot(self.normal)
    }
}

/// Where the beam crosses the plane, in in-plane coordinates.
pub fn project_to_plane(sample: &ConcentrationSample, plane: &PlaneSpec) -> Result<Option<(f64, f64)>, PostError> {
    // endpoints within rounding of the plane count as lying on it
    let eps = 1e-9 * (sample.drone - sample.tdlas).norm();
    let snap = |s: f64| if s.abs() <= eps { 0.0 } else { s };
    let s0 = snap(plane.signed_distance(sample.tdlas));
    let s1 = snap(plane.signed_distance(sample.drone));
    if s0 == 0.0 && s1 == 0.0 {
        return Err(PostError::DegenerateProjection);
    }
    if (s0 > 0.0 && s1 > 0.0) || (s0 < 0.0 && s1 < 0.0) {
        return Ok(None);
    }
    let s = s0 / (s0 - s1);
    let hit = sample.tdlas.lerp(sample.drone, s) - plane.origin;
    Ok(Some((hit.dot(plane.lateral_axis()), hit.up)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub valid: usize,
}

impl DistanceBin {
    pub fn valid_fraction(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.valid as f64 / self.count as f64
        }
    }
}

/// Occupied half-open bins `[k·w, (k+1)·w)`, in increasing distance order.
pub fn distance_status_table(records: &[(f64, StatusCode)], bin_width: f64) -> Result<Vec<DistanceBin>, PostError> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(PostError::InvalidInput("bin_width must be > 0".into()));
    }
    let mut bins = std::collections::BTreeMap::<i64, (usize, usize)>::new();
    for &(d, status) in records {
        if !d.is_finite() {
            return Err(PostError::InvalidInput(format!("non-finite distance {d}")));
        }
        let e = bins.entry((d / bin_width).floor() as i64).or_default();
        e.0 += 1;
        e.1 += usize::from(status.is_valid());
    }
    Ok(bins
        .into_iter()
        .map(|(k, (count, valid))| DistanceBin {
            lo: k as f64 * bin_width,
            hi: (k + 1) as f64 * bin_width,
            count,
            valid,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// `background · offset / (d − offset)`, ppm.
    pub worst_case: f64,
    /// `background · offset / d`, ppm.
    pub approximation: f64,
}

/// Worst-case path-average error when the drone antenna and the laser are
/// offset from the true beam endpoints.
pub fn error_budget(
    offset_antenna_reflector: f64,
    offset_antenna_laser: f64,
    d: f64,
    background: f64,
) -> Result<ErrorBudget, PostError> {
    let offset = offset_antenna_reflector.abs() + offset_antenna_laser.abs();
    if !(d > offset) {
        return Err(PostError::InvalidInput(format!("distance {d} m must exceed total offset {offset} m")));
    }
    Ok(ErrorBudget {
        worst_case: background * offset / (d - offset),
        approximation: background * offset / d,
    })
}
