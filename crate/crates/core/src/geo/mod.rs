//! Coordinate systems and the angle math that ties pixels, fields of view and
//! world positions together.
//!
//! All cross-agent geometry happens in a local East-North-Up frame anchored at
//! the ground station's UTM position (see [`LocalFrame`]). Angles are wrapped
//! to `(-π, π]`.

mod utm;

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use utm::{geodetic_to_utm, geodetic_to_utm_in_zone, utm_to_geodetic, utm_zone_for};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("latitude {latitude}° is outside the UTM band (|lat| <= 84°)")]
    OutOfUtmBand { latitude: f64 },
    #[error("invalid geodetic coordinate: {0}")]
    InvalidCoordinate(String),
    #[error("invalid UTM zone {0}")]
    InvalidZone(u8),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodeticPosition {
    /// Degrees, [-90, 90].
    pub latitude: f64,
    /// Degrees, [-180, 180).
    pub longitude: f64,
    /// Meters above a shared reference.
    pub altitude: f64,
}

impl GeodeticPosition {
    pub fn new(latitude: f64, longitude: f64, altitude: f64) -> Result<Self, GeoError> {
        let g = Self {
            latitude,
            longitude,
            altitude,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        if !(-90.0..=90.0).contains(&self.latitude) {
            return Err(GeoError::InvalidCoordinate(format!(
                "latitude {} outside [-90, 90]",
                self.latitude
            )));
        }
        if !(-180.0..180.0).contains(&self.longitude) {
            return Err(GeoError::InvalidCoordinate(format!(
                "longitude {} outside [-180, 180)",
                self.longitude
            )));
        }
        if !self.altitude.is_finite() {
            return Err(GeoError::InvalidCoordinate("altitude not finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hemisphere {
    North,
    South,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtmPosition {
    pub zone: u8,
    pub hemisphere: Hemisphere,
    pub easting: f64,
    pub northing: f64,
    pub altitude: f64,
}

/// Local East-North-Up position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position3 {
    pub east: f64,
    pub north: f64,
    pub up: f64,
}

impl Position3 {
    pub const ORIGIN: Position3 = Position3 {
        east: 0.0,
        north: 0.0,
        up: 0.0,
    };

    pub const fn new(east: f64, north: f64, up: f64) -> Self {
        Self { east, north, up }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.east * other.east + self.north * other.north + self.up * other.up
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.north * o.up - self.up * o.north,
            self.up * o.east - self.east * o.up,
            self.east * o.north - self.north * o.east,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn horizontal_norm(self) -> f64 {
        self.east.hypot(self.north)
    }

    pub fn is_finite(self) -> bool {
        self.east.is_finite() && self.north.is_finite() && self.up.is_finite()
    }

    /// Linear interpolation, `s = 0` gives `self`.
    pub fn lerp(self, other: Self, s: f64) -> Self {
        self + (other - self) * s
    }

    /// Unit vector for an azimuth (clockwise from north) and elevation.
    pub fn from_azimuth_elevation(azimuth: f64, elevation: f64) -> Self {
        let (se, ce) = elevation.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        Self::new(ce * sa, ce * ca, se)
    }
}

impl Add for Position3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.east + o.east, self.north + o.north, self.up + o.up)
    }
}

impl Sub for Position3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.east - o.east, self.north - o.north, self.up - o.up)
    }
}

impl Mul<f64> for Position3 {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::new(self.east * k, self.north * k, self.up * k)
    }
}

impl Neg for Position3 {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

pub fn euclidean_distance(a: Position3, b: Position3) -> f64 {
    (a - b).norm()
}

/// Wraps an angle to `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    r
}

/// East-North-Up frame anchored at a UTM position. Every position converted
/// through one frame is projected in the anchor's zone, so positions near a
/// zone boundary stay in one consistent Cartesian grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    origin: UtmPosition,
}

impl LocalFrame {
    pub fn new(origin: GeodeticPosition) -> Result<Self, GeoError> {
        Ok(Self {
            origin: geodetic_to_utm(origin)?,
        })
    }

    pub fn origin(&self) -> UtmPosition {
        self.origin
    }

    pub fn to_local(&self, g: GeodeticPosition) -> Result<Position3, GeoError> {
        let u = geodetic_to_utm_in_zone(g, self.origin.zone, self.origin.hemisphere)?;
        Ok(Position3::new(
            u.easting - self.origin.easting,
            u.northing - self.origin.northing,
            u.altitude - self.origin.altitude,
        ))
    }

    pub fn to_geodetic(&self, p: Position3) -> Result<GeodeticPosition, GeoError> {
        utm_to_geodetic(&UtmPosition {
            zone: self.origin.zone,
            hemisphere: self.origin.hemisphere,
            easting: self.origin.easting + p.east,
            northing: self.origin.northing + p.north,
            altitude: self.origin.altitude + p.up,
        })
    }
}

/// Image-plane point in pixel-index coordinates: the pixel with column `i`
/// and row `j` is centered on `(i, j)` and covers `[i-0.5, i+0.5)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PixelPoint {
    pub x1: f64,
    pub x2: f64,
}

impl PixelPoint {
    pub const fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameGeometry {
    pub res_x1: u32,
    pub res_x2: u32,
    pub center: PixelPoint,
}

impl FrameGeometry {
    /// Geometry with the center at `((res - 1) / 2)` on both axes.
    pub fn new(res_x1: u32, res_x2: u32) -> Self {
        Self {
            res_x1,
            res_x2,
            center: PixelPoint::new(
                (f64::from(res_x1) - 1.0) / 2.0,
                (f64::from(res_x2) - 1.0) / 2.0,
            ),
        }
    }

    pub fn contains(&self, p: PixelPoint) -> bool {
        p.x1 >= -0.5
            && p.x2 >= -0.5
            && p.x1 < f64::from(self.res_x1) - 0.5
            && p.x2 < f64::from(self.res_x2) - 0.5
    }
}

impl Default for FrameGeometry {
    fn default() -> Self {
        Self::new(640, 480)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NormalizedOffset {
    pub w1: f64,
    pub w2: f64,
}

impl NormalizedOffset {
    pub const fn new(w1: f64, w2: f64) -> Self {
        Self { w1, w2 }
    }

    pub fn to_pixel(self, fg: &FrameGeometry) -> PixelPoint {
        PixelPoint::new(
            fg.center.x1 + self.w1 * f64::from(fg.res_x1),
            fg.center.x2 + self.w2 * f64::from(fg.res_x2),
        )
    }
}

/// Horizontal and vertical fields of view, radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub hfov: f64,
    pub vfov: f64,
}

impl CameraIntrinsics {
    pub fn new(hfov: f64, vfov: f64) -> Result<Self, GeoError> {
        let c = Self { hfov, vfov };
        c.validate()?;
        Ok(c)
    }

    pub fn from_degrees(hfov: f64, vfov: f64) -> Result<Self, GeoError> {
        Self::new(hfov.to_radians(), vfov.to_radians())
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        let ok = |a: f64| a > 0.0 && a < PI;
        if ok(self.hfov) && ok(self.vfov) {
            Ok(())
        } else {
            Err(GeoError::InvalidCoordinate(format!(
                "fields of view must lie in (0, π), got hfov {} vfov {}",
                self.hfov, self.vfov
            )))
        }
    }
}

impl Default for CameraIntrinsics {
    /// 60° horizontal, vertical matched to a 4:3 sensor with square pixels.
    fn default() -> Self {
        let hfov = 60f64.to_radians();
        let vfov = 2.0 * ((hfov / 2.0).tan() * 0.75).atan();
        Self { hfov, vfov }
    }
}

/// Pan error `d_phi` (positive: target clockwise of the boresight) and tilt
/// error `d_theta` (positive: target above the boresight), radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MisalignmentAngles {
    pub d_phi: f64,
    pub d_theta: f64,
}

impl MisalignmentAngles {
    pub const fn new(d_phi: f64, d_theta: f64) -> Self {
        Self { d_phi, d_theta }
    }

    pub fn magnitude(&self) -> f64 {
        self.d_phi.hypot(self.d_theta)
    }
}

/// Absolute pan/tilt orientation of the unit, radians. Pan is measured
/// clockwise from the mount's zero direction, tilt upward from horizontal.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PtuPose {
    pub pan: f64,
    pub tilt: f64,
}

impl PtuPose {
    pub const fn new(pan: f64, tilt: f64) -> Self {
        Self { pan, tilt }
    }

    /// Boresight unit vector in the local frame.
    pub fn boresight(&self, mount_heading: f64) -> Position3 {
        Position3::from_azimuth_elevation(mount_heading + self.pan, self.tilt)
    }
}

pub fn normalized_offset(p: PixelPoint, fg: &FrameGeometry) -> NormalizedOffset {
    NormalizedOffset {
        w1: (p.x1 - fg.center.x1) / f64::from(fg.res_x1),
        w2: (p.x2 - fg.center.x2) / f64::from(fg.res_x2),
    }
}

pub fn misalignment_from_offset(w: NormalizedOffset, c: &CameraIntrinsics) -> MisalignmentAngles {
    MisalignmentAngles {
        d_phi: (2.0 * w.w1 * (0.5 * c.hfov).tan()).atan(),
        d_theta: (2.0 * w.w2 * (0.5 * c.vfov).tan()).atan(),
    }
}

/// Inverse of [`misalignment_from_offset`].
pub fn offset_from_misalignment(a: MisalignmentAngles, c: &CameraIntrinsics) -> NormalizedOffset {
    NormalizedOffset {
        w1: a.d_phi.tan() / (2.0 * (0.5 * c.hfov).tan()),
        w2: a.d_theta.tan() / (2.0 * (0.5 * c.vfov).tan()),
    }
}

/// Azimuth (clockwise from north) and elevation of `target` seen from `station`.
pub fn bearing_elevation(station: Position3, target: Position3) -> Result<(f64, f64), GeoError> {
    let r = target - station;
    let horizontal = r.horizontal_norm();
    if horizontal == 0.0 && r.up == 0.0 {
        return Err(GeoError::DegenerateGeometry("target coincides with station"));
    }
    Ok((r.east.atan2(r.north), r.up.atan2(horizontal)))
}

/// Misalignment between the unit's boresight and the direction to `target`,
/// used when the drone is located from its GNSS telemetry.
pub fn misalignment_from_positions(
    station: Position3,
    mount_heading: f64,
    pose: PtuPose,
    target: Position3,
) -> Result<MisalignmentAngles, GeoError> {
    let (bearing, elevation) = bearing_elevation(station, target)?;
    Ok(MisalignmentAngles {
        d_phi: wrap_angle(bearing - (mount_heading + pose.pan)),
        d_theta: wrap_angle(elevation - pose.tilt),
    })
}

/// True when both angles are strictly inside `(-π/2, π/2)`.
pub fn in_front(a: &MisalignmentAngles) -> bool {
    a.d_phi.abs() < FRAC_PI_2 && a.d_theta.abs() < FRAC_PI_2
}
