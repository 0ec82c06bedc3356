use serde::{Deserialize, Serialize};

use super::{RenderConfig, Route};
use crate::control::{PiGains, PtuLimits, SupervisorConfig};
use crate::gas::{Dispersion, GasField, GaussianPlume, SensorModel, Wind};
use crate::geo::{CameraIntrinsics, GeodeticPosition, Position3};
use crate::link::LinkParams;
use crate::quadrature::QuadratureParams;
use crate::vision::{VisionConfig, ZoomPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimingConfig {
    /// Simulation step, seconds.
    pub dt: f64,
    pub duration: f64,
    /// Camera frames and control updates per second.
    pub tracker_rate_hz: f64,
    pub sensor_rate_hz: f64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            duration: 60.0,
            tracker_rate_hz: 20.0,
            sensor_rate_hz: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationConfig {
    /// Laser and camera origin.
    pub position: GeodeticPosition,
    /// Azimuth of pan zero, radians clockwise from north.
    #[serde(default)]
    pub mount_heading: f64,
    /// Distance between the ground GNSS antenna and the laser, meters.
    #[serde(default = "default_station_antenna_offset")]
    pub antenna_offset: f64,
}

fn default_station_antenna_offset() -> f64 {
    0.1
}

impl Default for StationConfig {
    fn default() -> Self {
        Self {
            position: GeodeticPosition {
                latitude: 48.1375,
                longitude: 11.5755,
                altitude: 520.0,
            },
            mount_heading: 0.0,
            antenna_offset: default_station_antenna_offset(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DroneConfig {
    pub route: Route,
    /// Height of the GNSS antenna above the reflector and LED ring center.
    #[serde(default = "default_antenna_height")]
    pub antenna_height: f64,
    /// Per-axis standard deviation of the reported position, meters.
    #[serde(default = "default_gnss_noise")]
    pub gnss_noise_sd: f64,
}

fn default_antenna_height() -> f64 {
    0.4
}

fn default_gnss_noise() -> f64 {
    0.02
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraConfig {
    /// Fields of view at 1x zoom.
    pub base: CameraIntrinsics,
    pub zoom: ZoomPolicy,
    pub initial_zoom_step: u32,
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            base: CameraIntrinsics::default(),
            zoom: ZoomPolicy::default(),
            initial_zoom_step: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlConfig {
    pub gains: PiGains,
    pub limits: PtuLimits,
    pub supervisor: SupervisorConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkConfig {
    /// Drone to ground.
    pub telemetry: LinkParams,
    /// Ground to drone.
    pub corrections: LinkParams,
    pub telemetry_rate_hz: f64,
    pub correction_rate_hz: f64,
    pub correction_payload_bytes: usize,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            telemetry: LinkParams::default(),
            corrections: LinkParams::default(),
            telemetry_rate_hz: 5.0,
            correction_rate_hz: 1.0,
            correction_payload_bytes: 64,
        }
    }
}

/// Everything one simulated run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub timing: TimingConfig,
    #[serde(default)]
    pub station: StationConfig,
    pub drone: DroneConfig,
    pub gas: GasField,
    #[serde(default)]
    pub sensor: SensorModel,
    #[serde(default)]
    pub vision: VisionConfig,
    #[serde(default)]
    pub camera: CameraConfig,
    #[serde(default)]
    pub control: ControlConfig,
    #[serde(default)]
    pub link: LinkConfig,
    #[serde(default)]
    pub render: RenderConfig,
    /// `[start, end]` intervals, seconds, during which the sun blinds the sensor.
    #[serde(default)]
    pub sun_glare: Vec<[f64; 2]>,
    #[serde(default)]
    pub quadrature: QuadratureParams,
}

/// Steps per event for a rate, if the rate divides the step frequency.
pub(crate) fn cadence(dt: f64, rate_hz: f64) -> Option<u64> {
    if !(rate_hz > 0.0 && dt > 0.0) {
        return None;
    }
    let steps = 1.0 / (rate_hz * dt);
    let n = steps.round();
    ((steps - n).abs() < 1e-9 * steps.max(1.0) && n >= 1.0).then_some(n as u64)
}

impl ScenarioConfig {
    /// All problems found, each prefixed with the offending field path.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errs = Vec::new();
        let mut check = |path: &str, r: Result<(), String>| {
            if let Err(e) = r {
                errs.push(format!("{path}: {e}"));
            }
        };
        let t = &self.timing;
        check("timing.dt", if t.dt > 0.0 && t.dt.is_finite() { Ok(()) } else { Err("must be > 0".into()) });
        check(
            "timing.duration",
            if t.duration > 0.0 && t.duration.is_finite() { Ok(()) } else { Err("must be > 0".into()) },
        );
        let rate = |r: f64| cadence(t.dt, r).map(|_| ()).ok_or_else(|| format!("{r} Hz is not a whole number of {} s steps", t.dt));
        check("timing.tracker_rate_hz", rate(t.tracker_rate_hz));
        check("timing.sensor_rate_hz", rate(t.sensor_rate_hz));
        check("link.telemetry_rate_hz", rate(self.link.telemetry_rate_hz));
        check("link.correction_rate_hz", rate(self.link.correction_rate_hz));
        check("station.position", self.station.position.validate().map_err(|e| e.to_string()));
        check(
            "station.position",
            if self.station.position.latitude.abs() <= 84.0 { Ok(()) } else { Err("outside the UTM band".into()) },
        );
        check("station.mount_heading", if self.station.mount_heading.is_finite() { Ok(()) } else { Err("must be finite".into()) });
        check("drone.route", self.drone.route.validate());
        check(
            "drone.antenna_height",
            if self.drone.antenna_height.is_finite() { Ok(()) } else { Err("must be finite".into()) },
        );
        check(
            "drone.gnss_noise_sd",
            if self.drone.gnss_noise_sd >= 0.0 && self.drone.gnss_noise_sd.is_finite() { Ok(()) } else { Err("must be >= 0".into()) },
        );
        check("gas", self.gas.validate().map_err(|e| e.to_string()));
        check("sensor", self.sensor.validate());
        check("vision", self.vision.validate());
        check("camera.base", self.camera.base.validate().map_err(|e| e.to_string()));
        check("camera.zoom", self.camera.zoom.validate());
        check(
            "camera.initial_zoom_step",
            if self.camera.initial_zoom_step < self.camera.zoom.steps { Ok(()) } else { Err("beyond the last zoom step".into()) },
        );
        check("control.gains", self.control.gains.validate());
        check("control.limits", self.control.limits.validate());
        check(
            "control.supervisor.staleness_limit",
            if self.control.supervisor.staleness_limit >= 0.0 { Ok(()) } else { Err("must be >= 0".into()) },
        );
        check("link.telemetry", self.link.telemetry.validate());
        check("link.corrections", self.link.corrections.validate());
        check(
            "link.correction_payload_bytes",
            if self.link.correction_payload_bytes + 4 <= crate::link::MAX_PAYLOAD { Ok(()) } else { Err("exceeds the frame payload limit".into()) },
        );
        check("render", self.render.validate());
        for (k, w) in self.sun_glare.iter().enumerate() {
            check(&format!("sun_glare[{k}]"), if w[0] <= w[1] { Ok(()) } else { Err("start after end".into()) });
        }
        check("quadrature", self.quadrature.validate());
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    pub fn sun_glare_at(&self, t: f64) -> bool {
        self.sun_glare.iter().any(|w| t >= w[0] && t <= w[1])
    }
}

fn scenario(name: &str, route: Route, gas: GasField, duration: f64) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        seed: 1,
        timing: TimingConfig {
            duration,
            ..TimingConfig::default()
        },
        station: StationConfig::default(),
        drone: DroneConfig {
            route,
            antenna_height: default_antenna_height(),
            gnss_noise_sd: default_gnss_noise(),
        },
        gas,
        sensor: SensorModel::default(),
        vision: VisionConfig::default(),
        camera: CameraConfig::default(),
        control: ControlConfig::default(),
        link: LinkConfig::default(),
        render: RenderConfig::default(),
        sun_glare: Vec::new(),
        quadrature: QuadratureParams::default(),
    }
}

fn route_duration(r: &Route) -> f64 {
    (r.length() / r.cruise_speed + 5.0).ceil()
}

/// Zig-zag legs across the range with the altitude rising leg by leg. The
/// route starts with a diagonal that passes 0.35 m from the station, faster
/// than the unit can pan.
pub fn zigzag_range() -> ScenarioConfig {
    let rows: Vec<f64> = (0..8).map(|k| 10.0 + 8.0 * f64::from(k)).collect();
    let mut points = vec![(2.5, -1.2)];
    for (k, north) in rows.iter().enumerate() {
        let (a, b) = if k % 2 == 0 { (-15.0, 15.0) } else { (15.0, -15.0) };
        points.push((a, *north));
        points.push((b, *north));
    }
    let last = (points.len() - 1) as f64;
    let waypoints = points
        .iter()
        .enumerate()
        .map(|(k, &(e, n))| Position3::new(e, n, 0.8 + (7.9 - 0.8) * k as f64 / last))
        .collect();
    let route = Route::new(waypoints, 1.0);
    let duration = route_duration(&route);
    scenario("zigzag-range", route, GasField::uniform(400.0), duration)
}

/// Ground level below the laser in the plume scenario, meters.
pub const PLUME_GROUND_LEVEL: f64 = -1.5;

/// Horizontal lines downwind of a 25 L/min source 16 m south of the
/// station, flown left to right and back while descending from 6 m to 1.8 m.
pub fn plume_scan() -> ScenarioConfig {
    let plume = GaussianPlume {
        source: Position3::new(0.0, -16.0, PLUME_GROUND_LEVEL + 1.5),
        emission_rate_l_per_min: 25.0,
        wind: Wind { east: 0.26, north: -0.966 },
        ground_level: PLUME_GROUND_LEVEL,
        dispersion: Dispersion::default(),
    };
    let lines = 8;
    let mut waypoints = Vec::new();
    for k in 0..lines {
        let up = 6.0 - (6.0 - 1.8) * f64::from(k) / f64::from(lines - 1);
        let (a, b) = if k % 2 == 0 { (-12.0, 12.0) } else { (12.0, -12.0) };
        waypoints.push(Position3::new(a, -46.0, up));
        waypoints.push(Position3::new(b, -46.0, up));
    }
    let route = Route::new(waypoints, 1.0);
    let duration = route_duration(&route);
    let mut cfg = scenario(
        "plume-scan",
        route,
        GasField::Sum {
            fields: vec![GasField::uniform(400.0), GasField::GaussianPlume(plume)],
        },
        duration,
    );
    cfg.station.mount_heading = std::f64::consts::PI;
    cfg
}

/// Straight recession from 5 m to 80 m, across the sensor's range limit.
pub fn flyaway_range() -> ScenarioConfig {
    let route = Route::new(vec![Position3::new(0.0, 5.0, 2.0), Position3::new(0.0, 80.0, 2.0)], 1.0);
    let duration = route_duration(&route);
    scenario("flyaway-range", route, GasField::uniform(400.0), duration)
}

/// Fast pass 1 m in front of the station: the required pan rate peaks
/// above the unit's speed limit.
pub fn close_flyby() -> ScenarioConfig {
    let route = Route::new(vec![Position3::new(-30.0, 1.0, 1.0), Position3::new(30.0, 1.0, 1.0)], 3.0);
    let duration = route_duration(&route);
    scenario("close-flyby", route, GasField::uniform(400.0), duration)
}

pub fn builtin_scenarios() -> Vec<ScenarioConfig> {
    vec![zigzag_range(), plume_scan(), flyaway_range(), close_flyby()]
}

pub fn builtin(name: &str) -> Option<ScenarioConfig> {
    builtin_scenarios().into_iter().find(|s| s.name == name)
}
