use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::scenario::cadence;
use super::{drone_step, render_frame, DroneState, ScenarioConfig};
use crate::control::{
    pi_step, ptu_step, snap_pose, supervisor_step, PiState, StationGeometry, TelemetryFix, TrackerMode, TrackerState,
    VelocityCommand,
};
use crate::gas::{tdlas_measure, BeamGeometry, MeasurementRecord};
use crate::geo::{
    bearing_elevation, wrap_angle, GeoError, GeodeticPosition, LocalFrame, MisalignmentAngles, Position3, PtuPose,
};
use crate::link::{decode, encode, Channel, CorrectionMessage, Message, TelemetryMessage};
use crate::vision::{detect, fov_for_zoom, zoom_step, ZoomState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid scenario config:\n  {}", .0.join("\n  "))]
    InvalidConfig(Vec<String>),
    #[error("simulation failed: {0}")]
    Runtime(String),
}

impl From<GeoError> for SimError {
    fn from(e: GeoError) -> Self {
        SimError::Runtime(e.to_string())
    }
}

/// One message as logged on board the drone, whether or not it arrived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRow {
    pub t: f64,
    pub seq: u32,
    pub position: GeodeticPosition,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackerRow {
    pub t: f64,
    pub mode: TrackerMode,
    pub pose: PtuPose,
    pub error: Option<MisalignmentAngles>,
    pub zoom: f64,
}

/// Reflector position, kept apart from everything the tracker can see.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub t: f64,
    pub position: GeodeticPosition,
    pub local: Position3,
    pub waypoint: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LinkStats {
    pub telemetry_sent: u64,
    pub telemetry_received: u64,
    pub telemetry_rejected: u64,
    pub corrections_sent: u64,
    pub corrections_received: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunLogs {
    pub telemetry: Vec<TelemetryRow>,
    pub measurements: Vec<MeasurementRecord>,
    pub tracker: Vec<TrackerRow>,
    pub truth: Vec<TruthRow>,
    pub link: LinkStats,
}

/// Independent random streams, one per subsystem.
const STREAM_RENDER: u64 = 1;
const STREAM_SENSOR: u64 = 2;
const STREAM_TELEMETRY_LINK: u64 = 3;
const STREAM_CORRECTION_LINK: u64 = 4;
const STREAM_GNSS: u64 = 5;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Fixed-step closed-loop run. Each step advances the drone, emits and
/// delivers telemetry, grabs a frame, updates zoom and mode, runs the PI
/// law, moves the unit and finally fires the sensor.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunLogs, SimError> {
    cfg.validate().map_err(SimError::InvalidConfig)?;
    let dt = cfg.timing.dt;
    let steps = (cfg.timing.duration / dt).round() as u64;
    let every = |rate| cadence(dt, rate).expect("validated cadence");
    let (tracker_every, sensor_every) = (every(cfg.timing.tracker_rate_hz), every(cfg.timing.sensor_rate_hz));
    let (telemetry_every, correction_every) = (every(cfg.link.telemetry_rate_hz), every(cfg.link.correction_rate_hz));
    let tracker_dt = tracker_every as f64 * dt;

    let frame = LocalFrame::new(cfg.station.position)?;
    let station = StationGeometry {
        position: Position3::ORIGIN,
        mount_heading: cfg.station.mount_heading,
    };
    let route = &cfg.drone.route;
    let antenna = Position3::new(0.0, 0.0, cfg.drone.antenna_height);
    let fg = cfg.vision.frame_geometry();
    let (limits, gains) = (&cfg.control.limits, &cfg.control.gains);

    let mut rng_render = stream(cfg.seed, STREAM_RENDER);
    let mut rng_sensor = stream(cfg.seed, STREAM_SENSOR);
    let mut rng_tlink = stream(cfg.seed, STREAM_TELEMETRY_LINK);
    let mut rng_clink = stream(cfg.seed, STREAM_CORRECTION_LINK);
    let mut rng_gnss = stream(cfg.seed, STREAM_GNSS);
    let gnss_noise = Normal::new(0.0, cfg.drone.gnss_noise_sd).map_err(|e| SimError::Runtime(e.to_string()))?;

    let mut drone = DroneState::at_start(route);
    let (az, el) = bearing_elevation(station.position, drone.position)?;
    let mut pose = snap_pose(PtuPose::new(wrap_angle(az - station.mount_heading), el), limits);
    let mut zoom = ZoomState::new(cfg.camera.initial_zoom_step, cfg.camera.zoom.steps);
    let mut tracker = TrackerState::default();
    let mut pi = PiState::default();
    let mut cmd = VelocityCommand::default();
    let mut telemetry_link: Channel<Vec<u8>> = Channel::new(cfg.link.telemetry);
    let mut correction_link: Channel<Vec<u8>> = Channel::new(cfg.link.corrections);
    let mut latest_fix: Option<(u32, TelemetryFix)> = None;
    let (mut telemetry_seq, mut correction_seq) = (0u32, 0u32);
    let mut logs = RunLogs::default();

    for k in 0..=steps {
        let t = k as f64 * dt;
        if k > 0 {
            drone = drone_step(&drone, route, dt);
        }
        let truth_geo = frame.to_geodetic(drone.position)?;
        logs.truth.push(TruthRow {
            t,
            position: truth_geo,
            local: drone.position,
            waypoint: drone.waypoint,
        });

        if k % telemetry_every == 0 {
            let noise = Position3::new(
                gnss_noise.sample(&mut rng_gnss),
                gnss_noise.sample(&mut rng_gnss),
                gnss_noise.sample(&mut rng_gnss),
            );
            let position = frame.to_geodetic(drone.position + antenna + noise)?;
            let msg = TelemetryMessage { seq: telemetry_seq, t, position };
            telemetry_seq += 1;
            logs.telemetry.push(TelemetryRow { t, seq: msg.seq, position });
            let bytes = encode(&Message::Telemetry(msg)).map_err(|e| SimError::Runtime(e.to_string()))?;
            telemetry_link.send(bytes, t, &mut rng_tlink);
            logs.link.telemetry_sent += 1;
        }
        if k % correction_every == 0 {
            let payload = (0..cfg.link.correction_payload_bytes).map(|i| (i as u32 ^ correction_seq) as u8).collect();
            let msg = Message::Correction(CorrectionMessage { seq: correction_seq, payload });
            correction_seq += 1;
            let bytes = encode(&msg).map_err(|e| SimError::Runtime(e.to_string()))?;
            correction_link.send(bytes, t, &mut rng_clink);
            logs.link.corrections_sent += 1;
        }
        logs.link.corrections_received += correction_link
            .deliver(t)
            .iter()
            .filter(|b| matches!(decode(b), Ok(d) if matches!(d.message, Message::Correction(_))))
            .count() as u64;
        for bytes in telemetry_link.deliver(t) {
            match decode(&bytes) {
                Ok(d) => {
                    let Message::Telemetry(m) = d.message else { continue };
                    logs.link.telemetry_received += 1;
                    if latest_fix.is_none_or(|(seq, _)| m.seq > seq) {
                        let position = frame.to_local(m.position)?;
                        latest_fix = Some((m.seq, TelemetryFix { t: m.t, position }));
                    }
                }
                Err(_) => logs.link.telemetry_rejected += 1,
            }
        }

        if k % tracker_every == 0 {
            let intrinsics = fov_for_zoom(zoom.zoom(), &cfg.camera.base);
            let image = render_frame(
                drone.position,
                station.position,
                station.mount_heading,
                pose,
                &intrinsics,
                &fg,
                &cfg.render,
                &mut rng_render,
            );
            let det = detect(&image, &cfg.vision);
            let out = supervisor_step(
                det.as_ref(),
                latest_fix.as_ref().map(|(_, f)| f),
                &station,
                pose,
                &intrinsics,
                &tracker,
                &cfg.control.supervisor,
                t,
            );
            tracker = out.state;
            if out.reset_integrals {
                pi.reset();
            }
            cmd = match out.error {
                Some(e) => {
                    let (c, next) = pi_step(e, &pi, gains, limits, tracker_dt);
                    pi = next;
                    c
                }
                None => VelocityCommand::default(),
            };
            logs.tracker.push(TrackerRow {
                t,
                mode: tracker.mode,
                pose,
                error: out.error,
                zoom: zoom.zoom(),
            });
            zoom.tick(tracker_dt);
            zoom.apply(zoom_step(det.as_ref(), &zoom, &cfg.camera.zoom));
        }

        pose = ptu_step(pose, cmd, limits, dt);

        if k % sensor_every == 0 {
            let beam = BeamGeometry {
                origin: station.position,
                direction: pose.boresight(station.mount_heading),
            };
            logs.measurements.push(tdlas_measure(
                &cfg.sensor,
                &cfg.gas,
                &beam,
                drone.position,
                t,
                cfg.sun_glare_at(t),
                cfg.station.position,
                &cfg.quadrature,
                &mut rng_sensor,
            ));
        }
    }
    Ok(logs)
}
