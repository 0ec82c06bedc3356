//! `optrack postprocess`: drone positions interpolated to measurement
//! times, path-average concentrations, validity filtering and projection
//! onto a vertical plane.
//!
//! Positions are expressed in a local frame anchored at the laser position
//! of the first measurement. Rejected records go to a sidecar file with the
//! reason.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use optrack_core::gas::MeasurementRecord;
use optrack_core::geo::{GeodeticPosition, LocalFrame, Position3};
use optrack_core::post::{average_concentration, project_to_plane, PlaneSpec, PostError, Track};

pub use optrack_core::post::DEFAULT_MIN_DISTANCE;

use crate::schema::{read_csv, write_csv, MeasurementCsv, RejectCsv, ResultCsv, Schema, TelemetryCsv, TruthCsv};
use crate::CliError;

pub const RESULTS_FILE: &str = "results.csv";

/// Projection plane for the `plane_y_m`/`plane_z_m` columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlaneChoice {
    /// Vertical plane through the mean accepted drone position at laser
    /// height, facing the mean beam direction.
    Auto,
    Explicit(PlaneSpec),
    None,
}

impl FromStr for PlaneChoice {
    type Err = String;

    /// `auto`, `none`, or `east,north,up,normal_east,normal_north` in meters
    /// in the local frame.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => return Ok(PlaneChoice::Auto),
            "none" => return Ok(PlaneChoice::None),
            _ => {}
        }
        let v = s
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| format!("plane component {x:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        let [e, n, u, ne, nn] = v[..] else {
            return Err(format!("plane needs 5 comma-separated numbers, got {}", v.len()));
        };
        PlaneSpec::new(Position3::new(e, n, u), ne, nn)
            .map(PlaneChoice::Explicit)
            .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PostprocessOutput {
    pub results: Vec<ResultCsv>,
    pub rejects: Vec<RejectCsv>,
}

/// Reads `(t, position)` samples from a telemetry log, or from a truth log
/// when its header says so.
pub fn read_positions(path: &Path) -> Result<Vec<(f64, GeodeticPosition)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    let first = text.lines().next().unwrap_or("");
    if first == TruthCsv::HEADER.join(",") {
        let rows: Vec<TruthCsv> = read_csv(path)?;
        Ok(rows.iter().map(|r| (r.t, r.position())).collect())
    } else {
        let rows: Vec<TelemetryCsv> = read_csv(path)?;
        Ok(rows.iter().map(|r| (r.t_j, r.position())).collect())
    }
}

pub fn read_measurements(path: &Path) -> Result<Vec<MeasurementRecord>, CliError> {
    let rows: Vec<MeasurementCsv> = read_csv(path)?;
    Ok(rows.iter().map(Into::into).collect())
}

fn input_error(e: PostError) -> CliError {
    match e {
        PostError::InvalidInput(m) => CliError::Schema(m),
        other => CliError::Runtime(other.to_string()),
    }
}

pub fn postprocess(
    positions: &[(f64, GeodeticPosition)],
    measurements: &[MeasurementRecord],
    plane: PlaneChoice,
    min_distance: f64,
) -> Result<PostprocessOutput, CliError> {
    let Some(first) = measurements.first() else {
        return Ok(PostprocessOutput::default());
    };
    let frame = LocalFrame::new(first.tdlas_position).map_err(|e| CliError::Schema(format!("row 1: laser position: {e}")))?;
    let track = Track::from_geodetic(positions, &frame).map_err(input_error)?;

    let mut out = PostprocessOutput::default();
    let mut accepted = Vec::new();
    for (k, rec) in measurements.iter().enumerate() {
        let reject = |reason: String| RejectCsv { t_i: rec.t, reason };
        let drone = match track.interpolate(rec.t) {
            Ok(p) => p,
            Err(PostError::OutOfRange { .. }) => {
                out.rejects.push(reject("outside telemetry time range".into()));
                continue;
            }
            Err(e) => {
                out.rejects.push(reject(e.to_string()));
                continue;
            }
        };
        let tdlas = frame
            .to_local(rec.tdlas_position)
            .map_err(|e| CliError::Schema(format!("row {}: laser position: {e}", k + 1)))?;
        match average_concentration(rec, tdlas, drone, min_distance) {
            Ok(s) => accepted.push(s),
            Err(PostError::NoReading) => out.rejects.push(reject(format!("status {}", rec.status))),
            Err(e) => out.rejects.push(reject(e.to_string())),
        }
    }

    let plane = match plane {
        PlaneChoice::Explicit(p) => Some(p),
        PlaneChoice::None => None,
        PlaneChoice::Auto => auto_plane(&accepted),
    };
    for s in &accepted {
        let hit = match &plane {
            Some(p) => project_to_plane(s, p).unwrap_or(None),
            None => None,
        };
        out.results.push(ResultCsv {
            t_i: s.t,
            d_m: s.d,
            u_bar_ppm: s.u_bar,
            plane_y_m: hit.map(|h| h.0),
            plane_z_m: hit.map(|h| h.1),
            status: s.status,
        });
    }
    Ok(out)
}

fn auto_plane(samples: &[optrack_core::post::ConcentrationSample]) -> Option<PlaneSpec> {
    if samples.is_empty() {
        return None;
    }
    let n = samples.len() as f64;
    let mean = |f: &dyn Fn(&optrack_core::post::ConcentrationSample) -> Position3| {
        samples.iter().fold(Position3::ORIGIN, |acc, s| acc + f(s)) * (1.0 / n)
    };
    let drone = mean(&|s| s.drone);
    let beam = mean(&|s| s.drone - s.tdlas);
    let laser_up = mean(&|s| s.tdlas).up;
    PlaneSpec::new(Position3::new(drone.east, drone.north, laser_up), beam.east, beam.north).ok()
}

/// Rejects sidecar path for a results file: `results.csv` becomes
/// `results.rejects.csv`.
pub fn rejects_path(results: &Path) -> PathBuf {
    let stem = results.file_stem().map_or_else(|| "results".into(), |s| s.to_string_lossy().into_owned());
    results.with_file_name(format!("{stem}.rejects.csv"))
}

pub fn write_output(results_path: &Path, out: &PostprocessOutput, force: bool) -> Result<(), CliError> {
    let rejects = rejects_path(results_path);
    for p in [results_path, rejects.as_path()] {
        if p.exists() && !force {
            return Err(CliError::Runtime(format!("{} already exists (use --force to overwrite)", p.display())));
        }
    }
    write_csv(results_path, &out.results)?;
    write_csv(&rejects, &out.rejects)
}

#[cfg(test)]
mod tests {
    use super::*;
    use optrack_core::gas::StatusCode;

    fn frame() -> LocalFrame {
        LocalFrame::new(GeodeticPosition { latitude: 48.1375, longitude: 11.5755, altitude: 520.0 }).unwrap()
    }

    fn rec(t: f64, m: Option<f64>, status: StatusCode) -> MeasurementRecord {
        MeasurementRecord { t, m_ppm_m: m, status, signal_strength: 0.5, tdlas_position: frame().to_geodetic(Position3::ORIGIN).unwrap() }
    }

    fn track() -> Vec<(f64, GeodeticPosition)> {
        let f = frame();
        (0..=10).map(|k| (f64::from(k), f.to_geodetic(Position3::new(0.0, 10.0 + f64::from(k), 0.0)).unwrap())).collect()
    }

    #[test]
    fn uniform_field_gives_background() {
        // d(t) = 10 + t, m = 400 d
        let ms: Vec<_> = [1.0, 2.5, 7.25].iter().map(|&t| rec(t, Some(400.0 * (10.0 + t)), StatusCode::Ok)).collect();
        let out = postprocess(&track(), &ms, PlaneChoice::None, 1.0).unwrap();
        assert_eq!(out.results.len(), 3);
        for r in &out.results {
            assert!((r.u_bar_ppm - 400.0).abs() < 1e-6, "{r:?}");
            assert!((r.d_m - (10.0 + r.t_i)).abs() < 1e-6);
            assert!(r.plane_y_m.is_none());
        }
    }

    #[test]
    fn rejects_carry_reasons() {
        let ms = vec![
            rec(-0.5, Some(4000.0), StatusCode::Ok),
            rec(3.0, None, StatusCode::ErrorNoSignal),
            rec(4.0, Some(5600.0), StatusCode::WarnLowSignal),
            rec(11.0, Some(4000.0), StatusCode::Ok),
        ];
        let out = postprocess(&track(), &ms, PlaneChoice::Auto, 1.0).unwrap();
        assert_eq!(out.results.len(), 1);
        assert_eq!(out.results[0].status, StatusCode::WarnLowSignal);
        let reasons: Vec<&str> = out.rejects.iter().map(|r| r.reason.as_str()).collect();
        assert_eq!(reasons, ["outside telemetry time range", "status ERROR_NO_SIGNAL", "outside telemetry time range"]);
    }

    #[test]
    fn explicit_plane_crossing() {
        // plane north = 12 facing north; drone at north 14 at t = 4, beam
        // rises nowhere, so the crossing is at height 0 and lateral 0
        let plane: PlaneChoice = "0,12,0,0,1".parse().unwrap();
        let out = postprocess(&track(), &[rec(4.0, Some(5600.0), StatusCode::Ok)], plane, 1.0).unwrap();
        let r = out.results[0];
        assert!(r.plane_y_m.unwrap().abs() < 1e-6 && r.plane_z_m.unwrap().abs() < 1e-6);
        // a plane beyond the drone is not crossed
        let far: PlaneChoice = "0,30,0,0,1".parse().unwrap();
        let out = postprocess(&track(), &[rec(4.0, Some(5600.0), StatusCode::Ok)], far, 1.0).unwrap();
        assert!(out.results[0].plane_y_m.is_none());
    }

    #[test]
    fn plane_parsing() {
        assert_eq!("auto".parse::<PlaneChoice>(), Ok(PlaneChoice::Auto));
        assert!("1,2,3".parse::<PlaneChoice>().unwrap_err().contains("5"));
        assert!("0,0,0,0,0".parse::<PlaneChoice>().is_err());
        assert!("0,0,x,0,1".parse::<PlaneChoice>().is_err());
    }

    #[test]
    fn empty_measurements_give_empty_output() {
        let out = postprocess(&track(), &[], PlaneChoice::Auto, 1.0).unwrap();
        assert!(out.results.is_empty() && out.rejects.is_empty());
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(rejects_path(Path::new("/a/b/results.csv")), PathBuf::from("/a/b/results.rejects.csv"));
    }
}
