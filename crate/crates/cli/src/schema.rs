//! CSV log schemas. Times are float seconds since scenario start, angles are
//! degrees, positions are WGS84 degrees and meters. Empty cells stand for
//! missing values.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use optrack_core::control::TrackerMode;
use optrack_core::gas::{MeasurementRecord, StatusCode};
use optrack_core::geo::GeodeticPosition;
use optrack_core::sim::{TelemetryRow, TrackerRow, TruthRow};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub trait Schema: Serialize + DeserializeOwned {
    const HEADER: &'static [&'static str];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelemetryCsv {
    pub t_j: f64,
    pub lat: f64,
    pub lon: f64,
    pub alt: f64,
    pub seq: u32,
}

impl Schema for TelemetryCsv {
    const HEADER: &'static [&'static str] = &["t_j", "lat", "lon", "alt", "seq"];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementCsv {
    pub t_i: f64,
    pub m_ppm_m: Option<f64>,
    pub status: StatusCode,
    pub signal_strength: f64,
    pub lat: f64,
    pub lon: f64,
    pub alt: f64,
}

impl Schema for MeasurementCsv {
    const HEADER: &'static [&'static str] = &["t_i", "m_ppm_m", "status", "signal_strength", "lat", "lon", "alt"];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackerCsv {
    pub t: f64,
    pub mode: TrackerMode,
    pub pan_deg: f64,
    pub tilt_deg: f64,
    pub d_phi_deg: Option<f64>,
    pub d_theta_deg: Option<f64>,
    pub zoom: f64,
}

impl Schema for TrackerCsv {
    const HEADER: &'static [&'static str] = &["t", "mode", "pan_deg", "tilt_deg", "d_phi_deg", "d_theta_deg", "zoom"];
}

/// Simulator ground truth: the reflector position at every step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthCsv {
    pub t: f64,
    pub lat: f64,
    pub lon: f64,
    pub alt: f64,
    pub east: f64,
    pub north: f64,
    pub up: f64,
    pub waypoint: usize,
}

impl Schema for TruthCsv {
    const HEADER: &'static [&'static str] = &["t", "lat", "lon", "alt", "east", "north", "up", "waypoint"];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResultCsv {
    pub t_i: f64,
    pub d_m: f64,
    pub u_bar_ppm: f64,
    pub plane_y_m: Option<f64>,
    pub plane_z_m: Option<f64>,
    pub status: StatusCode,
}

impl Schema for ResultCsv {
    const HEADER: &'static [&'static str] = &["t_i", "d_m", "u_bar_ppm", "plane_y_m", "plane_z_m", "status"];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectCsv {
    pub t_i: f64,
    pub reason: String,
}

impl Schema for RejectCsv {
    const HEADER: &'static [&'static str] = &["t_i", "reason"];
}

impl From<&TelemetryRow> for TelemetryCsv {
    fn from(r: &TelemetryRow) -> Self {
        Self {
            t_j: r.t,
            lat: r.position.latitude,
            lon: r.position.longitude,
            alt: r.position.altitude,
            seq: r.seq,
        }
    }
}

impl TelemetryCsv {
    pub fn position(&self) -> GeodeticPosition {
        GeodeticPosition { latitude: self.lat, longitude: self.lon, altitude: self.alt }
    }
}

impl From<&MeasurementRecord> for MeasurementCsv {
    fn from(r: &MeasurementRecord) -> Self {
        Self {
            t_i: r.t,
            m_ppm_m: r.m_ppm_m,
            status: r.status,
            signal_strength: r.signal_strength,
            lat: r.tdlas_position.latitude,
            lon: r.tdlas_position.longitude,
            alt: r.tdlas_position.altitude,
        }
    }
}

impl From<&MeasurementCsv> for MeasurementRecord {
    fn from(r: &MeasurementCsv) -> Self {
        Self {
            t: r.t_i,
            m_ppm_m: r.m_ppm_m,
            status: r.status,
            signal_strength: r.signal_strength,
            tdlas_position: GeodeticPosition { latitude: r.lat, longitude: r.lon, altitude: r.alt },
        }
    }
}

impl From<&TrackerRow> for TrackerCsv {
    fn from(r: &TrackerRow) -> Self {
        Self {
            t: r.t,
            mode: r.mode,
            pan_deg: r.pose.pan.to_degrees(),
            tilt_deg: r.pose.tilt.to_degrees(),
            d_phi_deg: r.error.map(|e| e.d_phi.to_degrees()),
            d_theta_deg: r.error.map(|e| e.d_theta.to_degrees()),
            zoom: r.zoom,
        }
    }
}

impl From<&TruthRow> for TruthCsv {
    fn from(r: &TruthRow) -> Self {
        Self {
            t: r.t,
            lat: r.position.latitude,
            lon: r.position.longitude,
            alt: r.position.altitude,
            east: r.local.east,
            north: r.local.north,
            up: r.local.up,
            waypoint: r.waypoint,
        }
    }
}

impl TruthCsv {
    pub fn position(&self) -> GeodeticPosition {
        GeodeticPosition { latitude: self.lat, longitude: self.lon, altitude: self.alt }
    }
}

pub fn write_rows<T: Schema, W: Write>(out: W, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(T::HEADER).map_err(runtime)?;
    for r in rows {
        w.serialize(r).map_err(runtime)?;
    }
    w.flush().map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn read_rows<T: Schema, R: Read>(input: R) -> Result<Vec<T>, CliError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers().map_err(|e| CliError::Schema(e.to_string()))?.clone();
    // an empty input has no header at all; anything else must match exactly
    if !(header.is_empty() && r.is_done()) {
        let got: Vec<&str> = header.iter().collect();
        if got != T::HEADER {
            let col = T::HEADER
                .iter()
                .zip(got.iter().chain(std::iter::repeat(&"")))
                .position(|(want, have)| want != have)
                .unwrap_or(T::HEADER.len());
            let what = T::HEADER.get(col).map_or_else(|| format!("extra column {:?}", got[col]), |c| format!("expected {c:?}"));
            return Err(CliError::Schema(format!("header column {}: {what}, got {}", col + 1, header.iter().collect::<Vec<_>>().join(","))));
        }
    }
    let mut rows = Vec::new();
    for (k, raw) in r.records().enumerate() {
        let raw = raw.map_err(|e| CliError::Schema(format!("row {}: {e}", k + 1)))?;
        let row = raw.deserialize(None).map_err(|e| {
            let detail = match e.kind() {
                csv::ErrorKind::Deserialize { err, .. } => {
                    // enum variants fail without a field index; find the cell the message quotes
                    let col = err
                        .field()
                        .map(|f| f as usize)
                        .or_else(|| raw.iter().position(|cell| err.to_string().contains(&format!("`{cell}`"))));
                    let name = col.and_then(|c| T::HEADER.get(c)).copied().unwrap_or("?");
                    format!("column {name}: {}", err.kind())
                }
                _ => e.to_string(),
            };
            CliError::Schema(format!("row {}: {detail}", k + 1))
        })?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_csv<T: Schema>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let f = File::create(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    write_rows(std::io::BufWriter::new(f), rows)
}

pub fn read_csv<T: Schema>(path: &Path) -> Result<Vec<T>, CliError> {
    let f = File::open(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    read_rows(std::io::BufReader::new(f)).map_err(|e| match e {
        CliError::Schema(m) => CliError::Schema(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn runtime(e: csv::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bytes<T: Schema>(rows: &[T]) -> Vec<u8> {
        let mut out = Vec::new();
        write_rows(&mut out, rows).unwrap();
        out
    }

    #[test]
    fn header_only_for_no_rows() {
        assert_eq!(bytes::<ResultCsv>(&[]), b"t_i,d_m,u_bar_ppm,plane_y_m,plane_z_m,status\n");
        assert!(read_rows::<ResultCsv, _>(&b""[..]).unwrap().is_empty());
    }

    #[test]
    fn missing_values_are_empty_cells() {
        let row = TrackerCsv { t: 0.05, mode: TrackerMode::Search, pan_deg: 0.0, tilt_deg: -1.5, d_phi_deg: None, d_theta_deg: None, zoom: 1.0 };
        let text = String::from_utf8(bytes(&[row])).unwrap();
        assert_eq!(text, "t,mode,pan_deg,tilt_deg,d_phi_deg,d_theta_deg,zoom\n0.05,SEARCH,0.0,-1.5,,,1.0\n");
        assert_eq!(read_rows::<TrackerCsv, _>(text.as_bytes()).unwrap(), vec![row]);
    }

    #[test]
    fn bad_header_names_the_column() {
        let err = read_rows::<TelemetryCsv, _>(&b"t_j,lat,lng,alt,seq\n1,2,3,4,5\n"[..]).unwrap_err();
        assert!(err.to_string().contains("column 3"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn bad_cell_names_row_and_column() {
        let text = "t_i,m_ppm_m,status,signal_strength,lat,lon,alt\n0.1,20000,OK,0.9,48,11,520\n0.2,x,OK,0.9,48,11,520\n";
        let err = read_rows::<MeasurementCsv, _>(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("row 2") && err.contains("m_ppm_m"), "{err}");
        let text = "t_i,m_ppm_m,status,signal_strength,lat,lon,alt\n0.1,20000,FINE,0.9,48,11,520\n";
        let err = read_rows::<MeasurementCsv, _>(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("row 1") && err.contains("status"), "{err}");
    }

    #[test]
    fn floats_round_trip_exactly() {
        let rows: Vec<TelemetryCsv> = (0..200)
            .map(|k| {
                let x = f64::from(k);
                TelemetryCsv { t_j: x * 0.2, lat: 48.1375 + x * 1.1e-7, lon: 11.5755 - x / 3.0e5, alt: 520.4 + x.sqrt(), seq: k }
            })
            .collect();
        let once = bytes(&rows);
        let back: Vec<TelemetryCsv> = read_rows(&once[..]).unwrap();
        assert_eq!(back, rows);
        assert_eq!(bytes(&back), once);
    }
}
