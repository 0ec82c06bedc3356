//! `optrack metrics`: validity against distance, tracker mode occupancy,
//! loss and reacquisition events, and the offset error budget.
//!
//! Distances come from the truth log, so the table describes the sensor and
//! tracker rather than the telemetry quality.

use std::fmt::Write as _;
use std::path::Path;

use optrack_core::control::TrackerMode;
use optrack_core::gas::{GasField, MeasurementRecord, StatusCode};
use optrack_core::geo::Position3;
use optrack_core::post::{distance_status_table, error_budget, DistanceBin, ErrorBudget, Track};
use optrack_core::sim::ScenarioConfig;
use serde::Serialize;

use crate::config::ConfigDocument;
use crate::schema::{read_csv, write_csv, MeasurementCsv, Schema, TelemetryCsv, TrackerCsv, TruthCsv};
use crate::simulate::{CONFIG_FILE, MEASUREMENTS_FILE, TELEMETRY_FILE, TRACKER_FILE, TRUTH_FILE};
use crate::CliError;

pub const TABLE_FILE: &str = "metrics_distance.csv";
pub const EVENTS_FILE: &str = "metrics_events.csv";
pub const REPORT_FILE: &str = "metrics.txt";

/// Distances at which the error budget is always reported.
pub const BUDGET_DISTANCES: [f64; 3] = [10.0, 25.0, 50.0];

/// A stretch of time the tracker spent outside VISUAL mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VisionLoss {
    pub start: f64,
    /// First VISUAL row after the loss; `None` if the run ended first.
    pub end: Option<f64>,
    /// Time spent in GNSS fallback, where telemetry was fresh.
    pub fresh_time: f64,
}

impl VisionLoss {
    pub fn duration(&self) -> Option<f64> {
        self.end.map(|e| e - self.start)
    }
}

/// A run of ERROR measurements and the first valid record after it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reacquisition {
    pub lost_at: f64,
    pub regained_at: Option<f64>,
}

impl Reacquisition {
    pub fn duration(&self) -> Option<f64> {
        self.regained_at.map(|e| e - self.lost_at)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub records: usize,
    pub valid: usize,
    pub distance_table: Vec<DistanceBin>,
    pub mode_occupancy: Vec<(TrackerMode, f64)>,
    pub vision_losses: Vec<VisionLoss>,
    pub reacquisitions: Vec<Reacquisition>,
    pub background_ppm: f64,
    pub antenna_to_reflector: f64,
    pub antenna_to_laser: f64,
    pub error_budget: Vec<(f64, ErrorBudget)>,
}

impl MetricsReport {
    pub fn valid_fraction(&self) -> f64 {
        if self.records == 0 {
            0.0
        } else {
            self.valid as f64 / self.records as f64
        }
    }

    /// Farthest distance bin holding a valid record.
    pub fn last_valid_bin(&self) -> Option<&DistanceBin> {
        self.distance_table.iter().rev().find(|b| b.valid > 0)
    }
}

/// Loaded contents of a run directory.
#[derive(Debug, Clone)]
pub struct RunData {
    pub telemetry: Vec<TelemetryCsv>,
    pub measurements: Vec<MeasurementRecord>,
    pub tracker: Vec<TrackerCsv>,
    pub truth: Vec<TruthCsv>,
    pub config: Option<ScenarioConfig>,
}

impl RunData {
    pub fn load(dir: &Path) -> Result<Self, CliError> {
        let measurements: Vec<MeasurementCsv> = read_csv(&dir.join(MEASUREMENTS_FILE))?;
        let config_path = dir.join(CONFIG_FILE);
        let config = if config_path.exists() {
            let text = std::fs::read_to_string(&config_path)?;
            Some(ConfigDocument::parse(&text)?.scenario)
        } else {
            None
        };
        Ok(Self {
            telemetry: read_csv(&dir.join(TELEMETRY_FILE))?,
            measurements: measurements.iter().map(Into::into).collect(),
            tracker: read_csv(&dir.join(TRACKER_FILE))?,
            truth: read_csv(&dir.join(TRUTH_FILE))?,
            config,
        })
    }

    fn truth_track(&self) -> Result<Track, CliError> {
        Track::new(self.truth.iter().map(|r| (r.t, Position3::new(r.east, r.north, r.up))).collect())
            .map_err(|e| CliError::Schema(format!("{TRUTH_FILE}: {e}")))
    }

    /// Laser-to-reflector distance for every measurement inside the truth
    /// log's time range.
    pub fn measurement_distances(&self) -> Result<Vec<(f64, StatusCode, f64)>, CliError> {
        let track = self.truth_track()?;
        Ok(self
            .measurements
            .iter()
            .filter_map(|m| track.interpolate(m.t).ok().map(|p| (m.t, m.status, p.norm())))
            .collect())
    }

    /// Times at which the drone headed for a new waypoint.
    pub fn waypoint_changes(&self) -> Vec<f64> {
        self.truth.windows(2).filter(|w| w[1].waypoint != w[0].waypoint).map(|w| w[1].t).collect()
    }
}

/// Sum of the uniform components of a field.
pub fn background_ppm(field: &GasField) -> f64 {
    match field {
        GasField::Uniform { ppm } => *ppm,
        GasField::GaussianPlume(_) => 0.0,
        GasField::Sum { fields } => fields.iter().map(background_ppm).sum(),
    }
}

pub fn vision_losses(tracker: &[TrackerCsv]) -> Vec<VisionLoss> {
    let mut out = Vec::new();
    let mut open: Option<VisionLoss> = None;
    for w in tracker.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        match open.as_mut() {
            None => {
                if a.mode == TrackerMode::Visual && b.mode != TrackerMode::Visual {
                    open = Some(VisionLoss { start: b.t, end: None, fresh_time: 0.0 });
                }
            }
            Some(loss) => {
                if a.mode == TrackerMode::GnssFallback {
                    loss.fresh_time += b.t - a.t;
                }
                if b.mode == TrackerMode::Visual {
                    loss.end = Some(b.t);
                    out.push(*loss);
                    open = None;
                }
            }
        }
    }
    out.extend(open);
    out
}

pub fn reacquisitions(measurements: &[MeasurementRecord]) -> Vec<Reacquisition> {
    let mut out = Vec::new();
    let mut lost: Option<f64> = None;
    let mut was_valid = true;
    for m in measurements {
        let valid = m.status.is_valid();
        if was_valid && !valid {
            lost = Some(m.t);
        } else if !was_valid && valid {
            if let Some(t) = lost.take() {
                out.push(Reacquisition { lost_at: t, regained_at: Some(m.t) });
            }
        }
        was_valid = valid;
    }
    out.extend(lost.map(|t| Reacquisition { lost_at: t, regained_at: None }));
    out
}

pub fn mode_occupancy(tracker: &[TrackerCsv]) -> Vec<(TrackerMode, f64)> {
    let n = tracker.len().max(1) as f64;
    TrackerMode::ALL
        .iter()
        .map(|&m| (m, tracker.iter().filter(|r| r.mode == m).count() as f64 / n))
        .collect()
}

/// Valid share of the records within `max_distance`, skipping those less
/// than `settle` seconds after a waypoint change.
pub fn settled_valid_fraction(run: &RunData, max_distance: f64, settle: f64) -> Result<(usize, usize), CliError> {
    let turns = run.waypoint_changes();
    let mut n = 0;
    let mut valid = 0;
    for (t, status, d) in run.measurement_distances()? {
        if d > max_distance || turns.iter().any(|&c| t >= c && t < c + settle) {
            continue;
        }
        n += 1;
        valid += usize::from(status.is_valid());
    }
    Ok((valid, n))
}

pub fn compute(run: &RunData, bin_width: f64) -> Result<MetricsReport, CliError> {
    let distances = run.measurement_distances()?;
    let table_input: Vec<(f64, StatusCode)> = distances.iter().map(|&(_, s, d)| (d, s)).collect();
    let distance_table = distance_status_table(&table_input, bin_width).map_err(|e| CliError::Config(e.to_string()))?;

    let (background, to_reflector, to_laser) = match &run.config {
        Some(c) => (background_ppm(&c.gas), c.drone.antenna_height, c.station.antenna_offset),
        None => (400.0, 0.4, 0.1),
    };
    let mut budget_at: Vec<f64> = BUDGET_DISTANCES.to_vec();
    if let Some(far) = distances.iter().filter(|x| x.1.is_valid()).map(|x| x.2).reduce(f64::max) {
        budget_at.push(far);
    }
    let budget = budget_at
        .into_iter()
        .filter_map(|d| error_budget(to_reflector, to_laser, d, background).ok().map(|b| (d, b)))
        .collect();

    Ok(MetricsReport {
        records: run.measurements.len(),
        valid: run.measurements.iter().filter(|m| m.status.is_valid()).count(),
        distance_table,
        mode_occupancy: mode_occupancy(&run.tracker),
        vision_losses: vision_losses(&run.tracker),
        reacquisitions: reacquisitions(&run.measurements),
        background_ppm: background,
        antenna_to_reflector: to_reflector,
        antenna_to_laser: to_laser,
        error_budget: budget,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.2}"))
}

pub fn render_text(r: &MetricsReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "measurements: {} ({} valid, {:.1}%)", r.records, r.valid, 100.0 * r.valid_fraction());
    if let Some(b) = r.last_valid_bin() {
        let _ = writeln!(s, "last valid distance bin: [{}, {}) m", b.lo, b.hi);
    }
    let _ = writeln!(s, "\ndistance [m]      records  valid  fraction");
    for b in &r.distance_table {
        let _ = writeln!(s, "[{:>5}, {:>5})  {:>8}  {:>5}  {:>8.3}", b.lo, b.hi, b.count, b.valid, b.valid_fraction());
    }
    let _ = writeln!(s, "\ntracker mode occupancy");
    for (m, f) in &r.mode_occupancy {
        let _ = writeln!(s, "  {:<14} {:>6.1}%", m.as_str(), 100.0 * f);
    }
    let _ = writeln!(s, "\nvision losses: {}", r.vision_losses.len());
    for l in &r.vision_losses {
        let _ = writeln!(s, "  at {:>8.2} s  back after {:>6} s  fresh telemetry {:.2} s", l.start, opt(l.duration()), l.fresh_time);
    }
    let _ = writeln!(s, "\nmeasurement reacquisitions: {}", r.reacquisitions.len());
    for e in &r.reacquisitions {
        let _ = writeln!(s, "  lost at {:>8.2} s  regained after {:>6} s", e.lost_at, opt(e.duration()));
    }
    let _ = writeln!(
        s,
        "\nerror budget (background {} ppm, offsets {} m + {} m)",
        r.background_ppm, r.antenna_to_reflector, r.antenna_to_laser
    );
    for (d, b) in &r.error_budget {
        let _ = writeln!(s, "  d = {:>6.2} m  worst case {:.3} ppm  approx {:.3} ppm", d, b.worst_case, b.approximation);
    }
    s
}

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
struct TableRow {
    lo_m: f64,
    hi_m: f64,
    count: usize,
    valid: usize,
    valid_fraction: f64,
}

impl Schema for TableRow {
    const HEADER: &'static [&'static str] = &["lo_m", "hi_m", "count", "valid", "valid_fraction"];
}

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
struct EventRow {
    kind: String,
    start_s: f64,
    end_s: Option<f64>,
    duration_s: Option<f64>,
    fresh_s: Option<f64>,
}

impl Schema for EventRow {
    const HEADER: &'static [&'static str] = &["kind", "start_s", "end_s", "duration_s", "fresh_s"];
}

/// Writes the text report and both CSVs into `dir`.
pub fn write_report(dir: &Path, r: &MetricsReport, force: bool) -> Result<(), CliError> {
    for name in [TABLE_FILE, EVENTS_FILE, REPORT_FILE] {
        let p = dir.join(name);
        if p.exists() && !force {
            return Err(CliError::Runtime(format!("{} already exists (use --force to overwrite)", p.display())));
        }
    }
    let table: Vec<TableRow> = r
        .distance_table
        .iter()
        .map(|b| TableRow { lo_m: b.lo, hi_m: b.hi, count: b.count, valid: b.valid, valid_fraction: b.valid_fraction() })
        .collect();
    let mut events: Vec<EventRow> = r
        .vision_losses
        .iter()
        .map(|l| EventRow { kind: "vision_loss".into(), start_s: l.start, end_s: l.end, duration_s: l.duration(), fresh_s: Some(l.fresh_time) })
        .collect();
    events.extend(r.reacquisitions.iter().map(|e| EventRow {
        kind: "measurement_loss".into(),
        start_s: e.lost_at,
        end_s: e.regained_at,
        duration_s: e.duration(),
        fresh_s: None,
    }));
    write_csv(&dir.join(TABLE_FILE), &table)?;
    write_csv(&dir.join(EVENTS_FILE), &events)?;
    std::fs::write(dir.join(REPORT_FILE), render_text(r))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use optrack_core::geo::GeodeticPosition;

    fn row(t: f64, mode: TrackerMode) -> TrackerCsv {
        TrackerCsv { t, mode, pan_deg: 0.0, tilt_deg: 0.0, d_phi_deg: None, d_theta_deg: None, zoom: 1.0 }
    }

    fn rec(t: f64, status: StatusCode) -> MeasurementRecord {
        MeasurementRecord {
            t,
            m_ppm_m: status.is_valid().then_some(1.0),
            status,
            signal_strength: 0.0,
            tdlas_position: GeodeticPosition { latitude: 0.0, longitude: 0.0, altitude: 0.0 },
        }
    }

    #[test]
    fn loss_timing() {
        use TrackerMode::*;
        let modes = [Visual, Visual, GnssFallback, GnssFallback, Search, GnssFallback, Visual, Visual, Search];
        let rows: Vec<_> = modes.iter().enumerate().map(|(k, &m)| row(0.5 * k as f64, m)).collect();
        let losses = vision_losses(&rows);
        assert_eq!(losses.len(), 2);
        assert_eq!(losses[0].start, 1.0);
        assert_eq!(losses[0].end, Some(3.0));
        // fallback rows at 1.0, 1.5 and 2.5 each hold for half a second
        assert_eq!(losses[0].fresh_time, 1.5);
        assert_eq!(losses[1], VisionLoss { start: 4.0, end: None, fresh_time: 0.0 });
    }

    #[test]
    fn no_error_records_no_reacquisitions() {
        let ms: Vec<_> = (0..50).map(|k| rec(f64::from(k), if k % 3 == 0 { StatusCode::WarnLowSignal } else { StatusCode::Ok })).collect();
        assert!(reacquisitions(&ms).is_empty());
    }

    #[test]
    fn error_runs_are_paired() {
        use StatusCode::*;
        let s = [Ok, ErrorNoSignal, ErrorNoSignal, Ok, Ok, ErrorLightPollution];
        let ms: Vec<_> = s.iter().enumerate().map(|(k, &st)| rec(k as f64, st)).collect();
        assert_eq!(
            reacquisitions(&ms),
            vec![
                Reacquisition { lost_at: 1.0, regained_at: Some(3.0) },
                Reacquisition { lost_at: 5.0, regained_at: None },
            ]
        );
    }

    #[test]
    fn occupancy_sums_to_one() {
        let rows = [row(0.0, TrackerMode::Search), row(0.1, TrackerMode::Visual), row(0.2, TrackerMode::Visual), row(0.3, TrackerMode::GnssFallback)];
        let occ = mode_occupancy(&rows);
        assert_eq!(occ.iter().map(|x| x.1).sum::<f64>(), 1.0);
        assert_eq!(occ.iter().find(|x| x.0 == TrackerMode::Visual).unwrap().1, 0.5);
    }

    #[test]
    fn background_of_composite_field() {
        let f = GasField::Sum { fields: vec![GasField::uniform(400.0), GasField::uniform(20.0)] };
        assert_eq!(background_ppm(&f), 420.0);
    }
}
