//! Simulate, postprocess and summarize every builtin scenario.

use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use optrack_cli::config::{self, ConfigDocument};
use optrack_cli::metrics::{self, RunData};
use optrack_cli::postprocess::{self, PlaneChoice, DEFAULT_MIN_DISTANCE};
use optrack_cli::schema::{read_csv, write_rows, MeasurementCsv, Schema, TelemetryCsv, TrackerCsv, TruthCsv};
use optrack_cli::simulate::{simulate_batch, SimulateOptions, MEASUREMENTS_FILE, TELEMETRY_FILE, TRACKER_FILE, TRUTH_FILE};
use optrack_core::gas::beam_integral;
use optrack_core::geo::Position3;
use optrack_core::sim::builtin;

struct Runs {
    _root: tempfile::TempDir,
    dirs: Vec<(String, PathBuf)>,
}

fn runs() -> &'static Runs {
    static RUNS: OnceLock<Runs> = OnceLock::new();
    RUNS.get_or_init(|| {
        let root = tempfile::tempdir().unwrap();
        let docs = config::load("builtin:all").unwrap();
        let opts = SimulateOptions { out_root: root.path().to_path_buf(), seed: None, force: false };
        let dirs = docs
            .iter()
            .zip(simulate_batch(&docs, &opts, true))
            .map(|(d, r)| (d.scenario.name.clone(), r.unwrap()))
            .collect();
        Runs { _root: root, dirs }
    })
}

fn run(name: &str) -> &'static Path {
    &runs().dirs.iter().find(|(n, _)| n == name).unwrap().1
}

fn round_trip<T: Schema>(path: &Path) {
    let original = std::fs::read(path).unwrap();
    let rows: Vec<T> = read_csv(path).unwrap();
    let mut again = Vec::new();
    write_rows(&mut again, &rows).unwrap();
    assert!(original == again, "{} does not round-trip", path.display());
}

#[test]
fn csv_logs_round_trip_byte_for_byte() {
    for (_, dir) in &runs().dirs {
        round_trip::<TelemetryCsv>(&dir.join(TELEMETRY_FILE));
        round_trip::<MeasurementCsv>(&dir.join(MEASUREMENTS_FILE));
        round_trip::<TrackerCsv>(&dir.join(TRACKER_FILE));
        round_trip::<TruthCsv>(&dir.join(TRUTH_FILE));
    }
}

#[test]
fn postprocess_succeeds_for_every_builtin() {
    for (name, dir) in &runs().dirs {
        let positions = postprocess::read_positions(&dir.join(TELEMETRY_FILE)).unwrap();
        let records = postprocess::read_measurements(&dir.join(MEASUREMENTS_FILE)).unwrap();
        let out = postprocess::postprocess(&positions, &records, PlaneChoice::Auto, DEFAULT_MIN_DISTANCE).unwrap();
        assert!(!out.results.is_empty(), "{name}");
        assert_eq!(out.results.len() + out.rejects.len(), records.len(), "{name}");
        let results = dir.join("results.csv");
        postprocess::write_output(&results, &out, false).unwrap();
        assert!(postprocess::write_output(&results, &out, false).is_err());
    }
}

#[test]
fn plume_results_exceed_background() {
    let dir = run("plume-scan");
    let cfg = builtin("plume-scan").unwrap();
    let positions = postprocess::read_positions(&dir.join(TELEMETRY_FILE)).unwrap();
    let records = postprocess::read_measurements(&dir.join(MEASUREMENTS_FILE)).unwrap();
    let out = postprocess::postprocess(&positions, &records, PlaneChoice::Auto, DEFAULT_MIN_DISTANCE).unwrap();
    let max = out.results.iter().map(|r| r.u_bar_ppm).fold(f64::NEG_INFINITY, f64::max);

    // oracle: the largest truth-field path average along logged reflector positions
    let truth: Vec<TruthCsv> = read_csv(&dir.join(TRUTH_FILE)).unwrap();
    let oracle = truth
        .iter()
        .step_by(10)
        .map(|r| {
            let p = Position3::new(r.east, r.north, r.up);
            beam_integral(&cfg.gas, Position3::ORIGIN, p, r.t, &cfg.quadrature).unwrap() / p.norm()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(oracle > 405.0, "truth field peak {oracle}");
    assert!(max > 400.0 + 0.5 * (oracle - 400.0), "postprocessed max {max}, truth peak {oracle}");
}

#[test]
fn plume_projections_stay_inside_the_scan() {
    let dir = run("plume-scan");
    let positions = postprocess::read_positions(&dir.join(TRUTH_FILE)).unwrap();
    let records = postprocess::read_measurements(&dir.join(MEASUREMENTS_FILE)).unwrap();
    // plane of the scan lines, facing the station
    let scan_north = builtin("plume-scan").unwrap().drone.route.waypoints[0].north;
    let plane = PlaneChoice::Explicit(optrack_core::post::PlaneSpec::new(Position3::new(0.0, scan_north, 0.0), 0.0, 1.0).unwrap());
    let out = postprocess::postprocess(&positions, &records, plane, DEFAULT_MIN_DISTANCE).unwrap();
    for r in &out.results {
        let (y, z) = (r.plane_y_m.unwrap(), r.plane_z_m.unwrap());
        assert!(y.abs() <= 12.0 + 1e-6 && (1.8 - 1e-6..=6.0 + 1e-6).contains(&z), "({y}, {z})");
    }
}

#[test]
fn flyaway_last_valid_bin() {
    let report = metrics::compute(&RunData::load(run("flyaway-range")).unwrap(), 1.0).unwrap();
    let last = report.last_valid_bin().unwrap();
    assert_eq!((last.lo, last.hi), (59.0, 60.0));
}

#[test]
fn zigzag_reacquisitions_reported() {
    let data = RunData::load(run("zigzag-range")).unwrap();
    let report = metrics::compute(&data, 1.0).unwrap();
    assert!(!report.reacquisitions.is_empty());
    assert!(!report.vision_losses.is_empty());
    // the route ends beyond the sensor's range, so only the last loss may stay open
    let (last, earlier) = report.reacquisitions.split_last().unwrap();
    assert!(earlier.iter().all(|r| r.regained_at.is_some()));
    if last.regained_at.is_none() {
        let max_range = data.config.as_ref().unwrap().sensor.max_range;
        let d = data.measurement_distances().unwrap().into_iter().find(|x| x.0 == last.lost_at).unwrap().2;
        assert!(d > max_range, "open loss at {d} m");
    }
    assert!(metrics::render_text(&report).contains("measurement reacquisitions"));
}

#[test]
fn metrics_files_written() {
    let dir = run("close-flyby");
    let report = metrics::compute(&RunData::load(dir).unwrap(), 2.0).unwrap();
    assert!(report.distance_table.iter().all(|b| b.hi - b.lo == 2.0));
    metrics::write_report(dir, &report, false).unwrap();
    let events = std::fs::read_to_string(dir.join(metrics::EVENTS_FILE)).unwrap();
    assert!(events.starts_with("kind,start_s,end_s,duration_s,fresh_s\n"));
    assert!(events.contains("vision_loss"));
    assert!(metrics::write_report(dir, &report, false).is_err());
    metrics::write_report(dir, &report, true).unwrap();
}

#[test]
fn stored_config_matches_manifest_hash() {
    for (_, dir) in &runs().dirs {
        let doc = ConfigDocument::parse(&std::fs::read_to_string(dir.join("config.toml")).unwrap()).unwrap();
        let manifest = optrack_cli::simulate::read_manifest(dir).unwrap();
        assert_eq!(manifest.config_sha256, doc.hash());
        assert_eq!(manifest.rows[TRUTH_FILE], read_csv::<TruthCsv>(&dir.join(TRUTH_FILE)).unwrap().len());
    }
}
