//! `optrack simulate`: one directory per run holding the four logs, the
//! resolved config and a manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use optrack_core::sim::{run_scenario, LinkStats, RunLogs, SimError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ConfigDocument, FORMAT_VERSION};
use crate::schema::{write_csv, MeasurementCsv, TelemetryCsv, TrackerCsv, TruthCsv};
use crate::CliError;

pub const TELEMETRY_FILE: &str = "telemetry.csv";
pub const MEASUREMENTS_FILE: &str = "measurements.csv";
pub const TRACKER_FILE: &str = "tracker.csv";
pub const TRUTH_FILE: &str = "truth.csv";
pub const CONFIG_FILE: &str = "config.toml";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Default output root when neither `--out` nor the environment sets one.
pub const DEFAULT_OUT_ROOT: &str = "runs";
pub const OUT_ROOT_ENV: &str = "OPTRACK_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub optrack_cli: String,
    pub optrack_core: String,
    pub config_format: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: String,
    pub seed: u64,
    pub config_sha256: String,
    pub versions: Versions,
    /// SHA-256 of every file written next to the manifest.
    pub files: BTreeMap<String, String>,
    pub rows: BTreeMap<String, usize>,
    pub link: LinkStats,
}

#[derive(Debug, Clone)]
pub struct SimulateOptions {
    pub out_root: PathBuf,
    pub seed: Option<u64>,
    pub force: bool,
}

pub fn run_dir_name(doc: &ConfigDocument) -> String {
    format!("{}-seed{}", doc.scenario.name, doc.scenario.seed)
}

/// Creates `dir`, or checks it may be reused.
pub fn prepare_dir(dir: &Path, force: bool) -> Result<(), CliError> {
    if dir.exists() {
        let occupied = std::fs::read_dir(dir)?.next().is_some();
        if occupied && !force {
            return Err(CliError::Runtime(format!(
                "{} already exists and is not empty (use --force to overwrite)",
                dir.display()
            )));
        }
    }
    std::fs::create_dir_all(dir)?;
    Ok(())
}

pub fn write_logs(dir: &Path, logs: &RunLogs) -> Result<(), CliError> {
    let telemetry: Vec<TelemetryCsv> = logs.telemetry.iter().map(Into::into).collect();
    let measurements: Vec<MeasurementCsv> = logs.measurements.iter().map(Into::into).collect();
    let tracker: Vec<TrackerCsv> = logs.tracker.iter().map(Into::into).collect();
    let truth: Vec<TruthCsv> = logs.truth.iter().map(Into::into).collect();
    write_csv(&dir.join(TELEMETRY_FILE), &telemetry)?;
    write_csv(&dir.join(MEASUREMENTS_FILE), &measurements)?;
    write_csv(&dir.join(TRACKER_FILE), &tracker)?;
    write_csv(&dir.join(TRUTH_FILE), &truth)
}

fn file_hash(path: &Path) -> Result<String, CliError> {
    Ok(hex::encode(Sha256::digest(std::fs::read(path)?)))
}

/// Runs one scenario into `<out_root>/<name>-seed<seed>` and returns that
/// directory.
pub fn simulate(doc: &ConfigDocument, opts: &SimulateOptions) -> Result<PathBuf, CliError> {
    let mut doc = doc.clone();
    if let Some(seed) = opts.seed {
        doc.scenario.seed = seed;
    }
    let logs = run_scenario(&doc.scenario).map_err(|e| match e {
        SimError::InvalidConfig(errs) => CliError::Config(errs.join("\n")),
        other => CliError::Runtime(other.to_string()),
    })?;
    let dir = opts.out_root.join(run_dir_name(&doc));
    prepare_dir(&dir, opts.force)?;
    write_logs(&dir, &logs)?;
    std::fs::write(dir.join(CONFIG_FILE), doc.to_toml())?;

    let mut files = BTreeMap::new();
    for name in [TELEMETRY_FILE, MEASUREMENTS_FILE, TRACKER_FILE, TRUTH_FILE, CONFIG_FILE] {
        files.insert(name.to_string(), file_hash(&dir.join(name))?);
    }
    let rows = BTreeMap::from([
        (TELEMETRY_FILE.to_string(), logs.telemetry.len()),
        (MEASUREMENTS_FILE.to_string(), logs.measurements.len()),
        (TRACKER_FILE.to_string(), logs.tracker.len()),
        (TRUTH_FILE.to_string(), logs.truth.len()),
    ]);
    let manifest = Manifest {
        scenario: doc.scenario.name.clone(),
        seed: doc.scenario.seed,
        config_sha256: doc.hash(),
        versions: Versions {
            optrack_cli: env!("CARGO_PKG_VERSION").to_string(),
            optrack_core: optrack_core::VERSION.to_string(),
            config_format: FORMAT_VERSION,
        },
        files,
        rows,
        link: logs.link.clone(),
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::write(dir.join(MANIFEST_FILE), json + "\n")?;
    Ok(dir)
}

/// Runs several scenarios, in parallel when `parallel` is set. Results come
/// back in input order.
pub fn simulate_batch(docs: &[ConfigDocument], opts: &SimulateOptions, parallel: bool) -> Vec<Result<PathBuf, CliError>> {
    let mut seen = BTreeMap::new();
    for (k, d) in docs.iter().enumerate() {
        let mut d = d.clone();
        if let Some(seed) = opts.seed {
            d.scenario.seed = seed;
        }
        if let Some(first) = seen.insert(run_dir_name(&d), k) {
            let msg = format!("configs {} and {} both write to {}", first + 1, k + 1, run_dir_name(&d));
            return docs.iter().map(|_| Err(CliError::Config(msg.clone()))).collect();
        }
    }
    if parallel {
        docs.par_iter().map(|d| simulate(d, opts)).collect()
    } else {
        docs.iter().map(|d| simulate(d, opts)).collect()
    }
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, CliError> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))
}
