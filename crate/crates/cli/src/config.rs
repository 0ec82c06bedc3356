//! Scenario files.
//!
//! A config document is TOML with a format version and one `[scenario]`
//! table. Every table below `scenario` except `drone.route` and `gas` may be
//! omitted and falls back to its defaults; `optrack show-config` prints a
//! document with every default filled in.
//!
//! ```toml
//! version = 1
//!
//! [scenario]
//! name = "short-hop"
//! seed = 7
//!
//! [scenario.drone.route]
//! waypoints = [{ east = 0.0, north = 5.0, up = 2.0 }, { east = 0.0, north = 20.0, up = 2.0 }]
//! cruise_speed = 1.0
//!
//! [scenario.gas]
//! kind = "uniform"
//! ppm = 400.0
//! ```

use std::path::Path;

use optrack_core::sim::{builtin, builtin_scenarios, ScenarioConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;
pub const BUILTIN_PREFIX: &str = "builtin:";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub version: u32,
    pub scenario: ScenarioConfig,
}

impl ConfigDocument {
    pub fn new(scenario: ScenarioConfig) -> Self {
        Self { version: FORMAT_VERSION, scenario }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: ConfigDocument = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if doc.version != FORMAT_VERSION {
            return Err(CliError::Config(format!(
                "version: unsupported config version {} (expected {FORMAT_VERSION})",
                doc.version
            )));
        }
        doc.scenario.validate().map_err(|errs| CliError::Config(errs.join("\n")))?;
        Ok(doc)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario configs serialize to TOML")
    }

    /// SHA-256 of the canonical TOML rendering.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}

/// Resolves a `--config` argument: a file path, `builtin:<name>`, or
/// `builtin:all`.
pub fn load(arg: &str) -> Result<Vec<ConfigDocument>, CliError> {
    if let Some(name) = arg.strip_prefix(BUILTIN_PREFIX) {
        if name == "all" {
            return Ok(builtin_scenarios().into_iter().map(ConfigDocument::new).collect());
        }
        return builtin(name).map(|s| vec![ConfigDocument::new(s)]).ok_or_else(|| {
            let known: Vec<String> = builtin_scenarios().into_iter().map(|s| s.name).collect();
            CliError::Config(format!("unknown builtin scenario {name:?} (known: {})", known.join(", ")))
        });
    }
    let path = Path::new(arg);
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    ConfigDocument::parse(&text)
        .map(|d| vec![d])
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_round_trip_through_toml() {
        for s in builtin_scenarios() {
            let doc = ConfigDocument::new(s);
            let back = ConfigDocument::parse(&doc.to_toml()).unwrap();
            assert_eq!(back, doc);
        }
    }

    #[test]
    fn module_doc_example_parses() {
        let text = r#"
version = 1

[scenario]
name = "short-hop"
seed = 7

[scenario.drone.route]
waypoints = [{ east = 0.0, north = 5.0, up = 2.0 }, { east = 0.0, north = 20.0, up = 2.0 }]
cruise_speed = 1.0

[scenario.gas]
kind = "uniform"
ppm = 400.0
"#;
        let doc = ConfigDocument::parse(text).unwrap();
        assert_eq!(doc.scenario.seed, 7);
        assert_eq!(doc.scenario.drone.route.waypoints.len(), 2);
    }

    #[test]
    fn unknown_key_is_named() {
        let mut text = ConfigDocument::new(builtin("close-flyby").unwrap()).to_toml();
        text = text.replace("[scenario.timing]", "[scenario.timing]\nwarp_factor = 9");
        let err = ConfigDocument::parse(&text).unwrap_err();
        assert!(err.to_string().contains("warp_factor"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn wrong_version_rejected() {
        let text = ConfigDocument::new(builtin("close-flyby").unwrap()).to_toml().replacen("version = 1", "version = 2", 1);
        assert!(ConfigDocument::parse(&text).unwrap_err().to_string().contains("version"));
    }

    #[test]
    fn semantic_errors_carry_field_paths() {
        let mut doc = ConfigDocument::new(builtin("close-flyby").unwrap());
        doc.scenario.timing.sensor_rate_hz = 7.0;
        let err = ConfigDocument::parse(&doc.to_toml()).unwrap_err();
        assert!(err.to_string().contains("timing.sensor_rate_hz"), "{err}");
    }

    #[test]
    fn unknown_builtin() {
        let err = load("builtin:nowhere").unwrap_err();
        assert!(err.to_string().contains("zigzag-range"));
        assert_eq!(load("builtin:all").unwrap().len(), 4);
    }

    #[test]
    fn hash_tracks_content() {
        let a = ConfigDocument::new(builtin("close-flyby").unwrap());
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.scenario.seed = 99;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
