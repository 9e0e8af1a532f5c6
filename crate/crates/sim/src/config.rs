//! JSON scenario files.
//!
//! Keys are the scenario field names. Powers are given in dBm and oblique
//! angles in radians (`oblique_phi`) or degrees (`oblique_phi_deg`), never
//! both. Unknown keys are rejected.

use std::fs;
use std::path::Path;

use coop_oam_core::scenario::{dbm_to_watts, PairingExponent, ScenarioConfig};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("override `{0}` is not of the form key=value")]
    MalformedOverride(String),
    #[error("`{0}` and `{0}_deg` are mutually exclusive")]
    AngleTwice(&'static str),
    #[error("invalid config: {0}")]
    Invalid(#[from] coop_oam_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    #[default]
    PerUser,
    PerPair,
}

impl From<Convention> for PairingExponent {
    fn from(c: Convention) -> Self {
        match c {
            Convention::PerUser => PairingExponent::PerUser,
            Convention::PerPair => PairingExponent::PerPair,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    pub frequency: f64,
    pub bs_height: f64,
    pub bs_coverage_radius: f64,
    pub user_count: usize,
    pub d2d_max: f64,
    /// dBm.
    pub tx_power: f64,
    /// dBm.
    pub noise_power: f64,
    pub uca_elements: usize,
    pub uca_radius: f64,
    pub mode_set: Vec<i32>,
    pub ring_half_width: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oblique_phi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oblique_phi_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oblique_psi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oblique_psi_deg: Option<f64>,
    pub pairing_exponent_convention: Convention,
    pub baseline_separation: f64,
}

const DEFAULT_OBLIQUE_DEG: f64 = 3.0;

impl Default for ConfigFile {
    fn default() -> Self {
        let s = ScenarioConfig::default();
        Self {
            frequency: s.frequency,
            bs_height: s.bs_height,
            bs_coverage_radius: s.bs_coverage_radius,
            user_count: s.user_count,
            d2d_max: s.d2d_max,
            tx_power: 30.0,
            noise_power: -90.0,
            uca_elements: s.uca_elements,
            uca_radius: s.uca_radius,
            mode_set: s.mode_set,
            ring_half_width: s.ring_half_width,
            oblique_phi: None,
            oblique_phi_deg: None,
            oblique_psi: None,
            oblique_psi_deg: None,
            pairing_exponent_convention: Convention::PerUser,
            baseline_separation: s.baseline_separation,
        }
    }
}

/// Every key a config document may carry.
pub const KNOWN_KEYS: &[&str] = &[
    "frequency",
    "bs_height",
    "bs_coverage_radius",
    "user_count",
    "d2d_max",
    "tx_power",
    "noise_power",
    "uca_elements",
    "uca_radius",
    "mode_set",
    "ring_half_width",
    "oblique_phi",
    "oblique_phi_deg",
    "oblique_psi",
    "oblique_psi_deg",
    "pairing_exponent_convention",
    "baseline_separation",
];

fn angle(rad: Option<f64>, deg: Option<f64>, name: &'static str) -> Result<f64, ConfigError> {
    match (rad, deg) {
        (Some(_), Some(_)) => Err(ConfigError::AngleTwice(name)),
        (Some(r), None) => Ok(r),
        (None, Some(d)) => Ok(d.to_radians()),
        (None, None) => Ok(DEFAULT_OBLIQUE_DEG.to_radians()),
    }
}

impl ConfigFile {
    /// Reads a file (or starts from defaults) and applies `key=value`
    /// overrides on top. Override values are parsed as JSON, falling back to
    /// a bare string.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut doc = match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|source| ConfigError::Io { path: p.display().to_string(), source })?;
                serde_json::from_str::<Value>(&text).map_err(|e| ConfigError::Parse(e.to_string()))?
            }
            None => Value::Object(Map::new()),
        };
        let Value::Object(map) = &mut doc else {
            return Err(ConfigError::Parse("top level must be a JSON object".into()));
        };
        for kv in overrides {
            let (key, raw) = kv.split_once('=').ok_or_else(|| ConfigError::MalformedOverride(kv.clone()))?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey(key.to_string()));
            }
            let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            map.insert(key.to_string(), value);
        }
        Self::from_value(doc)
    }

    pub fn from_value(doc: Value) -> Result<Self, ConfigError> {
        let Value::Object(map) = &doc else {
            return Err(ConfigError::Parse("top level must be a JSON object".into()));
        };
        if let Some(k) = map.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(ConfigError::UnknownKey(k.clone()));
        }
        let file: Self = serde_json::from_value(doc).map_err(|e| ConfigError::Parse(e.to_string()))?;
        file.scenario()?;
        Ok(file)
    }

    /// Converts to SI units and validates.
    pub fn scenario(&self) -> Result<ScenarioConfig, ConfigError> {
        let cfg = ScenarioConfig {
            frequency: self.frequency,
            bs_height: self.bs_height,
            bs_coverage_radius: self.bs_coverage_radius,
            user_count: self.user_count,
            d2d_max: self.d2d_max,
            tx_power: dbm_to_watts(self.tx_power),
            noise_power: dbm_to_watts(self.noise_power),
            uca_elements: self.uca_elements,
            uca_radius: self.uca_radius,
            mode_set: self.mode_set.clone(),
            ring_half_width: self.ring_half_width,
            oblique_phi: angle(self.oblique_phi, self.oblique_phi_deg, "oblique_phi")?,
            oblique_psi: angle(self.oblique_psi, self.oblique_psi_deg, "oblique_psi")?,
            pairing_exponent: self.pairing_exponent_convention.into(),
            baseline_separation: self.baseline_separation,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn defaults_round_trip() {
        let cfg = ConfigFile::default().scenario().unwrap();
        let want = ScenarioConfig::default();
        assert!((cfg.tx_power - want.tx_power).abs() < 1e-15);
        assert!((cfg.noise_power - want.noise_power).abs() < 1e-24);
        assert!((cfg.oblique_phi - want.oblique_phi).abs() < 1e-15);
        let text = serde_json::to_string(&ConfigFile::default()).unwrap();
        let back = ConfigFile::from_value(serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, ConfigFile::default());
    }

    #[test]
    fn degrees_convert_once() {
        let f = ConfigFile::from_value(json!({"oblique_psi_deg": 6.0, "oblique_phi": 0.0})).unwrap();
        let cfg = f.scenario().unwrap();
        assert!((cfg.oblique_psi - 0.10471975511965977).abs() < 1e-15);
        assert_eq!(cfg.oblique_phi, 0.0);
        let both = ConfigFile::from_value(json!({"oblique_psi_deg": 6.0, "oblique_psi": 0.1}));
        assert!(matches!(both, Err(ConfigError::AngleTwice("oblique_psi"))));
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(matches!(ConfigFile::from_value(json!({"frequncy": 1e9})), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(ConfigFile::from_value(json!({"d2d_max": -1.0})), Err(ConfigError::Invalid(_))));
        assert!(matches!(ConfigFile::from_value(json!({"user_count": "many"})), Err(ConfigError::Parse(_))));
        assert!(matches!(ConfigFile::from_value(json!([1, 2])), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn overrides_apply_after_file() {
        let f =
            ConfigFile::load(None, &["user_count=400".into(), "pairing_exponent_convention=per_pair".into()]).unwrap();
        assert_eq!(f.user_count, 400);
        assert_eq!(f.pairing_exponent_convention, Convention::PerPair);
        assert!(matches!(ConfigFile::load(None, &["nope=1".into()]), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(ConfigFile::load(None, &["user_count".into()]), Err(ConfigError::MalformedOverride(_))));
    }
}
