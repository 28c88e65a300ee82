//! Config-file merging, grid parsing and failure classification.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::{Common, Format};

/// Why a run did not succeed; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config or parameter domain: exit 2.
    Usage(String),
    /// Numerical failure: exit 1.
    Numeric(String),
    /// The computation finished but missed its tolerance: exit 1.
    Tolerance(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numeric(_) | Failure::Tolerance(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Numeric(m) => write!(f, "numeric failure: {m}"),
            Failure::Tolerance(m) => write!(f, "tolerance not met: {m}"),
        }
    }
}

impl From<thermocap::Error> for Failure {
    fn from(e: thermocap::Error) -> Self {
        use thermocap::Error::*;
        match e {
            InvalidInput(_) | DimensionMismatch { .. } | Domain(_) | Constraint { .. } | EpsilonTooLarge { .. } => {
                Failure::Usage(e.to_string())
            }
            Numeric(_) | NoRoot(_) | NotConverged { .. } | QuadratureDiverged(_) => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numeric(format!("i/o: {e}"))
    }
}

const COMMON_KEYS: [&str; 2] = ["format", "output"];

/// Reads the config file as a flat JSON object; `-` in keys becomes `_`.
pub fn load(path: Option<&Path>) -> Result<Map<String, Value>, Failure> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
    let Value::Object(map) = value else {
        return Err(Failure::Usage(format!("config {} must be a JSON object", path.display())));
    };
    Ok(map.into_iter().map(|(k, v)| (k.replace('-', "_"), v)).collect())
}

pub fn common(file: &Map<String, Value>, format: Option<Format>, output: Option<PathBuf>) -> Result<Common, Failure> {
    let format = match (format, file.get("format")) {
        (Some(f), _) => Some(f),
        (None, Some(v)) => Some(serde_json::from_value(v.clone()).map_err(|e| Failure::Usage(format!("config key format: {e}")))?),
        (None, None) => None,
    };
    let output = match (output, file.get("output")) {
        (Some(p), _) => Some(p),
        (None, Some(Value::String(s))) => Some(PathBuf::from(s)),
        (None, Some(v)) => return Err(Failure::Usage(format!("config key output must be a string, got {v}"))),
        (None, None) => None,
    };
    Ok(Common { format, output })
}

/// Fills every flag left unset on the command line from the config file.
/// Keys that name no flag of the command are rejected.
pub fn merge<T: Serialize + DeserializeOwned>(args: &T, file: &Map<String, Value>) -> Result<T, Failure> {
    let mut value = serde_json::to_value(args).map_err(|e| Failure::Numeric(e.to_string()))?;
    let Value::Object(slots) = &mut value else {
        return Err(Failure::Numeric("arguments must serialize to an object".into()));
    };
    for (key, v) in file {
        if COMMON_KEYS.contains(&key.as_str()) {
            continue;
        }
        match slots.get_mut(key) {
            Some(slot) if slot.is_null() => *slot = v.clone(),
            Some(_) => {}
            None => return Err(Failure::Usage(format!("unknown config key {key:?}"))),
        }
    }
    serde_json::from_value(value).map_err(|e| Failure::Usage(format!("config: {e}")))
}

/// `start:stop:step` (inclusive, linear) or `log:lo:hi:count`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    if let Some(rest) = spec.strip_prefix("log:") {
        let bad = || Failure::Usage(format!("expected log:lo:hi:count, got {spec:?}"));
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if !(lo > 0.0 && hi > lo && count >= 2) {
            return Err(bad());
        }
        return Ok(thermocap::roots::log_grid(lo, hi, count));
    }
    Ok(thermocap::roots::parse_range(spec)?)
}

/// First 16 hex digits of the SHA-256 of the compact JSON config.
pub fn config_hash(config: &Value) -> String {
    let text = serde_json::to_string(config).expect("JSON values serialize");
    hex::encode(&Sha256::digest(text.as_bytes())[..8])
}
