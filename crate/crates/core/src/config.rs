//! Flat `key = value` parameter files.
//!
//! ```text
//! # set A
//! theta = 5
//! c = 1
//! w_high = 2.5
//! w_low = 0.5
//! eta_cap = 1.5
//! k = 0.2
//! s = 0
//! ```
//!
//! All seven keys are required; unknown or repeated keys are rejected.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::params::ModelParams;

pub const KEYS: [&str; 7] = ["theta", "c", "w_high", "w_low", "eta_cap", "k", "s"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: `{value}` is not a number")]
    BadNumber { line: usize, value: String },
    #[error("missing key `{0}`")]
    MissingKey(&'static str),
}

pub fn parse_config(text: &str) -> Result<ModelParams, ConfigError> {
    let mut values: [Option<f64>; 7] = [None; 7];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
        let (key, value) = (key.trim(), value.trim());
        let slot = KEYS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| ConfigError::UnknownKey { line, key: key.to_string() })?;
        if values[slot].is_some() {
            return Err(ConfigError::DuplicateKey { line, key: key.to_string() });
        }
        let number: f64 = value.parse().map_err(|_| ConfigError::BadNumber { line, value: value.to_string() })?;
        values[slot] = Some(number);
    }
    let mut out = [0.0; 7];
    for (i, v) in values.iter().enumerate() {
        out[i] = v.ok_or(ConfigError::MissingKey(KEYS[i]))?;
    }
    let [theta, c, w_high, w_low, eta_cap, k, s] = out;
    Ok(ModelParams::new(theta, c, w_high, w_low, eta_cap, k, s))
}

pub fn load_config(path: &Path) -> Result<ModelParams, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text)
}

/// Renders parameters back into the config format.
pub fn render_config(params: &ModelParams) -> String {
    let values = [params.theta, params.c, params.w_high, params.w_low, params.eta_cap, params.k, params.s];
    KEYS.iter().zip(values).map(|(k, v)| format!("{k} = {v}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SET_A: &str = "# set A\ntheta = 5\nc = 1\nw_high = 2.5\nw_low = 0.5  # low fee\neta_cap = 1.5\nk = 0.2\ns = 0\n";

    #[test]
    fn parses_reference_set() {
        assert_eq!(parse_config(SET_A).unwrap(), ModelParams::reference_baseline(0.2));
    }

    #[test]
    fn round_trips() {
        let p = ModelParams::reference_subsidy(0.123);
        assert_eq!(parse_config(&render_config(&p)).unwrap(), p);
    }

    #[test]
    fn rejects_missing_unknown_duplicate_and_garbage() {
        let missing = SET_A.replace("s = 0\n", "");
        assert!(matches!(parse_config(&missing), Err(ConfigError::MissingKey("s"))));
        let unknown = format!("{SET_A}gamma = 1\n");
        assert!(matches!(parse_config(&unknown), Err(ConfigError::UnknownKey { line: 9, .. })));
        let dup = format!("{SET_A}k = 0.1\n");
        assert!(matches!(parse_config(&dup), Err(ConfigError::DuplicateKey { .. })));
        let bad = SET_A.replace("k = 0.2", "k = fast");
        assert!(matches!(parse_config(&bad), Err(ConfigError::BadNumber { .. })));
        let syntax = SET_A.replace("k = 0.2", "k 0.2");
        assert!(matches!(parse_config(&syntax), Err(ConfigError::Syntax { line: 7 })));
    }
}
