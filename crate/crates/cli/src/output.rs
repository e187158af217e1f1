//! Report envelopes and file emission.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use qmacro_core::fock::TruncationCertificate;

use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Provenance block embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub schema_version: u32,
    pub library_version: &'static str,
    pub command: &'static str,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub truncation: Option<TruncationCertificate>,
}

impl Meta {
    pub fn new(command: &'static str, cfg: &RunConfig, truncation: Option<TruncationCertificate>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            library_version: env!("CARGO_PKG_VERSION"),
            command,
            config_hash: config_hash(command, cfg),
            seed: cfg.seed,
            truncation,
        }
    }
}

/// SHA-256 of the command name and the effective configuration.
pub fn config_hash(command: &str, cfg: &RunConfig) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0u8]);
    h.update(serde_json::to_vec(cfg).expect("config serializes"));
    hex::encode(h.finalize())
}

#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub meta: &'a Meta,
    pub report: &'a T,
}

/// Writes `bytes` to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))?;
            }
            std::fs::write(p, bytes).map_err(|e| CliError::Io(p.to_path_buf(), e))
        }
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(bytes).and_then(|_| so.flush()).map_err(|e| CliError::Io(PathBuf::from("<stdout>"), e))
        }
    }
}

pub fn to_json<T: Serialize>(meta: &Meta, report: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(&Envelope { meta, report }).expect("report serializes");
    v.push(b'\n');
    v
}

/// Writes a report in the requested format.
pub fn emit_report<T: Serialize>(out: Option<&Path>, format: Format, meta: &Meta, report: &T) -> Result<(), CliError> {
    let bytes = match format {
        Format::Json => to_json(meta, report),
        Format::Csv => {
            let v = serde_json::to_value(Envelope { meta, report }).expect("report serializes");
            let mut rows = Vec::new();
            flatten("", &v, &mut rows);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["key", "value"]).map_err(CliError::Csv)?;
            for (k, val) in rows {
                w.write_record([k, val]).map_err(CliError::Csv)?;
            }
            w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))?
        }
    };
    emit(out, &bytes)
}

/// Dotted-path `(key, scalar)` pairs of a JSON value, keys in sorted order.
pub fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&join(k), x, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&join(&i.to_string()), x, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// Serializes rows to CSV with a header taken from the row type.
pub fn rows_to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(CliError::Csv)?;
    }
    w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = RunConfig { delta: Some(0.1), ..RunConfig::default() };
        let b = RunConfig { delta: Some(0.2), ..RunConfig::default() };
        assert_eq!(config_hash("size", &a), config_hash("size", &a));
        assert_ne!(config_hash("size", &a), config_hash("size", &b));
        assert_ne!(config_hash("size", &a), config_hash("nrf", &a));
        assert_eq!(config_hash("size", &a).len(), 64);
    }

    #[test]
    fn flatten_paths() {
        let v: Value = serde_json::from_str(r#"{"a": {"b": 1, "c": [true, null]}, "d": "x"}"#).unwrap();
        let mut rows = Vec::new();
        flatten("", &v, &mut rows);
        let keys: Vec<&str> = rows.iter().map(|r| r.0.as_str()).collect();
        assert_eq!(keys, ["a.b", "a.c.0", "a.c.1", "d"]);
        assert_eq!(rows[1].1, "true");
    }
}
