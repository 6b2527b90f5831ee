//! Deterministic file emission: CSV with 17 significant digits, JSON with
//! decimal-string numbers where precision matters, and a config hash in
//! every header.

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// Short hex digest of the canonical config string.
pub fn config_hash(canonical: &str) -> String {
    let mut h = Sha256::new();
    h.update(canonical.as_bytes());
    let out = h.finalize();
    let mut s = String::new();
    for b in out.iter().take(6) {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// 17-significant-digit decimal form used in both CSV cells and JSON
/// strings (cross-language reproducible).
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a CSV file: hash/tolerance header line, column names, rows.
pub fn write_csv(
    path: &Path,
    hash: &str,
    tolerances: &str,
    columns: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
) -> std::io::Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "# config_sha256={hash} {tolerances}");
    let _ = writeln!(s, "{}", columns.join(","));
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(num).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    fs::write(path, s)
}

/// Wrap a JSON value with the config hash and tolerance metadata.
pub fn json_with_meta(hash: &str, tolerances: &str, body: Value) -> Value {
    let mut m = Map::new();
    m.insert("config_sha256".into(), Value::String(hash.to_string()));
    m.insert("tolerances".into(), Value::String(tolerances.to_string()));
    m.insert("data".into(), body);
    Value::Object(m)
}

/// Numbers-as-strings array.
pub fn num_array(vs: &[f64]) -> Value {
    Value::Array(vs.iter().map(|v| Value::String(num(*v))).collect())
}

pub fn write_json(path: &Path, v: &Value) -> std::io::Result<()> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    fs::write(path, s)
}
