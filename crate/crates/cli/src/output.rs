//! Deterministic artifact emission.
//!
//! Every artifact is stamped with a 16-hex-character SHA-256 prefix of the
//! command's *effective* parameters (raw config JSON plus resolved flags
//! and seed): CSV files carry it in a `# config_hash=…` header comment,
//! JSON reports in a top-level `config_hash` field. Identical inputs
//! therefore produce byte-identical artifacts, and any parameter change is
//! visible in the stamp.

use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::Path;

/// 16-hex-digit hash of the effective run parameters. `serde_json::Value`
/// objects serialize with sorted keys, so the digest is stable.
pub fn config_hash(effective: &serde_json::Value) -> String {
    let digest = Sha256::digest(effective.to_string().as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Canonical float formatting for CSV cells: shortest round-trip decimal,
/// with negative zero normalized.
pub fn fmt_float(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

/// Assemble a CSV artifact: hash header comment, column header, rows.
pub fn csv_artifact(hash: &str, columns: &str, rows: &[String]) -> String {
    let mut out = String::with_capacity(rows.len() * 32 + 64);
    out.push_str("# config_hash=");
    out.push_str(hash);
    out.push('\n');
    out.push_str(columns);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    out
}

/// Pretty-printed JSON artifact with a trailing newline.
pub fn json_artifact<T: serde::Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("serializable report");
    s.push('\n');
    s
}

/// Write to the given path, or stdout when absent.
pub fn write_artifact(path: Option<&Path>, content: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, content),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())?;
            out.flush()
        }
    }
}
