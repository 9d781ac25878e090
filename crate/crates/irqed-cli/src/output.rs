//! Artifact writing: deterministic payloads, atomic placement.
//!
//! Identical configs must produce byte-identical files, so payloads contain
//! no wall-clock data and every float is rendered with Rust's shortest
//! round-trip formatting. Files are staged next to their destination and
//! moved into place with a rename, so a crashed run never leaves a truncated
//! artifact behind. Every file opens with comment lines recording the
//! artifact schema version and the SHA-256 digest of the exact config bytes
//! that produced it; JSON artifacts carry the same fields in a `meta`
//! object so they stay machine-parseable.

use crate::errors::{CliError, CliResult};
use serde::Serialize;
use std::fs;
use std::path::Path;

/// Version tag stamped into every artifact header; bump on any schema change.
pub const ARTIFACT_VERSION: &str = "1";

/// Write `bytes` to `path` via a sibling temp file and rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    fs::write(tmp, bytes).map_err(|e| CliError::Io(format!("writing {}: {e}", tmp.display())))?;
    fs::rename(tmp, path)
        .map_err(|e| CliError::Io(format!("renaming into {}: {e}", path.display())))?;
    Ok(())
}

/// Comment header for CSV artifacts: schema version, config digest, then
/// any command-specific `key: value` lines.
pub fn csv_header(kind: &str, config_sha: &str, extra: &[(&str, String)]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# irqed {kind} artifact v{ARTIFACT_VERSION} (crate {})\n",
        env!("CARGO_PKG_VERSION")
    ));
    out.push_str(&format!("# config sha256: {config_sha}\n"));
    for (key, value) in extra {
        out.push_str(&format!("# {key}: {value}\n"));
    }
    out
}

/// Shortest-round-trip float rendering shared by all CSV columns.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Assemble a CSV payload from a header block, column names and rows.
pub fn csv_payload(header: String, columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header;
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct JsonMeta<'a> {
    artifact: &'a str,
    version: &'a str,
    crate_version: &'a str,
    config_sha256: &'a str,
}

#[derive(Serialize)]
struct JsonEnvelope<'a, T: Serialize> {
    meta: JsonMeta<'a>,
    result: &'a T,
}

/// JSON artifact: the result wrapped with the same provenance the CSV
/// headers carry.
pub fn json_payload<T: Serialize>(kind: &str, config_sha: &str, result: &T) -> CliResult<String> {
    let envelope = JsonEnvelope {
        meta: JsonMeta {
            artifact: kind,
            version: ARTIFACT_VERSION,
            crate_version: env!("CARGO_PKG_VERSION"),
            config_sha256: config_sha,
        },
        result,
    };
    let mut text = serde_json::to_string_pretty(&envelope)
        .map_err(|e| CliError::Io(format!("serializing {kind} result: {e}")))?;
    text.push('\n');
    Ok(text)
}
