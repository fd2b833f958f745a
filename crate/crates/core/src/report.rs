//! Deterministic artifact emission.
//!
//! Every file the CLI writes begins with a comment line embedding the
//! seed, a hash of the fully resolved configuration, and the tool
//! version; re-running with the same triple reproduces identical bytes.
//! Writes go to a temporary sibling first and land by rename.

use std::path::Path;

use crate::error::Result;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// FNV-1a over the canonical JSON of a config; stable across runs.
pub fn config_hash(canonical_json: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in canonical_json.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// Standard first line of every artifact.
pub fn artifact_header(seed: u64, hash: &str) -> String {
    format!("# seed={seed} config={hash} version={TOOL_VERSION}\n")
}

/// Writes bytes atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
    }
    let mut tmp = path.to_path_buf();
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "artifact".to_string());
    tmp.set_file_name(format!(".{file_name}.tmp"));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Assembles a CSV artifact: header comment, column line, then rows.
pub fn csv_artifact(seed: u64, hash: &str, columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = artifact_header(seed, hash);
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
