//! Deterministic artifacts: 6-decimal CSV with LF endings, atomic writes, run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Fixed 6-decimal rendering; negative zero prints as zero.
pub fn fmt_f64(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `bytes` to a temp file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

/// Renders rows under `header`. Every row must have one field per column.
pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), header.len(), "row {i} does not match the header");
        w.write_record(row).expect("writing to memory");
    }
    w.into_inner().expect("flushing to memory")
}

pub fn emit_csv(header: &[&str], rows: &[Vec<String>], path: &Path) -> Result<(), CliError> {
    write_atomic(path, &csv_bytes(header, rows))
}

/// Hex SHA-256 of the config's JSON rendering.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_vec(config).expect("config serializes");
    Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub seed: u64,
    pub config_hash: String,
    pub config: &'a T,
    pub wall_time_s: f64,
    pub outputs: &'a [String],
}

pub fn write_manifest<T: Serialize>(dir: &Path, manifest: &Manifest<'_, T>) -> Result<PathBuf, CliError> {
    let path = dir.join("manifest.json");
    let mut bytes = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    bytes.push(b'\n');
    write_atomic(&path, &bytes)?;
    Ok(path)
}

/// File-name-safe rendering of a spec string.
pub fn slug(s: &str) -> String {
    s.chars()
        .map(|ch| {
            if ch.is_ascii_alphanumeric() || ch == '.' || ch == '-' {
                ch
            } else {
                '_'
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(fmt_f64(1.0), "1.000000");
        assert_eq!(fmt_f64(-1e-12), "0.000000");
        assert_eq!(fmt_f64(0.2015864), "0.201586");
        assert_eq!(fmt_opt(None), "");
        assert_eq!(slug("erasure:p=0.5"), "erasure_p_0.5");
    }

    #[test]
    fn empty_rows_give_header_only() {
        assert_eq!(csv_bytes(&["a", "b"], &[]), b"a,b\n");
    }

    #[test]
    fn quoting_and_round_trip() {
        let rows = vec![
            vec!["x,y".to_string(), fmt_f64(0.5)],
            vec!["plain".into(), fmt_f64(2.0)],
        ];
        let bytes = csv_bytes(&["id", "v"], &rows);
        assert!(!bytes.contains(&b'\r'));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/t.csv");
        emit_csv(&["id", "v"], &rows, &path).unwrap();
        let mut r = csv::Reader::from_path(&path).unwrap();
        let back: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
        assert_eq!(back.len(), 2);
        assert_eq!(&back[0][0], "x,y");
        assert_eq!(std::fs::read(&path).unwrap(), bytes);
    }
}
