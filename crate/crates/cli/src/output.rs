//! File outputs: CSV tables, JSON documents and the run manifest that
//! records how they were produced.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Real number with 17 significant digits, enough to round-trip an `f64`.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV document: one `#` comment line, a header row, then `rows`.
pub fn csv_bytes(
    comment: &str,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Vec<u8> {
    let mut buf = format!("# {comment}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header).expect("in-memory write");
        for r in rows {
            w.write_record(&r).expect("in-memory write");
        }
        w.flush().expect("in-memory write");
    }
    buf
}

pub fn json_bytes(value: &impl Serialize) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("serializable");
    v.push(b'\n');
    v
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Serialize)]
pub struct OutputDigest {
    pub path: PathBuf,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub timestamp: String,
    pub outputs: Vec<OutputDigest>,
}

pub fn manifest_path(data: &Path) -> PathBuf {
    let mut name = data.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    data.with_file_name(name)
}

/// Writes `bytes` to `path`, then its manifest next to it.
pub fn write_with_manifest(
    path: &Path,
    bytes: &[u8],
    command: &str,
    params: &impl Serialize,
    seed: Option<u64>,
) -> CliResult<PathBuf> {
    write_file(path, bytes)?;
    let manifest = RunManifest {
        command: command.to_string(),
        params: serde_json::to_value(params).expect("serializable"),
        seed,
        version: VERSION.to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        outputs: vec![OutputDigest {
            path: path.to_path_buf(),
            bytes: bytes.len(),
            sha256: hex::encode(Sha256::digest(bytes)),
        }],
    };
    let mpath = manifest_path(path);
    write_file(&mpath, &json_bytes(&manifest))?;
    Ok(mpath)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for x in [0.1, 2.0 * 10f64.sqrt(), -1e-300, 6.0, std::f64::consts::PI] {
            let s = real(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(real(6.0), "6.0000000000000000e0");
    }

    #[test]
    fn csv_layout() {
        let b = csv_bytes("mode=fixed", &["a", "b"], [vec!["1".into(), "2".into()]]);
        assert_eq!(String::from_utf8(b).unwrap(), "# mode=fixed\na,b\n1,2\n");
    }

    #[test]
    fn manifest_sits_next_to_data() {
        assert_eq!(
            manifest_path(Path::new("out/scan.csv")),
            Path::new("out/scan.csv.manifest.json")
        );
    }
}
