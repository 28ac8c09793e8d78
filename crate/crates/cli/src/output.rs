//! CSV and JSON emission.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// SHA-256 over the resolved configuration and the instance file bytes.
pub fn config_hash<T: Serialize>(config: &T, instance: Option<&[u8]>) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(config).expect("config serializes"));
    if let Some(bytes) = instance {
        h.update(bytes);
    }
    hex::encode(h.finalize())
}

/// A CSV table with a leading provenance comment and optional trailing comments.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    trailer: Vec<String>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
            trailer: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn comment(&mut self, line: String) {
        self.trailer.push(line);
    }

    pub fn render(&self, command: &str, hash: &str) -> Vec<u8> {
        let mut buf = format!("# baa {command} config_sha256={hash}\n").into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&self.header).expect("in-memory write");
            for row in &self.rows {
                w.write_record(row).expect("in-memory write");
            }
            w.flush().expect("in-memory write");
        }
        for line in &self.trailer {
            buf.extend_from_slice(format!("# {line}\n").as_bytes());
        }
        buf
    }
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn write_bytes(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Io(p.to_path_buf(), e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(PathBuf::from("<stdout>"), e))
        }
    }
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(baa_core::Error::from)?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}
