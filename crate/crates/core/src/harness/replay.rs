use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::record::{GameRecord, SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: unsupported schema_version {found} (expected {SCHEMA_VERSION})")]
    Version { line: usize, found: String },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// Writes one JSON object per game. With `redact`, raw prompts and
/// completions are dropped.
pub fn write_replays(records: &[GameRecord], path: &Path, redact: bool) -> Result<(), ReplayError> {
    let io = |source| ReplayError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    for r in records {
        let line = if redact {
            serde_json::to_string(&r.redacted())
        } else {
            serde_json::to_string(r)
        }
        .expect("records serialize");
        writeln!(out, "{line}").map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Reads a replay file, checking the schema version of every line.
pub fn read_replays(path: &Path) -> Result<Vec<GameRecord>, ReplayError> {
    let io = |source| ReplayError::Io {
        path: path.display().to_string(),
        source,
    };
    let reader = BufReader::new(File::open(path).map_err(io)?);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io)?;
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |e: serde_json::Error| ReplayError::Malformed {
            line: n,
            message: e.to_string(),
        };
        let value: serde_json::Value = serde_json::from_str(&line).map_err(malformed)?;
        match value.get("schema_version") {
            Some(v) if v.as_u64() == Some(u64::from(SCHEMA_VERSION)) => {}
            Some(v) => {
                return Err(ReplayError::Version {
                    line: n,
                    found: v.to_string(),
                })
            }
            None => {
                return Err(ReplayError::Malformed {
                    line: n,
                    message: "missing schema_version".into(),
                })
            }
        }
        records.push(serde_json::from_value(value).map_err(malformed)?);
    }
    Ok(records)
}
