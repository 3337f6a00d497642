//! Offline backends: recorded transcripts, a recorder, and closures.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{sha256_hex, CompletionBackend, CompletionRequest, CompletionResponse, LlmError};

/// One transcript line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureRecord {
    pub key_hash: String,
    pub prompt_sha256: String,
    pub response_text: String,
}

impl FixtureRecord {
    pub fn new(request: &CompletionRequest, response_text: impl Into<String>) -> FixtureRecord {
        let prompt_sha256 = sha256_hex(request.prompt.as_bytes());
        FixtureRecord {
            key_hash: request.cache_key.clone().unwrap_or_else(|| prompt_sha256.clone()),
            prompt_sha256,
            response_text: response_text.into(),
        }
    }
}

pub fn read_transcript(path: &Path) -> Result<Vec<FixtureRecord>, LlmError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| LlmError::Transcript {
            path: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_transcript(path: &Path, records: &[FixtureRecord]) -> Result<(), LlmError> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| LlmError::Malformed(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Serves recorded completions, looked up by transcript key and then by
/// prompt hash. A request with no recording is an error.
#[derive(Debug, Default)]
pub struct FixtureBackend {
    by_key: HashMap<String, String>,
    by_prompt: HashMap<String, String>,
}

impl FixtureBackend {
    pub fn from_records(records: impl IntoIterator<Item = FixtureRecord>) -> FixtureBackend {
        let mut b = FixtureBackend::default();
        for r in records {
            b.by_key.insert(r.key_hash, r.response_text.clone());
            b.by_prompt.insert(r.prompt_sha256, r.response_text);
        }
        b
    }

    pub fn load(path: &Path) -> Result<FixtureBackend, LlmError> {
        Ok(FixtureBackend::from_records(read_transcript(path)?))
    }

    pub fn len(&self) -> usize {
        self.by_key.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_key.is_empty()
    }
}

impl CompletionBackend for FixtureBackend {
    fn name(&self) -> &str {
        "fixture"
    }

    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, LlmError> {
        req.validate()?;
        let prompt_sha256 = sha256_hex(req.prompt.as_bytes());
        let hit = req
            .cache_key
            .as_ref()
            .and_then(|k| self.by_key.get(k))
            .or_else(|| self.by_prompt.get(&prompt_sha256));
        match hit {
            Some(text) => Ok(CompletionResponse {
                text: text.clone(),
                attempts: 1,
                ..CompletionResponse::default()
            }),
            None => Err(LlmError::FixtureMiss {
                key: req.cache_key.clone().unwrap_or_default(),
                prompt_sha256,
            }),
        }
    }
}

/// Forwards to another backend and appends every successful exchange to a
/// transcript file that [`FixtureBackend`] can replay.
pub struct RecordingBackend<B> {
    inner: B,
    path: PathBuf,
    records: Mutex<Vec<FixtureRecord>>,
}

impl<B: CompletionBackend> RecordingBackend<B> {
    /// Starts a fresh transcript at `path`.
    pub fn new(inner: B, path: impl Into<PathBuf>) -> Result<RecordingBackend<B>, LlmError> {
        let path = path.into();
        File::create(&path)?;
        Ok(RecordingBackend {
            inner,
            path,
            records: Mutex::new(Vec::new()),
        })
    }

    pub fn records(&self) -> Vec<FixtureRecord> {
        self.records.lock().unwrap().clone()
    }
}

impl<B: CompletionBackend> CompletionBackend for RecordingBackend<B> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, LlmError> {
        let resp = self.inner.complete(req)?;
        let rec = FixtureRecord::new(req, resp.text.clone());
        let mut records = self.records.lock().unwrap();
        let mut f = std::fs::OpenOptions::new().append(true).open(&self.path)?;
        let line = serde_json::to_string(&rec).map_err(|e| LlmError::Malformed(e.to_string()))?;
        writeln!(f, "{line}")?;
        records.push(rec);
        Ok(resp)
    }
}

type ReplyFn = dyn Fn(&CompletionRequest) -> Result<String, LlmError> + Send + Sync;

/// A backend answering from a closure; useful for scripted and faulty replies.
pub struct FnBackend {
    name: String,
    reply: Box<ReplyFn>,
}

impl FnBackend {
    pub fn new(
        name: impl Into<String>,
        reply: impl Fn(&CompletionRequest) -> Result<String, LlmError> + Send + Sync + 'static,
    ) -> FnBackend {
        FnBackend {
            name: name.into(),
            reply: Box::new(reply),
        }
    }
}

impl CompletionBackend for FnBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, LlmError> {
        req.validate()?;
        Ok(CompletionResponse {
            text: (self.reply)(req)?,
            attempts: 1,
            ..CompletionResponse::default()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_then_replays_identically() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        let rec = RecordingBackend::new(FnBackend::new("echo", |r| Ok(format!("echo: {}", r.prompt))), &path).unwrap();
        let mut keyed = CompletionRequest::new("second", "m");
        keyed.cache_key = Some("abc".into());
        let a = rec.complete(&CompletionRequest::new("first", "m")).unwrap();
        let b = rec.complete(&keyed).unwrap();

        let fixture = FixtureBackend::load(&path).unwrap();
        assert_eq!(fixture.len(), 2);
        assert_eq!(fixture.complete(&CompletionRequest::new("first", "m")).unwrap().text, a.text);
        assert_eq!(fixture.complete(&keyed).unwrap().text, b.text);
        let miss = fixture.complete(&CompletionRequest::new("third", "m"));
        assert!(matches!(miss, Err(LlmError::FixtureMiss { .. })));
    }

    #[test]
    fn malformed_transcript_line_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        std::fs::write(&path, "{\"key_hash\":\"a\",\"prompt_sha256\":\"b\",\"response_text\":\"c\"}\nnot json\n").unwrap();
        match FixtureBackend::load(&path) {
            Err(LlmError::Transcript { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
