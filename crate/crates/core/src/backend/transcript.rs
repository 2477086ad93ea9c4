//! Transcript recording and replay.
//!
//! A transcript is a line-delimited JSON file. The first line is a header
//! `{"format":"rumorsim-transcript","version":1}`; every later line is one
//! [`TranscriptEntry`]. Entries are keyed by `request_hash`, the hex SHA-256
//! of `system || 0x00 || user`; the full prompt texts are stored as well so
//! that a hash collision can never return the wrong response.

use std::collections::{HashMap, VecDeque};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{Backend, BackendError, BackendReply, BackendRequest};
use crate::prompt::Prompt;

pub const TRANSCRIPT_FORMAT: &str = "rumorsim-transcript";
pub const TRANSCRIPT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub request_hash: String,
    pub iteration: u64,
    pub system: String,
    pub user: String,
    pub raw_response: String,
    /// Milliseconds since the Unix epoch.
    pub timestamp_ms: u64,
    pub latency_ms: u64,
    pub attempts: u32,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
}

pub struct TranscriptWriter {
    out: BufWriter<File>,
}

impl TranscriptWriter {
    pub fn create(path: &Path) -> Result<Self, BackendError> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        let mut out = BufWriter::new(File::create(path)?);
        let header = Header { format: TRANSCRIPT_FORMAT.into(), version: TRANSCRIPT_VERSION };
        serde_json::to_writer(&mut out, &header).map_err(|e| BackendError::Transcript(e.to_string()))?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(Self { out })
    }

    /// Appends and flushes one entry.
    pub fn append(&mut self, entry: &TranscriptEntry) -> Result<(), BackendError> {
        serde_json::to_writer(&mut self.out, entry).map_err(|e| BackendError::Transcript(e.to_string()))?;
        self.out.write_all(b"\n")?;
        self.out.flush()?;
        Ok(())
    }
}

/// Recorded responses grouped by request hash, each group in recording order.
#[derive(Debug, Default, Clone)]
pub struct Transcript {
    by_hash: HashMap<String, VecDeque<TranscriptEntry>>,
}

impl Transcript {
    pub fn from_entries(entries: impl IntoIterator<Item = TranscriptEntry>) -> Self {
        let mut t = Self::default();
        for e in entries {
            t.by_hash.entry(e.request_hash.clone()).or_default().push_back(e);
        }
        t
    }

    pub fn len(&self) -> usize {
        self.by_hash.values().map(VecDeque::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unused entries, ordered by iteration.
    pub fn entries(&self) -> Vec<&TranscriptEntry> {
        let mut all: Vec<&TranscriptEntry> = self.by_hash.values().flatten().collect();
        all.sort_by_key(|e| e.iteration);
        all
    }

    /// Takes the oldest unused response recorded for exactly this prompt.
    pub fn take(&mut self, prompt: &Prompt) -> Option<TranscriptEntry> {
        let queue = self.by_hash.get_mut(&prompt.request_hash())?;
        let pos = queue.iter().position(|e| e.system == prompt.system && e.user == prompt.user)?;
        queue.remove(pos)
    }
}

pub fn read_transcript(path: &Path) -> Result<Transcript, BackendError> {
    let reader = BufReader::new(File::open(path)?);
    let mut entries = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |e: serde_json::Error| BackendError::Transcript(format!("{}:{}: {e}", path.display(), i + 1));
        if i == 0 {
            let header: Header = serde_json::from_str(&line).map_err(bad)?;
            if header.format != TRANSCRIPT_FORMAT || header.version != TRANSCRIPT_VERSION {
                return Err(BackendError::Transcript(format!(
                    "unsupported transcript {} v{}",
                    header.format, header.version
                )));
            }
            continue;
        }
        entries.push(serde_json::from_str(&line).map_err(bad)?);
    }
    Ok(Transcript::from_entries(entries))
}

pub struct ReplayBackend {
    transcript: Transcript,
}

impl ReplayBackend {
    pub fn new(transcript: Transcript) -> Self {
        Self { transcript }
    }
}

impl Backend for ReplayBackend {
    fn respond(&mut self, request: &BackendRequest<'_>) -> Result<BackendReply, BackendError> {
        match self.transcript.take(request.prompt) {
            Some(entry) => Ok(BackendReply { text: entry.raw_response, attempts: entry.attempts }),
            None => Err(BackendError::ReplayMiss {
                iteration: request.iteration,
                request_hash: request.prompt.request_hash(),
            }),
        }
    }
}

/// Wraps any backend and appends each successful exchange to a transcript.
pub struct RecordingBackend<B> {
    inner: B,
    writer: TranscriptWriter,
}

impl<B: Backend> RecordingBackend<B> {
    pub fn new(inner: B, writer: TranscriptWriter) -> Self {
        Self { inner, writer }
    }
}

impl<B: Backend> Backend for RecordingBackend<B> {
    fn respond(&mut self, request: &BackendRequest<'_>) -> Result<BackendReply, BackendError> {
        let started = Instant::now();
        let reply = self.inner.respond(request)?;
        let entry = TranscriptEntry {
            request_hash: request.prompt.request_hash(),
            iteration: request.iteration,
            system: request.prompt.system.clone(),
            user: request.prompt.user.clone(),
            raw_response: reply.text.clone(),
            timestamp_ms: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0),
            latency_ms: started.elapsed().as_millis() as u64,
            attempts: reply.attempts,
        };
        self.writer.append(&entry)?;
        Ok(reply)
    }
}
