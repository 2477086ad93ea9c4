//! Sources of agent behavior: a remote chat-completions model, deterministic
//! rule agents, or replay of a recorded transcript.

mod remote;
mod rule;
mod transcript;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::prompt::{Prompt, PromptContext};

pub use remote::{remote_act, RemoteBackend, RemoteConfig};
pub use rule::{rule_act, AcceptThresholds, RuleBackend, RuleConfig};
pub use transcript::{
    read_transcript, RecordingBackend, ReplayBackend, Transcript, TranscriptEntry, TranscriptWriter, TRANSCRIPT_FORMAT,
    TRANSCRIPT_VERSION,
};

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("backend unavailable after {attempts} attempts: {last_error}")]
    Unavailable { attempts: u32, last_error: String },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("replay miss at iteration {iteration}: no recorded response for request {request_hash}")]
    ReplayMiss { iteration: u64, request_hash: String },
    #[error("transcript error: {0}")]
    Transcript(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One request to a backend: the rendered prompt plus the structured state
/// it was rendered from.
#[derive(Debug, Clone, Copy)]
pub struct BackendRequest<'a> {
    pub iteration: u64,
    pub prompt: &'a Prompt,
    pub context: &'a PromptContext<'a>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendReply {
    pub text: String,
    /// HTTP attempts spent; 1 for local backends.
    pub attempts: u32,
}

impl BackendReply {
    pub fn local(text: String) -> Self {
        Self { text, attempts: 1 }
    }
}

pub trait Backend: Send {
    fn respond(&mut self, request: &BackendRequest<'_>) -> Result<BackendReply, BackendError>;
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn respond(&mut self, request: &BackendRequest<'_>) -> Result<BackendReply, BackendError> {
        (**self).respond(request)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Remote,
    #[default]
    Rule,
    Replay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct ReplayConfig {
    pub transcript: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub remote: RemoteConfig,
    pub rule: RuleConfig,
    pub replay: ReplayConfig,
    /// Record every exchange to this transcript file, whatever the kind.
    pub record_transcript: Option<PathBuf>,
}

impl BackendConfig {
    pub fn rule() -> Self {
        Self::default()
    }

    /// Checks everything that can be checked without touching the network,
    /// including that the API key variable is set for remote backends.
    pub fn validate(&self) -> Result<(), BackendError> {
        match self.kind {
            BackendKind::Remote => {
                self.remote.validate()?;
                self.remote.api_key()?;
            }
            BackendKind::Rule => self.rule.validate()?,
            BackendKind::Replay => {
                if self.replay.transcript.is_none() {
                    return Err(BackendError::Config("replay backend needs replay.transcript".into()));
                }
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Box<dyn Backend>, BackendError> {
        self.validate()?;
        let inner: Box<dyn Backend> = match self.kind {
            BackendKind::Remote => Box::new(RemoteBackend::new(self.remote.clone())?),
            BackendKind::Rule => Box::new(RuleBackend::new(self.rule.clone())),
            BackendKind::Replay => {
                let path = self.replay.transcript.as_ref().expect("validated");
                Box::new(ReplayBackend::new(read_transcript(path)?))
            }
        };
        match &self.record_transcript {
            Some(path) => Ok(Box::new(RecordingBackend::new(inner, TranscriptWriter::create(path)?))),
            None => Ok(inner),
        }
    }
}
