//! OpenAI-compatible chat-completions client.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Backend, BackendError, BackendReply, BackendRequest};
use crate::prompt::Prompt;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemoteConfig {
    /// Endpoint root; requests go to `{base_url}/chat/completions`.
    pub base_url: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: Option<u32>,
    pub timeout_secs: u64,
    pub max_retries: u32,
    /// First retry delay; doubles per retry up to `backoff_max_ms`.
    pub backoff_initial_ms: u64,
    pub backoff_max_ms: u64,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            base_url: "https://api.openai.com/v1".into(),
            model: "gpt-4o-mini".into(),
            temperature: 0.0,
            max_tokens: None,
            timeout_secs: 60,
            max_retries: 3,
            backoff_initial_ms: 500,
            backoff_max_ms: 30_000,
            api_key_env: "OPENAI_API_KEY".into(),
        }
    }
}

impl RemoteConfig {
    pub fn validate(&self) -> Result<(), BackendError> {
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(BackendError::Config(format!("temperature {} must be >= 0", self.temperature)));
        }
        if self.base_url.trim().is_empty() || self.model.trim().is_empty() {
            return Err(BackendError::Config("remote.base_url and remote.model are required".into()));
        }
        Ok(())
    }

    pub fn api_key(&self) -> Result<String, BackendError> {
        match std::env::var(&self.api_key_env) {
            Ok(key) if !key.trim().is_empty() => Ok(key),
            _ => Err(BackendError::Config(format!(
                "environment variable {} with the API key is not set",
                self.api_key_env
            ))),
        }
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }

    fn backoff(&self, retry: u32) -> Duration {
        let factor = 1u64.checked_shl(retry).unwrap_or(u64::MAX);
        Duration::from_millis(self.backoff_initial_ms.saturating_mul(factor).min(self.backoff_max_ms))
    }
}

pub struct RemoteBackend {
    client: reqwest::blocking::Client,
    api_key: String,
    config: RemoteConfig,
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Result<Self, BackendError> {
        config.validate()?;
        let api_key = config.api_key()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| BackendError::Config(format!("cannot build HTTP client: {e}")))?;
        Ok(Self { client, api_key, config })
    }
}

impl Backend for RemoteBackend {
    fn respond(&mut self, request: &BackendRequest<'_>) -> Result<BackendReply, BackendError> {
        remote_act(&self.client, &self.api_key, request.prompt, &self.config)
    }
}

enum Attempt {
    Retryable(String),
    Fatal(BackendError),
}

/// Sends one chat completion, retrying transport failures, 429 and 5xx with
/// exponential backoff up to `max_retries` extra attempts.
pub fn remote_act(
    client: &reqwest::blocking::Client,
    api_key: &str,
    prompt: &Prompt,
    cfg: &RemoteConfig,
) -> Result<BackendReply, BackendError> {
    let mut body = json!({
        "model": cfg.model,
        "messages": [
            {"role": "system", "content": prompt.system},
            {"role": "user", "content": prompt.user},
        ],
        "temperature": cfg.temperature,
    });
    if let Some(max_tokens) = cfg.max_tokens {
        body["max_tokens"] = json!(max_tokens);
    }
    let url = cfg.endpoint();
    let mut attempts = 0;
    loop {
        attempts += 1;
        let outcome = match client.post(&url).bearer_auth(api_key).json(&body).send() {
            Err(e) => Attempt::Retryable(format!("transport: {e}")),
            Ok(resp) => {
                let status = resp.status();
                if status.as_u16() == 429 || status.is_server_error() {
                    Attempt::Retryable(format!("HTTP {status}"))
                } else if !status.is_success() {
                    let text = resp.text().unwrap_or_default();
                    Attempt::Fatal(BackendError::Protocol(format!("HTTP {status}: {}", truncate(&text, 300))))
                } else {
                    match resp.text() {
                        Err(e) => Attempt::Retryable(format!("reading body: {e}")),
                        Ok(text) => {
                            return extract_content(&text).map(|text| BackendReply { text, attempts });
                        }
                    }
                }
            }
        };
        match outcome {
            Attempt::Fatal(e) => return Err(e),
            Attempt::Retryable(last_error) => {
                if attempts > cfg.max_retries {
                    return Err(BackendError::Unavailable { attempts, last_error });
                }
                std::thread::sleep(cfg.backoff(attempts - 1));
            }
        }
    }
}

fn extract_content(body: &str) -> Result<String, BackendError> {
    let value: Value = serde_json::from_str(body)
        .map_err(|e| BackendError::Protocol(format!("reply is not JSON ({e}): {}", truncate(body, 200))))?;
    value
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_owned)
        .ok_or_else(|| BackendError::Protocol("reply lacks choices[0].message.content".into()))
}

fn truncate(s: &str, max_chars: usize) -> &str {
    match s.char_indices().nth(max_chars) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}
