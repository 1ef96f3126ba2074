//! Chat transports: a live HTTP client, a retry wrapper, and the
//! content-addressed replay store that makes recorded runs reproducible.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> ChatMessage {
        ChatMessage { role: "user".to_string(), content: content.into() }
    }

    pub fn system(content: impl Into<String>) -> ChatMessage {
        ChatMessage { role: "system".to_string(), content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub temperature: f64,
    pub messages: Vec<ChatMessage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatReply {
    pub text: String,
}

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("http status {status}")]
    Http { status: u16 },
    #[error("network error: {0}")]
    Network(String),
    #[error("request timed out")]
    Timeout,
    #[error("no recorded reply for request {hash}")]
    ReplayMiss { hash: String },
    #[error("malformed reply: {0}")]
    BadReply(String),
    #[error("gave up after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: String },
}

impl TransportError {
    /// Whether retrying the same request could plausibly succeed.
    pub fn is_transient(&self) -> bool {
        match self {
            TransportError::Http { status } => *status == 429 || (500..=599).contains(status),
            TransportError::Network(_) | TransportError::Timeout => true,
            TransportError::ReplayMiss { .. }
            | TransportError::BadReply(_)
            | TransportError::Exhausted { .. } => false,
        }
    }
}

pub trait Transport: Send + Sync {
    fn send(&self, request: &ChatRequest) -> Result<ChatReply, TransportError>;
}

pub type SharedTransport = std::sync::Arc<dyn Transport>;

/// Content address of a request: sha256 over the canonical JSON of
/// (model, temperature, messages). `max_tokens` does not participate.
pub fn request_hash(request: &ChatRequest) -> String {
    #[derive(Serialize)]
    struct Key<'a> {
        model: &'a str,
        temperature: f64,
        messages: &'a [ChatMessage],
    }
    let bytes = serde_json::to_vec(&Key {
        model: &request.model,
        temperature: request.temperature,
        messages: &request.messages,
    })
    .expect("requests serialize");
    let digest = Sha256::digest(&bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        write!(out, "{byte:02x}").expect("writing to a string cannot fail");
    }
    out
}

#[derive(Debug, Serialize, Deserialize)]
struct ReplayEntry {
    request: ChatRequest,
    reply_text: String,
}

/// One human-readable JSON file per request hash.
#[derive(Debug, Clone)]
pub struct ReplayStore {
    dir: PathBuf,
}

impl ReplayStore {
    pub fn new(dir: impl Into<PathBuf>) -> Result<ReplayStore, std::io::Error> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(ReplayStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, hash: &str) -> PathBuf {
        self.dir.join(format!("{hash}.json"))
    }

    pub fn record(&self, request: &ChatRequest, reply_text: &str) -> Result<String, std::io::Error> {
        let hash = request_hash(request);
        let entry =
            ReplayEntry { request: request.clone(), reply_text: reply_text.to_string() };
        let json = serde_json::to_string_pretty(&entry).expect("replay entries serialize");
        std::fs::write(self.path_for(&hash), json + "\n")?;
        Ok(hash)
    }

    pub fn lookup(&self, request: &ChatRequest) -> Result<Option<String>, TransportError> {
        let path = self.path_for(&request_hash(request));
        let raw = match std::fs::read_to_string(&path) {
            Ok(raw) => raw,
            Err(err) if err.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(err) => return Err(TransportError::Network(err.to_string())),
        };
        let entry: ReplayEntry = serde_json::from_str(&raw)
            .map_err(|e| TransportError::BadReply(format!("{}: {e}", path.display())))?;
        Ok(Some(entry.reply_text))
    }

    pub fn len(&self) -> usize {
        std::fs::read_dir(&self.dir)
            .map(|rd| {
                rd.filter_map(Result::ok)
                    .filter(|e| e.path().extension().is_some_and(|x| x == "json"))
                    .count()
            })
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Serves replies from a [`ReplayStore`]; a miss is an error, never a
/// network call.
pub struct ReplayTransport {
    store: ReplayStore,
}

impl ReplayTransport {
    pub fn new(store: ReplayStore) -> ReplayTransport {
        ReplayTransport { store }
    }
}

impl Transport for ReplayTransport {
    fn send(&self, request: &ChatRequest) -> Result<ChatReply, TransportError> {
        match self.store.lookup(request)? {
            Some(text) => Ok(ChatReply { text }),
            None => Err(TransportError::ReplayMiss { hash: request_hash(request) }),
        }
    }
}

/// Forwards to an inner transport and records every reply. Requests already
/// in the store are answered from it without touching the inner transport.
pub struct RecordingTransport {
    inner: SharedTransport,
    store: ReplayStore,
}

impl RecordingTransport {
    pub fn new(inner: SharedTransport, store: ReplayStore) -> RecordingTransport {
        RecordingTransport { inner, store }
    }
}

impl Transport for RecordingTransport {
    fn send(&self, request: &ChatRequest) -> Result<ChatReply, TransportError> {
        if let Some(text) = self.store.lookup(request)? {
            return Ok(ChatReply { text });
        }
        let reply = self.inner.send(request)?;
        self.store
            .record(request, &reply.text)
            .map_err(|e| TransportError::Network(e.to_string()))?;
        Ok(reply)
    }
}

/// Retries transient failures with exponential backoff.
pub struct Retry {
    inner: SharedTransport,
    retries: u32,
    backoff: Duration,
}

impl Retry {
    pub fn new(inner: SharedTransport, retries: u32, backoff: Duration) -> Retry {
        Retry { inner, retries, backoff }
    }
}

impl Transport for Retry {
    fn send(&self, request: &ChatRequest) -> Result<ChatReply, TransportError> {
        let attempts = 1 + self.retries;
        let mut last: Option<TransportError> = None;
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(self.backoff * 2u32.pow(attempt - 1));
            }
            match self.inner.send(request) {
                Ok(reply) => return Ok(reply),
                Err(err) if err.is_transient() => {
                    log::warn!("attempt {} failed: {err}", attempt + 1);
                    last = Some(err);
                }
                Err(err) => return Err(err),
            }
        }
        Err(TransportError::Exhausted {
            attempts,
            last: last.map_or_else(|| "no attempts made".to_string(), |e| e.to_string()),
        })
    }
}

/// Pops canned replies in order; for tests. Records every request it saw.
pub struct ScriptedTransport {
    replies: Mutex<VecDeque<String>>,
    requests: Mutex<Vec<ChatRequest>>,
}

impl ScriptedTransport {
    pub fn new(replies: Vec<String>) -> ScriptedTransport {
        ScriptedTransport {
            replies: Mutex::new(replies.into()),
            requests: Mutex::new(Vec::new()),
        }
    }

    pub fn requests_seen(&self) -> Vec<ChatRequest> {
        self.requests.lock().expect("scripted transport lock").clone()
    }
}

impl Transport for ScriptedTransport {
    fn send(&self, request: &ChatRequest) -> Result<ChatReply, TransportError> {
        self.requests.lock().expect("scripted transport lock").push(request.clone());
        self.replies
            .lock()
            .expect("scripted transport lock")
            .pop_front()
            .map(|text| ChatReply { text })
            .ok_or_else(|| TransportError::BadReply("script ran out of replies".to_string()))
    }
}

/// Fails the first `failures` sends with a transient error, then delegates;
/// for exercising retry behaviour.
pub struct FlakyTransport {
    inner: SharedTransport,
    failures_left: Mutex<u32>,
}

impl FlakyTransport {
    pub fn new(inner: SharedTransport, failures: u32) -> FlakyTransport {
        FlakyTransport { inner, failures_left: Mutex::new(failures) }
    }
}

impl Transport for FlakyTransport {
    fn send(&self, request: &ChatRequest) -> Result<ChatReply, TransportError> {
        {
            let mut left = self.failures_left.lock().expect("flaky transport lock");
            if *left > 0 {
                *left -= 1;
                return Err(TransportError::Http { status: 503 });
            }
        }
        self.inner.send(request)
    }
}

/// Settings for the live OpenAI-compatible chat endpoint, read from
/// `PLANMEM_ENDPOINT`, `PLANMEM_API_KEY`, `PLANMEM_MODEL`,
/// `PLANMEM_TIMEOUT_SECS`, and `PLANMEM_RETRIES`.
#[derive(Debug, Clone)]
pub struct LiveSettings {
    pub endpoint: String,
    pub api_key: Option<String>,
    pub model: String,
    pub timeout: Duration,
    pub retries: u32,
}

impl LiveSettings {
    pub fn from_env() -> Result<LiveSettings, TransportError> {
        let endpoint = std::env::var("PLANMEM_ENDPOINT").map_err(|_| {
            TransportError::Network(
                "PLANMEM_ENDPOINT is not set; live runs need a chat completions URL".to_string(),
            )
        })?;
        let timeout = std::env::var("PLANMEM_TIMEOUT_SECS")
            .ok()
            .and_then(|s| s.parse::<u64>().ok())
            .unwrap_or(60);
        let retries = std::env::var("PLANMEM_RETRIES")
            .ok()
            .and_then(|s| s.parse::<u32>().ok())
            .unwrap_or(2);
        Ok(LiveSettings {
            endpoint,
            api_key: std::env::var("PLANMEM_API_KEY").ok(),
            model: std::env::var("PLANMEM_MODEL").unwrap_or_else(|_| "default".to_string()),
            timeout: Duration::from_secs(timeout),
            retries,
        })
    }
}

/// Plain HTTP client for an OpenAI-compatible `chat/completions` endpoint.
/// Compose with [`Retry`] for resilience.
pub struct LiveTransport {
    settings: LiveSettings,
}

impl LiveTransport {
    pub fn new(settings: LiveSettings) -> LiveTransport {
        LiveTransport { settings }
    }
}

impl Transport for LiveTransport {
    fn send(&self, request: &ChatRequest) -> Result<ChatReply, TransportError> {
        let body = serde_json::json!({
            "model": request.model,
            "temperature": request.temperature,
            "messages": request.messages,
            "max_tokens": request.max_tokens,
        });
        let mut builder = ureq::post(&self.settings.endpoint)
            .config()
            .timeout_global(Some(self.settings.timeout))
            .build();
        if let Some(key) = &self.settings.api_key {
            builder = builder.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = builder.send_json(&body).map_err(|err| match err {
            ureq::Error::StatusCode(status) => TransportError::Http { status },
            ureq::Error::Timeout(_) => TransportError::Timeout,
            other => TransportError::Network(other.to_string()),
        })?;
        let value: serde_json::Value = response
            .body_mut()
            .read_json()
            .map_err(|e| TransportError::BadReply(e.to_string()))?;
        let text = value
            .pointer("/choices/0/message/content")
            .and_then(|v| v.as_str())
            .ok_or_else(|| {
                TransportError::BadReply("reply has no choices[0].message.content".to_string())
            })?;
        Ok(ChatReply { text: text.to_string() })
    }
}
