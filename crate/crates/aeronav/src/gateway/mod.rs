//! Chat-completions gateway shared by every model-backed policy.
//!
//! A [`Gateway`] wraps a [`ChatBackend`] with usage accounting, an in-flight
//! cap and an optional fixture store. Fixtures are keyed by a SHA-256 over
//! the model id, the request tag and the messages with whitespace runs
//! collapsed, and live one JSON file per key.

mod http;
mod ledger;

pub use http::{
    HttpBackend, HttpConfig, RetryPolicy, Transport, TransportResponse, UreqTransport, DEFAULT_API_BASE, ENV_API_BASE,
    ENV_API_KEY, ENV_MODEL,
};
pub use ledger::{LedgerSnapshot, TokenCounts, UsageLedger};

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Condvar, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ContentPart {
    Text { text: String },
    ImageUrl { image_url: ImageUrl },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageUrl {
    pub url: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: Vec<ContentPart>,
}

impl Message {
    pub fn text(role: Role, text: impl Into<String>) -> Self {
        Self {
            role,
            content: vec![ContentPart::Text { text: text.into() }],
        }
    }

    pub fn system(text: impl Into<String>) -> Self {
        Self::text(Role::System, text)
    }

    pub fn user(text: impl Into<String>) -> Self {
        Self::text(Role::User, text)
    }

    /// A data-URL image part, for backends that accept images.
    pub fn with_image(mut self, media_type: &str, base64: &str) -> Self {
        self.content.push(ContentPart::ImageUrl {
            image_url: ImageUrl {
                url: format!("data:{media_type};base64,{base64}"),
            },
        });
        self
    }

    /// Concatenated text parts.
    pub fn joined_text(&self) -> String {
        self.content
            .iter()
            .filter_map(|p| match p {
                ContentPart::Text { text } => Some(text.as_str()),
                ContentPart::ImageUrl { .. } => None,
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GatewayRequest {
    pub model: String,
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Which prompt produced the request, e.g. `Q_loc` or `plain`.
    pub tag: String,
}

impl GatewayRequest {
    pub fn new(tag: impl Into<String>, messages: Vec<Message>) -> Self {
        Self {
            model: String::new(),
            messages,
            temperature: 0.0,
            max_tokens: 512,
            tag: tag.into(),
        }
    }

    /// Every text part of every message, joined.
    pub fn prompt_text(&self) -> String {
        self.messages.iter().map(Message::joined_text).collect::<Vec<_>>().join("\n")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GatewayError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("authentication rejected (HTTP {status}): {body}")]
    Auth { status: u16, body: String },
    #[error("rate limited (HTTP 429)")]
    RateLimited,
    #[error("server error (HTTP {status}): {body}")]
    Server { status: u16, body: String },
    #[error("request rejected (HTTP {status}): {body}")]
    Rejected { status: u16, body: String },
    #[error("gave up after {attempts} attempts; last error: {last}")]
    Exhausted { attempts: u32, last: Box<GatewayError> },
    #[error("malformed response: {0}")]
    BadResponse(String),
    #[error("no fixture for `{tag}` request (key {key})")]
    FixtureMiss { tag: String, key: String },
    #[error("fixture store: {0}")]
    Fixture(String),
    #[error("gateway is not configured: {0}")]
    NotConfigured(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

impl GatewayError {
    /// Errors worth another attempt.
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            GatewayError::Transport(_) | GatewayError::RateLimited | GatewayError::Server { .. }
        )
    }
}

pub trait ChatBackend: Send + Sync {
    fn complete(&self, req: &GatewayRequest) -> Result<Completion, GatewayError>;
}

/// Rough token estimate for backends that do not report usage.
pub fn estimate_tokens(text: &str) -> u64 {
    (text.chars().count() as u64).div_ceil(4)
}

type Script = dyn Fn(&GatewayRequest) -> Result<String, GatewayError> + Send + Sync;

/// A local backend driven by a closure over the request.
pub struct ScriptedBackend {
    script: Box<Script>,
}

impl ScriptedBackend {
    pub fn new(script: impl Fn(&GatewayRequest) -> String + Send + Sync + 'static) -> Self {
        Self {
            script: Box::new(move |r| Ok(script(r))),
        }
    }

    pub fn fallible(script: impl Fn(&GatewayRequest) -> Result<String, GatewayError> + Send + Sync + 'static) -> Self {
        Self {
            script: Box::new(script),
        }
    }

    /// Answers requests in order from a fixed list, then fails.
    pub fn sequence(answers: Vec<String>) -> Self {
        let queue = Mutex::new(answers.into_iter());
        Self::fallible(move |r| {
            queue
                .lock()
                .unwrap()
                .next()
                .ok_or_else(|| GatewayError::Transport(format!("script exhausted at `{}`", r.tag)))
        })
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, req: &GatewayRequest) -> Result<Completion, GatewayError> {
        let text = (self.script)(req)?;
        Ok(Completion {
            input_tokens: estimate_tokens(&req.prompt_text()),
            output_tokens: estimate_tokens(&text),
            text,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GatewayMode {
    /// Backend only.
    Live,
    /// Backend, persisting every exchange as a fixture.
    Record,
    /// Fixture when present, backend otherwise.
    Replay,
    /// Fixture or [`GatewayError::FixtureMiss`]; the backend is never used.
    StrictReplay,
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Serialize)]
struct KeyMaterial<'a> {
    model: &'a str,
    tag: &'a str,
    messages: Vec<Message>,
}

fn normalized_messages(messages: &[Message]) -> Vec<Message> {
    messages
        .iter()
        .map(|m| Message {
            role: m.role,
            content: m
                .content
                .iter()
                .map(|p| match p {
                    ContentPart::Text { text } => ContentPart::Text {
                        text: collapse_whitespace(text),
                    },
                    other => other.clone(),
                })
                .collect(),
        })
        .collect()
}

/// Stable fixture key for a request. Temperature and token limits are not
/// part of the key.
pub fn fixture_key(req: &GatewayRequest) -> String {
    let material = KeyMaterial {
        model: &req.model,
        tag: &req.tag,
        messages: normalized_messages(&req.messages),
    };
    let bytes = serde_json::to_vec(&material).expect("key material serializes");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixture {
    pub key: String,
    pub model: String,
    pub tag: String,
    pub messages: Vec<Message>,
    pub response: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
}

/// One JSON file per fixture key under a directory.
#[derive(Debug, Clone)]
pub struct FixtureStore {
    dir: PathBuf,
}

impl FixtureStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Result<Option<Fixture>, GatewayError> {
        let path = self.path(key);
        match fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text)
                .map(Some)
                .map_err(|e| GatewayError::Fixture(format!("{}: {e}", path.display()))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(GatewayError::Fixture(format!("{}: {e}", path.display()))),
        }
    }

    pub fn put(&self, fixture: &Fixture) -> Result<(), GatewayError> {
        crate::store::write_json(&self.path(&fixture.key), fixture).map_err(|e| GatewayError::Fixture(e.to_string()))
    }

    pub fn len(&self) -> usize {
        fs::read_dir(&self.dir)
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

/// Counting semaphore bounding concurrent backend calls.
struct InFlight {
    cap: usize,
    used: Mutex<usize>,
    freed: Condvar,
}

impl InFlight {
    fn acquire(&self) -> InFlightGuard<'_> {
        let mut used = self.used.lock().unwrap();
        while *used >= self.cap {
            used = self.freed.wait(used).unwrap();
        }
        *used += 1;
        InFlightGuard(self)
    }
}

struct InFlightGuard<'a>(&'a InFlight);

impl Drop for InFlightGuard<'_> {
    fn drop(&mut self) {
        *self.0.used.lock().unwrap() -= 1;
        self.0.freed.notify_one();
    }
}

pub struct Gateway {
    mode: GatewayMode,
    model: String,
    backend: Option<Arc<dyn ChatBackend>>,
    fixtures: Option<FixtureStore>,
    ledger: UsageLedger,
    in_flight: InFlight,
    history: Mutex<Vec<String>>,
}

/// Shared handle; clones talk to the same backend and ledger.
pub type GatewayHandle = Arc<Gateway>;

pub const DEFAULT_IN_FLIGHT: usize = 4;

impl Gateway {
    /// A gateway that calls `backend` directly.
    pub fn live(model: impl Into<String>, backend: Arc<dyn ChatBackend>) -> Self {
        Self::build(GatewayMode::Live, model.into(), Some(backend), None)
    }

    pub fn record(model: impl Into<String>, backend: Arc<dyn ChatBackend>, dir: impl Into<PathBuf>) -> Self {
        Self::build(GatewayMode::Record, model.into(), Some(backend), Some(FixtureStore::new(dir)))
    }

    /// Serves fixtures, falling back to `backend` on a miss when one is given.
    pub fn replay(model: impl Into<String>, backend: Option<Arc<dyn ChatBackend>>, dir: impl Into<PathBuf>) -> Self {
        Self::build(GatewayMode::Replay, model.into(), backend, Some(FixtureStore::new(dir)))
    }

    pub fn strict_replay(model: impl Into<String>, dir: impl Into<PathBuf>) -> Self {
        Self::build(GatewayMode::StrictReplay, model.into(), None, Some(FixtureStore::new(dir)))
    }

    fn build(
        mode: GatewayMode,
        model: String,
        backend: Option<Arc<dyn ChatBackend>>,
        fixtures: Option<FixtureStore>,
    ) -> Self {
        Self {
            mode,
            model,
            backend,
            fixtures,
            ledger: UsageLedger::default(),
            in_flight: InFlight {
                cap: DEFAULT_IN_FLIGHT,
                used: Mutex::new(0),
                freed: Condvar::new(),
            },
            history: Mutex::new(Vec::new()),
        }
    }

    pub fn with_in_flight_cap(mut self, cap: usize) -> Self {
        self.in_flight.cap = cap.max(1);
        self
    }

    pub fn into_handle(self) -> GatewayHandle {
        Arc::new(self)
    }

    pub fn mode(&self) -> GatewayMode {
        self.mode
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    pub fn ledger(&self) -> &UsageLedger {
        &self.ledger
    }

    /// Tags of every successful call, in completion order.
    pub fn call_tags(&self) -> Vec<String> {
        self.history.lock().unwrap().clone()
    }

    /// Fills in the model id when the caller left it empty.
    fn prepare(&self, req: &GatewayRequest) -> Result<GatewayRequest, GatewayError> {
        if req.messages.is_empty() {
            return Err(GatewayError::InvalidRequest("at least one message is required".into()));
        }
        let mut req = req.clone();
        if req.model.is_empty() {
            req.model = self.model.clone();
        }
        Ok(req)
    }

    pub fn complete(&self, req: &GatewayRequest) -> Result<String, GatewayError> {
        self.complete_full(req).map(|c| c.text)
    }

    pub fn complete_full(&self, req: &GatewayRequest) -> Result<Completion, GatewayError> {
        let req = self.prepare(req)?;
        let started = Instant::now();
        let key = fixture_key(&req);
        let completion = match self.mode {
            GatewayMode::Live => self.call_backend(&req)?,
            GatewayMode::Record => {
                let c = self.call_backend(&req)?;
                self.store()?.put(&Fixture {
                    key: key.clone(),
                    model: req.model.clone(),
                    tag: req.tag.clone(),
                    messages: req.messages.clone(),
                    response: c.text.clone(),
                    input_tokens: c.input_tokens,
                    output_tokens: c.output_tokens,
                })?;
                c
            }
            GatewayMode::Replay | GatewayMode::StrictReplay => match self.store()?.get(&key)? {
                Some(f) => Completion {
                    text: f.response,
                    input_tokens: f.input_tokens,
                    output_tokens: f.output_tokens,
                },
                None if self.mode == GatewayMode::Replay && self.backend.is_some() => self.call_backend(&req)?,
                None => {
                    return Err(GatewayError::FixtureMiss {
                        tag: req.tag.clone(),
                        key,
                    })
                }
            },
        };
        self.ledger.record(&req.model, &req.tag, &completion, started.elapsed());
        self.history.lock().unwrap().push(req.tag.clone());
        Ok(completion)
    }

    fn store(&self) -> Result<&FixtureStore, GatewayError> {
        self.fixtures
            .as_ref()
            .ok_or_else(|| GatewayError::NotConfigured("no fixture directory".into()))
    }

    fn call_backend(&self, req: &GatewayRequest) -> Result<Completion, GatewayError> {
        let backend = self
            .backend
            .as_ref()
            .ok_or_else(|| GatewayError::NotConfigured("no backend".into()))?;
        let _slot = self.in_flight.acquire();
        backend.complete(req)
    }
}
