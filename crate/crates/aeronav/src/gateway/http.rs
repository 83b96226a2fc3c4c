use std::sync::Arc;
use std::time::Duration;

use serde_json::{json, Value};

use super::{estimate_tokens, ChatBackend, Completion, GatewayError, GatewayRequest};

pub const ENV_API_BASE: &str = "AERONAV_API_BASE";
pub const ENV_API_KEY: &str = "AERONAV_API_KEY";
pub const ENV_MODEL: &str = "AERONAV_MODEL";
pub const DEFAULT_API_BASE: &str = "https://api.openai.com/v1";

#[derive(Debug, Clone, PartialEq)]
pub struct TransportResponse {
    pub status: u16,
    pub body: String,
}

/// Sends one JSON POST. Errors are connection-level failures only; every
/// HTTP status comes back as a response.
pub trait Transport: Send + Sync {
    fn post_json(
        &self,
        url: &str,
        headers: &[(String, String)],
        body: &str,
        timeout: Duration,
    ) -> Result<TransportResponse, String>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct UreqTransport;

impl Transport for UreqTransport {
    fn post_json(
        &self,
        url: &str,
        headers: &[(String, String)],
        body: &str,
        timeout: Duration,
    ) -> Result<TransportResponse, String> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let mut req = agent.post(url).content_type("application/json");
        for (k, v) in headers {
            req = req.header(k.as_str(), v.as_str());
        }
        let mut resp = req.send(body).map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().map_err(|e| e.to_string())?;
        Ok(TransportResponse { status, body })
    }
}

/// Exponential backoff: attempt `k` (1-based) waits
/// `base * factor^(k-1) * (1 + jitter * u)` with `u` uniform in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub factor: f64,
    pub jitter: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 5,
            base_delay: Duration::from_secs(1),
            factor: 2.0,
            jitter: 0.2,
        }
    }
}

impl RetryPolicy {
    pub fn delay(&self, attempt: u32, u: f64) -> Duration {
        let exp = self.factor.powi(attempt.saturating_sub(1) as i32);
        self.base_delay.mul_f64(exp * (1.0 + self.jitter * u))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HttpConfig {
    pub base_url: String,
    pub api_key: String,
    pub model: String,
    pub timeout: Duration,
    pub retry: RetryPolicy,
}

impl HttpConfig {
    /// Reads the endpoint, key and model from the environment.
    pub fn from_env() -> Result<Self, GatewayError> {
        let api_key = std::env::var(ENV_API_KEY)
            .map_err(|_| GatewayError::NotConfigured(format!("{ENV_API_KEY} is not set")))?;
        Ok(Self {
            base_url: std::env::var(ENV_API_BASE).unwrap_or_else(|_| DEFAULT_API_BASE.to_string()),
            api_key,
            model: std::env::var(ENV_MODEL).unwrap_or_default(),
            timeout: Duration::from_secs(120),
            retry: RetryPolicy::default(),
        })
    }

    pub fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

type Sleeper = Arc<dyn Fn(Duration) + Send + Sync>;

/// Chat-completions client over a pluggable [`Transport`].
pub struct HttpBackend {
    config: HttpConfig,
    transport: Arc<dyn Transport>,
    sleeper: Sleeper,
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Self {
        Self {
            config,
            transport: Arc::new(UreqTransport),
            sleeper: Arc::new(std::thread::sleep),
        }
    }

    pub fn with_transport(mut self, transport: Arc<dyn Transport>) -> Self {
        self.transport = transport;
        self
    }

    /// Replaces the backoff sleep, e.g. with a recorder in tests.
    pub fn with_sleeper(mut self, sleeper: impl Fn(Duration) + Send + Sync + 'static) -> Self {
        self.sleeper = Arc::new(sleeper);
        self
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }

    fn body(&self, req: &GatewayRequest) -> String {
        let model = if req.model.is_empty() { &self.config.model } else { &req.model };
        json!({
            "model": model,
            "messages": req.messages,
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        })
        .to_string()
    }

    fn attempt(&self, req: &GatewayRequest, body: &str) -> Result<Completion, GatewayError> {
        let headers = vec![("Authorization".to_string(), format!("Bearer {}", self.config.api_key))];
        let resp = self
            .transport
            .post_json(&self.config.endpoint(), &headers, body, self.config.timeout)
            .map_err(GatewayError::Transport)?;
        match resp.status {
            200..=299 => parse_completion(&resp.body, req),
            401 | 403 => Err(GatewayError::Auth {
                status: resp.status,
                body: resp.body,
            }),
            429 => Err(GatewayError::RateLimited),
            500..=599 => Err(GatewayError::Server {
                status: resp.status,
                body: resp.body,
            }),
            status => Err(GatewayError::Rejected { status, body: resp.body }),
        }
    }
}

fn parse_completion(body: &str, req: &GatewayRequest) -> Result<Completion, GatewayError> {
    let v: Value = serde_json::from_str(body).map_err(|e| GatewayError::BadResponse(e.to_string()))?;
    let text = v
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| GatewayError::BadResponse("missing choices[0].message.content".into()))?
        .to_string();
    let usage = |field: &str| v.pointer(&format!("/usage/{field}")).and_then(Value::as_u64);
    Ok(Completion {
        input_tokens: usage("prompt_tokens").unwrap_or_else(|| estimate_tokens(&req.prompt_text())),
        output_tokens: usage("completion_tokens").unwrap_or_else(|| estimate_tokens(&text)),
        text,
    })
}

impl ChatBackend for HttpBackend {
    fn complete(&self, req: &GatewayRequest) -> Result<Completion, GatewayError> {
        let body = self.body(req);
        let policy = self.config.retry;
        let mut attempt = 1;
        loop {
            match self.attempt(req, &body) {
                Ok(c) => return Ok(c),
                Err(e) if !e.is_retryable() => return Err(e),
                Err(e) if attempt >= policy.max_attempts => {
                    return Err(GatewayError::Exhausted {
                        attempts: attempt,
                        last: Box::new(e),
                    })
                }
                Err(_) => {
                    (self.sleeper)(policy.delay(attempt, rand::random::<f64>()));
                    attempt += 1;
                }
            }
        }
    }
}
