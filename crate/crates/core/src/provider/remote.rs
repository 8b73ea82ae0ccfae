//! HTTP JSON backends: an OpenAI-style chat-completion endpoint for
//! generation and an embeddings endpoint for vectors.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use super::{EmbeddingVector, Embedder, GenerationRequest, ProviderError, TextGenerator};

pub const API_KEY_ENV: &str = "GENTOOL_API_KEY";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    /// Total attempts, including the first.
    pub max_attempts: u32,
    /// Delay before the second attempt; doubles after each further failure.
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            base_delay: Duration::from_secs(1),
        }
    }
}

impl RetryPolicy {
    pub fn delay_before(&self, attempt: u32) -> Duration {
        // attempt is 1-based; no delay before the first.
        if attempt <= 1 {
            Duration::ZERO
        } else {
            self.base_delay * 2u32.saturating_pow(attempt - 2)
        }
    }
}

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub api_key: Option<String>,
    pub max_in_flight: usize,
    pub retry: RetryPolicy,
    pub timeout: Duration,
}

impl RemoteConfig {
    /// Endpoint plus the API key from `GENTOOL_API_KEY`, if set.
    pub fn from_env(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            api_key: std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()),
            max_in_flight: 4,
            retry: RetryPolicy::default(),
            timeout: Duration::from_secs(120),
        }
    }
}

/// Counting gate bounding concurrent requests.
#[derive(Debug)]
struct InFlight {
    limit: usize,
    active: Mutex<usize>,
    freed: Condvar,
}

impl InFlight {
    fn new(limit: usize) -> Self {
        Self {
            limit: limit.max(1),
            active: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> InFlightGuard<'_> {
        let mut active = self.active.lock().unwrap();
        while *active >= self.limit {
            active = self.freed.wait(active).unwrap();
        }
        *active += 1;
        InFlightGuard(self)
    }
}

struct InFlightGuard<'a>(&'a InFlight);

impl Drop for InFlightGuard<'_> {
    fn drop(&mut self) {
        *self.0.active.lock().unwrap() -= 1;
        self.0.freed.notify_one();
    }
}

enum Failure {
    Retryable(String),
    Fatal(String),
}

struct HttpJson {
    client: reqwest::blocking::Client,
    config: RemoteConfig,
    gate: InFlight,
    calls: AtomicUsize,
}

impl HttpJson {
    fn new(config: RemoteConfig) -> Result<Self, ProviderError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| ProviderError::Remote {
                attempts: 0,
                message: format!("cannot build HTTP client: {e}"),
            })?;
        Ok(Self {
            client,
            gate: InFlight::new(config.max_in_flight),
            config,
            calls: AtomicUsize::new(0),
        })
    }

    fn post_once(&self, body: &serde_json::Value) -> Result<serde_json::Value, Failure> {
        let _slot = self.gate.acquire();
        self.calls.fetch_add(1, Ordering::Relaxed);
        let mut req = self.client.post(&self.config.endpoint).json(body);
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| Failure::Retryable(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| Failure::Retryable(e.to_string()))?;
        if status.is_server_error() {
            return Err(Failure::Retryable(format!("HTTP {status}: {text}")));
        }
        if !status.is_success() {
            return Err(Failure::Fatal(format!("HTTP {status}: {text}")));
        }
        serde_json::from_str(&text).map_err(|e| Failure::Fatal(format!("malformed response body: {e}")))
    }

    fn post(&self, body: &serde_json::Value) -> Result<serde_json::Value, ProviderError> {
        let policy = self.config.retry;
        let mut attempt = 1;
        loop {
            match self.post_once(body) {
                Ok(v) => return Ok(v),
                Err(Failure::Fatal(message)) => {
                    return Err(ProviderError::Remote {
                        attempts: attempt,
                        message,
                    })
                }
                Err(Failure::Retryable(message)) => {
                    if attempt >= policy.max_attempts {
                        return Err(ProviderError::Remote {
                            attempts: attempt,
                            message,
                        });
                    }
                    attempt += 1;
                    tracing::warn!("retrying request (attempt {attempt}): {message}");
                    std::thread::sleep(policy.delay_before(attempt));
                }
            }
        }
    }
}

pub struct RemoteGenerator {
    http: HttpJson,
}

impl RemoteGenerator {
    pub fn new(config: RemoteConfig) -> Result<Self, ProviderError> {
        Ok(Self {
            http: HttpJson::new(config)?,
        })
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct ChatMessage {
    #[serde(default)]
    content: Option<String>,
}

impl TextGenerator for RemoteGenerator {
    fn backend_id(&self) -> String {
        format!("remote:{}", self.http.config.endpoint)
    }

    fn generate(&self, request: &GenerationRequest) -> Result<String, ProviderError> {
        request.validate()?;
        let body = json!({
            "model": request.model_id,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        });
        let value = self.http.post(&body)?;
        let parsed: ChatResponse = serde_json::from_value(value).map_err(|e| ProviderError::Remote {
            attempts: 1,
            message: format!("unexpected chat response shape: {e}"),
        })?;
        let choice = parsed.choices.into_iter().next().ok_or_else(|| ProviderError::Remote {
            attempts: 1,
            message: "chat response has no choices".into(),
        })?;
        if choice.finish_reason.as_deref() == Some("length") {
            return Err(ProviderError::Truncated);
        }
        Ok(choice.message.content.unwrap_or_default())
    }

    fn request_count(&self) -> usize {
        self.http.calls.load(Ordering::Relaxed)
    }
}

pub struct RemoteEmbedder {
    http: HttpJson,
    model_id: String,
}

impl RemoteEmbedder {
    pub fn new(config: RemoteConfig, model_id: impl Into<String>) -> Result<Self, ProviderError> {
        Ok(Self {
            http: HttpJson::new(config)?,
            model_id: model_id.into(),
        })
    }
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    embedding: Vec<f64>,
}

impl Embedder for RemoteEmbedder {
    fn backend_id(&self) -> String {
        format!("remote:{}", self.http.config.endpoint)
    }

    fn model_id(&self) -> String {
        self.model_id.clone()
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, ProviderError> {
        if text.trim().is_empty() {
            return Err(ProviderError::EmptyInput);
        }
        let value = self.http.post(&json!({"model": self.model_id, "input": text}))?;
        let parsed: EmbeddingResponse = serde_json::from_value(value).map_err(|e| ProviderError::Remote {
            attempts: 1,
            message: format!("unexpected embedding response shape: {e}"),
        })?;
        let v = EmbeddingVector::new(
            parsed
                .data
                .into_iter()
                .next()
                .ok_or_else(|| ProviderError::Remote {
                    attempts: 1,
                    message: "embedding response has no data".into(),
                })?
                .embedding,
        );
        if v.dim() == 0 || !v.is_finite() {
            return Err(ProviderError::Remote {
                attempts: 1,
                message: "embedding is empty or non-finite".into(),
            });
        }
        Ok(v)
    }

    fn request_count(&self) -> usize {
        self.http.calls.load(Ordering::Relaxed)
    }
}
