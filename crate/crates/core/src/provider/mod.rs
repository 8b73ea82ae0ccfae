//! Text generation and text embedding backends.
//!
//! Two capabilities sit behind small traits so the pipeline runs either
//! offline ([`MockGenerator`], [`HashEmbedder`]) or against an HTTP
//! chat-completion / embeddings service ([`RemoteGenerator`],
//! [`RemoteEmbedder`]). Either kind can be wrapped in a content-addressed
//! [`ResponseCache`] so repeated requests are answered locally.

mod cache;
mod hashing;
mod mock;
mod remote;

use serde::{Deserialize, Serialize};

pub use cache::{cache_key, CacheEntry, CachePayload, CachedEmbedder, CachedGenerator, ResponseCache};
pub use hashing::{HashEmbedder, HASH_EMBEDDING_DIM};
pub use mock::MockGenerator;
pub use remote::{RemoteConfig, RemoteEmbedder, RemoteGenerator, RetryPolicy, API_KEY_ENV};

/// Sampling temperature for weak-tool and query generation.
pub const GENERATION_TEMPERATURE: f64 = 0.7;
/// Sampling temperature for call annotation.
pub const ANNOTATION_TEMPERATURE: f64 = 0.0;

#[derive(Debug, thiserror::Error)]
pub enum ProviderError {
    #[error("remote backend failed after {attempts} attempt(s): {message}")]
    Remote { attempts: u32, message: String },
    #[error("response was truncated by the token limit")]
    Truncated,
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("cannot embed empty text")]
    EmptyInput,
    #[error("cosine is undefined for a zero vector")]
    DegenerateVector,
    #[error("vector dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("cache i/o: {0}")]
    Cache(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub prompt: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub model_id: String,
    /// Distinguishes deliberate re-samples of the same prompt (a second weak
    /// tool, a retry after a rejected answer). Part of the cache key.
    #[serde(default)]
    pub variant: u32,
}

impl GenerationRequest {
    pub fn new(prompt: impl Into<String>, model_id: impl Into<String>) -> Self {
        Self {
            prompt: prompt.into(),
            temperature: GENERATION_TEMPERATURE,
            max_tokens: 2048,
            model_id: model_id.into(),
            variant: 0,
        }
    }

    pub fn temperature(mut self, t: f64) -> Self {
        self.temperature = t;
        self
    }

    pub fn variant(mut self, v: u32) -> Self {
        self.variant = v;
        self
    }

    pub fn validate(&self) -> Result<(), ProviderError> {
        if self.prompt.trim().is_empty() {
            return Err(ProviderError::InvalidRequest("empty prompt".into()));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(ProviderError::InvalidRequest(format!(
                "temperature {} must be finite and non-negative",
                self.temperature
            )));
        }
        if self.max_tokens == 0 {
            return Err(ProviderError::InvalidRequest("max_tokens must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// `dot(a, b) / (|a| |b|)`, clamped to `[-1, 1]`.
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, ProviderError> {
    if a.dim() != b.dim() {
        return Err(ProviderError::DimensionMismatch(a.dim(), b.dim()));
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(ProviderError::DegenerateVector);
    }
    // Fold the products in index order so cosine(a, b) == cosine(b, a) exactly.
    let dot: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

pub trait TextGenerator: Send + Sync {
    /// Stable identifier of the backend and its configuration, used in cache keys.
    fn backend_id(&self) -> String;

    fn generate(&self, request: &GenerationRequest) -> Result<String, ProviderError>;

    /// Requests that reached this backend.
    fn request_count(&self) -> usize;
}

pub trait Embedder: Send + Sync {
    fn backend_id(&self) -> String;

    fn model_id(&self) -> String;

    fn embed(&self, text: &str) -> Result<EmbeddingVector, ProviderError>;

    fn request_count(&self) -> usize;
}

impl<T: TextGenerator + ?Sized> TextGenerator for std::sync::Arc<T> {
    fn backend_id(&self) -> String {
        (**self).backend_id()
    }
    fn generate(&self, request: &GenerationRequest) -> Result<String, ProviderError> {
        (**self).generate(request)
    }
    fn request_count(&self) -> usize {
        (**self).request_count()
    }
}

impl<T: Embedder + ?Sized> Embedder for std::sync::Arc<T> {
    fn backend_id(&self) -> String {
        (**self).backend_id()
    }
    fn model_id(&self) -> String {
        (**self).model_id()
    }
    fn embed(&self, text: &str) -> Result<EmbeddingVector, ProviderError> {
        (**self).embed(text)
    }
    fn request_count(&self) -> usize {
        (**self).request_count()
    }
}
