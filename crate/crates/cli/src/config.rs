use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use gentool_core::retrieval::{DEFAULT_K, DEFAULT_RELATEDNESS_THRESHOLD};
use gentool_core::scenarios::DEFAULT_SPLIT_RATIO;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Mock,
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingBackend {
    /// Character 3-gram feature hashing, computed locally.
    Hash,
    Remote,
}

/// Settings shared by all subcommands. Values come from the defaults, then
/// the config file, then command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub backend: Backend,
    pub embedding: Option<EmbeddingBackend>,
    pub generation_model: String,
    pub embedding_model: String,
    /// Chat-completion endpoint for the remote backend.
    pub endpoint: Option<String>,
    /// Embeddings endpoint for the remote embedding backend.
    pub embedding_endpoint: Option<String>,
    pub cache_dir: Option<PathBuf>,
    pub k: usize,
    pub split_ratio: f64,
    pub seed: u64,
    pub jobs: usize,
    pub max_in_flight: usize,
    pub out_dir: PathBuf,
    pub relatedness_threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            backend: Backend::Mock,
            embedding: None,
            generation_model: "gpt-4o".into(),
            embedding_model: "text-embedding-3-large".into(),
            endpoint: None,
            embedding_endpoint: None,
            cache_dir: None,
            k: DEFAULT_K,
            split_ratio: DEFAULT_SPLIT_RATIO,
            seed: 0,
            jobs: 4,
            max_in_flight: 4,
            out_dir: PathBuf::from("."),
            relatedness_threshold: DEFAULT_RELATEDNESS_THRESHOLD,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn embedding_backend(&self) -> EmbeddingBackend {
        self.embedding.unwrap_or(match self.backend {
            Backend::Mock => EmbeddingBackend::Hash,
            Backend::Remote => EmbeddingBackend::Remote,
        })
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.k == 0 {
            bail!("k must be at least 1");
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            bail!("split ratio must be strictly between 0 and 1, got {}", self.split_ratio);
        }
        if self.jobs == 0 || self.max_in_flight == 0 {
            bail!("jobs and max_in_flight must be at least 1");
        }
        if !self.relatedness_threshold.is_finite() {
            bail!("relatedness threshold must be finite");
        }
        if self.backend == Backend::Remote && self.endpoint.is_none() {
            bail!("the remote backend needs `endpoint` in the config file");
        }
        if self.embedding_backend() == EmbeddingBackend::Remote && self.embedding_endpoint.is_none() {
            bail!("remote embeddings need `embedding_endpoint` in the config file");
        }
        Ok(())
    }
}
