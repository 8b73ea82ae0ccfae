use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{EmbeddingVector, Embedder, GenerationRequest, ProviderError, TextGenerator};

const CACHE_FILE: &str = "responses.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CachePayload {
    Text(String),
    Vector(EmbeddingVector),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub payload: CachePayload,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
}

/// SHA-256 over the JSON encoding of the key parts.
pub fn cache_key(parts: &[&str]) -> String {
    let canonical = serde_json::to_string(parts).expect("strings serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

fn generation_key(backend: &str, req: &GenerationRequest) -> String {
    cache_key(&[
        "generate",
        backend,
        &req.model_id,
        &req.prompt,
        &format!("{:016x}", req.temperature.to_bits()),
        &req.max_tokens.to_string(),
        &req.variant.to_string(),
    ])
}

fn embedding_key(backend: &str, model: &str, text: &str) -> String {
    cache_key(&["embed", backend, model, text])
}

/// In-memory map of responses, optionally mirrored to an append-only file so
/// an interrupted run resumes without repeating requests.
#[derive(Debug, Default)]
pub struct ResponseCache {
    entries: Mutex<HashMap<String, CachePayload>>,
    file: Option<Mutex<File>>,
    path: Option<PathBuf>,
}

impl ResponseCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (or creates) `dir/responses.jsonl`. A torn final line left by an
    /// interrupted writer is ignored.
    pub fn open(dir: &Path) -> Result<Self, ProviderError> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(CACHE_FILE);
        let mut entries = HashMap::new();
        if path.exists() {
            for line in BufReader::new(File::open(&path)?).lines() {
                let line = line?;
                match serde_json::from_str::<CacheEntry>(&line) {
                    Ok(entry) => {
                        entries.insert(entry.key, entry.payload);
                    }
                    Err(err) => tracing::warn!("skipping unreadable cache line: {err}"),
                }
            }
        }
        let mut file = OpenOptions::new().create(true).append(true).open(&path)?;
        // Make sure a torn line does not swallow the next appended record.
        if file.metadata()?.len() > 0 {
            let last = std::fs::read(&path)?.last().copied();
            if last != Some(b'\n') {
                file.write_all(b"\n")?;
            }
        }
        Ok(Self {
            entries: Mutex::new(entries),
            file: Some(Mutex::new(file)),
            path: Some(path),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<CachePayload> {
        self.entries.lock().unwrap().get(key).cloned()
    }

    pub fn put(&self, key: String, payload: CachePayload) -> Result<(), ProviderError> {
        if let Some(file) = &self.file {
            let entry = CacheEntry {
                key: key.clone(),
                payload: payload.clone(),
                created_at: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
            };
            let mut line = serde_json::to_string(&entry).expect("cache entries serialize");
            line.push('\n');
            let mut f = file.lock().unwrap();
            f.write_all(line.as_bytes())?;
            f.flush()?;
        }
        self.entries.lock().unwrap().insert(key, payload);
        Ok(())
    }
}

pub struct CachedGenerator<G> {
    inner: G,
    cache: Arc<ResponseCache>,
}

impl<G: TextGenerator> CachedGenerator<G> {
    pub fn new(inner: G, cache: Arc<ResponseCache>) -> Self {
        Self { inner, cache }
    }

    pub fn inner(&self) -> &G {
        &self.inner
    }
}

impl<G: TextGenerator> TextGenerator for CachedGenerator<G> {
    fn backend_id(&self) -> String {
        self.inner.backend_id()
    }

    fn generate(&self, request: &GenerationRequest) -> Result<String, ProviderError> {
        request.validate()?;
        let key = generation_key(&self.inner.backend_id(), request);
        if let Some(CachePayload::Text(text)) = self.cache.get(&key) {
            return Ok(text);
        }
        let text = self.inner.generate(request)?;
        self.cache.put(key, CachePayload::Text(text.clone()))?;
        Ok(text)
    }

    fn request_count(&self) -> usize {
        self.inner.request_count()
    }
}

pub struct CachedEmbedder<E> {
    inner: E,
    cache: Arc<ResponseCache>,
}

impl<E: Embedder> CachedEmbedder<E> {
    pub fn new(inner: E, cache: Arc<ResponseCache>) -> Self {
        Self { inner, cache }
    }
}

impl<E: Embedder> Embedder for CachedEmbedder<E> {
    fn backend_id(&self) -> String {
        self.inner.backend_id()
    }

    fn model_id(&self) -> String {
        self.inner.model_id()
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, ProviderError> {
        let key = embedding_key(&self.inner.backend_id(), &self.inner.model_id(), text);
        if let Some(CachePayload::Vector(v)) = self.cache.get(&key) {
            return Ok(v);
        }
        let v = self.inner.embed(text)?;
        self.cache.put(key, CachePayload::Vector(v.clone()))?;
        Ok(v)
    }

    fn request_count(&self) -> usize {
        self.inner.request_count()
    }
}
