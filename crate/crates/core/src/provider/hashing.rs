use std::sync::atomic::{AtomicUsize, Ordering};

use super::{EmbeddingVector, Embedder, ProviderError};

pub const HASH_EMBEDDING_DIM: usize = 256;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Offline embedder: lower-cased character 3-grams hashed (FNV-1a, 64 bit)
/// into `dim` buckets, then L2-normalized. Texts shorter than three
/// characters contribute one gram made of the whole text.
#[derive(Debug)]
pub struct HashEmbedder {
    dim: usize,
    calls: AtomicUsize,
}

impl HashEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self {
            dim,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

impl Default for HashEmbedder {
    fn default() -> Self {
        Self::new(HASH_EMBEDDING_DIM)
    }
}

impl Embedder for HashEmbedder {
    fn backend_id(&self) -> String {
        format!("hash3-{}", self.dim)
    }

    fn model_id(&self) -> String {
        "char-trigram-fnv1a".to_string()
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, ProviderError> {
        if text.trim().is_empty() {
            return Err(ProviderError::EmptyInput);
        }
        self.calls.fetch_add(1, Ordering::Relaxed);
        let chars: Vec<char> = text.to_lowercase().chars().collect();
        let mut buckets = vec![0.0f64; self.dim];
        let mut gram = String::new();
        let mut add = |g: &[char]| {
            gram.clear();
            gram.extend(g);
            buckets[(fnv1a(gram.as_bytes()) % self.dim as u64) as usize] += 1.0;
        };
        if chars.len() < 3 {
            add(&chars);
        } else {
            chars.windows(3).for_each(add);
        }
        let norm = buckets.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut buckets {
            *v /= norm;
        }
        Ok(EmbeddingVector::new(buckets))
    }

    fn request_count(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}
