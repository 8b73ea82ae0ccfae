//! Embedding index over the tool corpus and toolset construction.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::provider::{cosine, Embedder, EmbeddingVector, ProviderError};
use crate::tool::{normalize_name, ToolSpec};

/// Default number of retrieved tools per toolset.
pub const DEFAULT_K: usize = 5;
/// Default cosine threshold for the related-example analysis.
pub const DEFAULT_RELATEDNESS_THRESHOLD: f64 = 0.5;

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("tool `{0}` appears more than once")]
    DuplicateName(String),
    #[error("`generate_response` is injected per toolset and cannot be indexed")]
    ReservedName,
    #[error("embedding for `{name}` has dimension {got}, index uses {expected}")]
    Dimension {
        name: String,
        got: usize,
        expected: usize,
    },
    #[error("embedding for `{name}` contains non-finite values")]
    NonFinite { name: String },
    #[error("embedding `{name}`: {source}")]
    Provider {
        name: String,
        #[source]
        source: ProviderError,
    },
    #[error("index file {path}: {message}")]
    File { path: String, message: String },
}

#[derive(Debug, thiserror::Error)]
pub enum RetrievalError {
    #[error("need {needed} distractors but only {available} tools survive the exclusions")]
    InsufficientCorpus { needed: usize, available: usize },
    #[error("{required} required tools exceed k = {k}")]
    TooManyRequired { required: usize, k: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("tool `{0}` is not in the index")]
    NotIndexed(String),
    #[error("required tool `{0}` is listed twice")]
    DuplicateRequired(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub tool: ToolSpec,
    pub vector: EmbeddingVector,
}

/// Immutable name-to-embedding index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolIndex {
    pub dimension: usize,
    /// Backend and model that produced the vectors.
    pub embedder: String,
    pub entries: BTreeMap<String, IndexEntry>,
}

/// Embeds every tool from its name, description, parameter descriptions and
/// return descriptions.
pub fn index_tools<E: Embedder>(tools: &[ToolSpec], embedder: &E) -> Result<ToolIndex, IndexError> {
    let mut seen = BTreeSet::new();
    for tool in tools {
        if tool.is_sentinel() {
            return Err(IndexError::ReservedName);
        }
        if !seen.insert(normalize_name(&tool.name)) {
            return Err(IndexError::DuplicateName(tool.name.clone()));
        }
    }
    let vectors: Vec<EmbeddingVector> = tools
        .par_iter()
        .map(|tool| {
            embedder
                .embed(&tool.embedding_text())
                .map_err(|source| IndexError::Provider {
                    name: tool.name.clone(),
                    source,
                })
        })
        .collect::<Result<_, _>>()?;
    let dimension = vectors.first().map_or(0, EmbeddingVector::dim);
    let mut entries = BTreeMap::new();
    for (tool, vector) in tools.iter().zip(vectors) {
        check_vector(&tool.name, &vector, dimension)?;
        entries.insert(
            normalize_name(&tool.name).to_string(),
            IndexEntry {
                tool: tool.clone(),
                vector,
            },
        );
    }
    Ok(ToolIndex {
        dimension,
        embedder: format!("{}/{}", embedder.backend_id(), embedder.model_id()),
        entries,
    })
}

fn check_vector(name: &str, vector: &EmbeddingVector, dimension: usize) -> Result<(), IndexError> {
    if vector.dim() != dimension {
        return Err(IndexError::Dimension {
            name: name.to_string(),
            got: vector.dim(),
            expected: dimension,
        });
    }
    if !vector.is_finite() {
        return Err(IndexError::NonFinite {
            name: name.to_string(),
        });
    }
    Ok(())
}

impl ToolIndex {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&IndexEntry> {
        self.entries.get(normalize_name(name))
    }

    pub fn vector(&self, name: &str) -> Result<&EmbeddingVector, RetrievalError> {
        self.get(name)
            .map(|e| &e.vector)
            .ok_or_else(|| RetrievalError::NotIndexed(name.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        let file_err = |message: String| IndexError::File {
            path: path.display().to_string(),
            message,
        };
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| file_err(e.to_string()))?;
        }
        let json = serde_json::to_string(self).map_err(|e| file_err(e.to_string()))?;
        std::fs::write(path, json).map_err(|e| file_err(e.to_string()))
    }

    /// Loads a sidecar file and re-checks the index invariants.
    pub fn load(path: &Path) -> Result<Self, IndexError> {
        let file_err = |message: String| IndexError::File {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| file_err(e.to_string()))?;
        let index: ToolIndex = serde_json::from_str(&text).map_err(|e| file_err(e.to_string()))?;
        for (name, entry) in &index.entries {
            if normalize_name(&entry.tool.name) != name {
                return Err(file_err(format!("entry `{name}` holds tool `{}`", entry.tool.name)));
            }
            check_vector(name, &entry.vector, index.dimension)?;
        }
        Ok(index)
    }

    /// Distractor candidates ordered by cosine to `anchor` (descending), ties
    /// broken by ascending name.
    pub fn ranked_neighbours(
        &self,
        anchor: &EmbeddingVector,
        skip: impl Fn(&str) -> bool,
    ) -> Result<Vec<(&str, f64)>, RetrievalError> {
        let mut scored = Vec::new();
        for (name, entry) in &self.entries {
            if skip(name) {
                continue;
            }
            scored.push((name.as_str(), cosine(anchor, &entry.vector)?));
        }
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Ok(scored)
    }
}

/// The required tools, then the `k - |required|` indexed tools most similar
/// to the first required tool, then `generate_response`.
pub fn build_toolset(
    required: &[ToolSpec],
    exclusions: &BTreeSet<String>,
    index: &ToolIndex,
    k: usize,
) -> Result<Vec<ToolSpec>, RetrievalError> {
    let anchor = required.first().ok_or(RetrievalError::InsufficientCorpus {
        needed: k,
        available: 0,
    })?;
    build_toolset_around(&anchor.name, required, exclusions, index, k)
}

/// Like [`build_toolset`], but similarity is measured against the indexed
/// tool `anchor`, which need not be among `required`. With no required tools
/// this yields a toolset of pure distractors around a tool the caller has
/// excluded.
pub fn build_toolset_around(
    anchor: &str,
    required: &[ToolSpec],
    exclusions: &BTreeSet<String>,
    index: &ToolIndex,
    k: usize,
) -> Result<Vec<ToolSpec>, RetrievalError> {
    if k == 0 {
        return Err(RetrievalError::ZeroK);
    }
    if required.len() > k {
        return Err(RetrievalError::TooManyRequired {
            required: required.len(),
            k,
        });
    }
    let mut required_names = BTreeSet::new();
    for tool in required {
        if !required_names.insert(normalize_name(&tool.name)) {
            return Err(RetrievalError::DuplicateRequired(tool.name.clone()));
        }
    }
    let anchor_vector = index.vector(anchor)?;
    let needed = k - required.len();
    let ranked = index.ranked_neighbours(anchor_vector, |name| {
        required_names.contains(name) || exclusions.contains(name)
    })?;
    if ranked.len() < needed {
        return Err(RetrievalError::InsufficientCorpus {
            needed,
            available: ranked.len(),
        });
    }
    let mut toolset: Vec<ToolSpec> = required.to_vec();
    toolset.extend(
        ranked
            .into_iter()
            .take(needed)
            .map(|(name, _)| index.entries[name].tool.clone()),
    );
    toolset.push(ToolSpec::sentinel());
    Ok(toolset)
}

/// Number of entries in `train_gold` whose cosine to `test_gold` exceeds
/// `threshold` (strictly).
pub fn related_example_count(
    train_gold: &[ToolSpec],
    test_gold: &ToolSpec,
    index: &ToolIndex,
    threshold: f64,
) -> Result<usize, RetrievalError> {
    let target = index.vector(&test_gold.name)?;
    let mut count = 0;
    for tool in train_gold {
        if cosine(index.vector(&tool.name)?, target)? > threshold {
            count += 1;
        }
    }
    Ok(count)
}
