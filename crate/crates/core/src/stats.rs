//! Corpus size and length statistics.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::instance::TrainingInstance;
use crate::textio::{render_gold, render_prompt};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    /// Distinct tool names across all toolsets, excluding `generate_response`.
    pub tool_count: usize,
    pub instance_count: usize,
    /// Mean whitespace-separated word count of the rendered prompt.
    pub mean_input_words: f64,
    /// Mean whitespace-separated word count of the rendered gold answer.
    pub mean_output_words: f64,
}

fn words(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Statistics over `corpus`; all zeros for an empty corpus. Word totals are
/// integer sums, so the result does not depend on instance order.
pub fn corpus_stats(corpus: &[TrainingInstance]) -> CorpusStats {
    let tools: BTreeSet<&str> = corpus
        .iter()
        .flat_map(|i| i.toolset.iter())
        .filter(|t| !t.is_sentinel())
        .map(|t| crate::tool::normalize_name(&t.name))
        .collect();
    let (input, output) = corpus.iter().fold((0usize, 0usize), |(i, o), inst| {
        (i + words(&render_prompt(inst)), o + words(&render_gold(inst)))
    });
    let mean = |total: usize| {
        if corpus.is_empty() {
            0.0
        } else {
            total as f64 / corpus.len() as f64
        }
    };
    CorpusStats {
        tool_count: tools.len(),
        instance_count: corpus.len(),
        mean_input_words: mean(input),
        mean_output_words: mean(output),
    }
}
