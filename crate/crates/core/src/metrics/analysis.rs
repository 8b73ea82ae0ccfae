use serde::{Deserialize, Serialize};

use crate::instance::{RankedOutput, TrainingInstance};
use crate::tool::{normalize_name, SENTINEL_TOOL};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{outputs} outputs for {instances} instances")]
pub struct AnalysisError {
    pub outputs: usize,
    pub instances: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankAnalysis {
    /// Percent of outputs whose top-ranked tool is the invoked tool.
    pub consistency: f64,
    /// Percent of (tool, `generate_response`) pairs placed on the correct side.
    pub ordering_accuracy: f64,
    pub outputs: usize,
    pub pairs: usize,
}

/// Rank-consistency statistics over aligned outputs and instances.
///
/// A tool is useful when the instance's rank label places it before
/// `generate_response`. Every non-sentinel toolset member forms one pair with
/// the sentinel; the pair is correct when the prediction ranks a useful tool
/// before the sentinel or any other tool after it. Tools missing from the
/// prediction, and unparsed predictions, count as wrong.
pub fn rank_analysis(
    outputs: &[RankedOutput],
    instances: &[TrainingInstance],
) -> Result<RankAnalysis, AnalysisError> {
    if outputs.len() != instances.len() {
        return Err(AnalysisError {
            outputs: outputs.len(),
            instances: instances.len(),
        });
    }
    let mut consistent = 0usize;
    let mut correct_pairs = 0usize;
    let mut pairs = 0usize;
    for (out, inst) in outputs.iter().zip(instances) {
        if out.parse_ok
            && out
                .ranking
                .first()
                .is_some_and(|top| normalize_name(top) == normalize_name(&out.invocation.tool_name))
        {
            consistent += 1;
        }
        let position = |name: &str| {
            out.ranking
                .iter()
                .position(|r| normalize_name(r) == normalize_name(name))
        };
        let sentinel_at = position(SENTINEL_TOOL);
        let useful = inst.useful_tools();
        for tool in inst.toolset.iter().filter(|t| !t.is_sentinel()) {
            pairs += 1;
            if !out.parse_ok {
                continue;
            }
            let (Some(at), Some(sentinel_at)) = (position(&tool.name), sentinel_at) else {
                continue;
            };
            let is_useful = useful.iter().any(|u| normalize_name(u) == normalize_name(&tool.name));
            if is_useful == (at < sentinel_at) {
                correct_pairs += 1;
            }
        }
    }
    let pct = |hits: usize, total: usize| {
        if total == 0 {
            0.0
        } else {
            hits as f64 / total as f64 * 100.0
        }
    };
    Ok(RankAnalysis {
        consistency: pct(consistent, outputs.len()),
        ordering_accuracy: pct(correct_pairs, pairs),
        outputs: outputs.len(),
        pairs,
    })
}
