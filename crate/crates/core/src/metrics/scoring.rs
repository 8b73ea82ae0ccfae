use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::instance::{RankedOutput, Scenario, TrainingInstance};
use crate::metrics::normalized_levenshtein;
use crate::tool::{normalize_name, ToolCall};

/// Scores for one prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceScore {
    pub instance_id: String,
    pub scenario: Scenario,
    pub tool_selection: f64,
    pub param_name: f64,
    pub param_value: f64,
    pub format_ok: f64,
}

pub fn score_format(pred: &RankedOutput) -> f64 {
    if pred.parse_ok {
        1.0
    } else {
        0.0
    }
}

pub fn score_tool_selection(pred: &RankedOutput, gold: &ToolCall) -> f64 {
    if pred.parse_ok && same_tool(&pred.invocation, gold) {
        1.0
    } else {
        0.0
    }
}

/// F1 between predicted and gold argument-key sets, gated on the tool name.
pub fn score_param_names(pred: &ToolCall, gold: &ToolCall) -> f64 {
    if !same_tool(pred, gold) {
        return 0.0;
    }
    let p: HashSet<&str> = pred.arguments.keys().map(|k| normalize_name(k)).collect();
    let g: HashSet<&str> = gold.arguments.keys().map(|k| normalize_name(k)).collect();
    if p.is_empty() && g.is_empty() {
        return 1.0;
    }
    let hits = p.intersection(&g).count() as f64;
    if hits == 0.0 {
        return 0.0;
    }
    let precision = hits / p.len() as f64;
    let recall = hits / g.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Mean over gold keys of the normalized Levenshtein similarity between the
/// predicted and gold values; a gold key the prediction omits scores 0.
pub fn score_param_values(pred: &ToolCall, gold: &ToolCall) -> f64 {
    if !same_tool(pred, gold) {
        return 0.0;
    }
    if gold.arguments.is_empty() {
        return if pred.arguments.is_empty() { 1.0 } else { 0.0 };
    }
    let total: f64 = gold
        .arguments
        .iter()
        .map(|(key, gold_value)| {
            pred.arguments
                .iter()
                .find(|(k, _)| normalize_name(k) == normalize_name(key))
                .map_or(0.0, |(_, v)| normalized_levenshtein(v, gold_value))
        })
        .sum();
    total / gold.arguments.len() as f64
}

pub fn score_instance(instance: &TrainingInstance, pred: &RankedOutput) -> InstanceScore {
    let format_ok = score_format(pred);
    let (param_name, param_value) = if pred.parse_ok {
        (
            score_param_names(&pred.invocation, &instance.gold_call),
            score_param_values(&pred.invocation, &instance.gold_call),
        )
    } else {
        (0.0, 0.0)
    };
    InstanceScore {
        instance_id: instance.id.clone(),
        scenario: instance.scenario,
        tool_selection: score_tool_selection(pred, &instance.gold_call),
        param_name,
        param_value,
        format_ok,
    }
}

fn same_tool(a: &ToolCall, b: &ToolCall) -> bool {
    normalize_name(&a.tool_name) == normalize_name(&b.tool_name)
}
