//! Scoring of parsed model outputs against gold calls.

mod analysis;
mod levenshtein;
mod report;
mod scoring;

pub use analysis::{rank_analysis, AnalysisError, RankAnalysis};
pub use levenshtein::{levenshtein, normalized_levenshtein};
pub use report::{aggregate, EvalReport, MetricMeans, OVERALL};
pub use scoring::{
    score_format, score_instance, score_param_names, score_param_values, score_tool_selection,
    InstanceScore,
};
