//! Tool-learning corpus synthesis, scenario compilation, two-task rendering
//! and parsing, and scoring.

pub mod instance;
pub mod jsonl;
pub mod metrics;
pub mod prompts;
pub mod provider;
pub mod retrieval;
pub mod scenarios;
pub mod stats;
pub mod synthesis;
pub mod textio;
pub mod tool;

pub use instance::{
    CrossCall, PairType, QueryRole, QueryToolCluster, RankedOutput, Scenario, TrainingInstance,
};
pub use tool::{validate_tool, ParameterSpec, ReturnField, ToolCall, ToolSpec, SENTINEL_TOOL};
