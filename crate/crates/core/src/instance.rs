//! Clusters, training/test instances, and parsed model outputs.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::tool::{normalize_name, ToolCall, ToolSpec, SENTINEL_TOOL};

/// Which of the two cluster queries a cross call answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryRole {
    /// `q`, the seed query answered by the strong tool.
    Strong,
    /// `q'`, the query generated from the weak/strong tool pair.
    Weak,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossCall {
    pub query: QueryRole,
    pub tool_name: String,
    pub call: ToolCall,
}

/// The `{q, t, q', t'}` tuple binding a strong tool, its weak variant, and
/// their queries, together with every annotated call the scenario compiler
/// needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryToolCluster {
    pub id: String,
    #[serde(default)]
    pub domain: String,
    pub strong_query: String,
    pub strong_tool: ToolSpec,
    pub weak_query: String,
    pub weak_tool: ToolSpec,
    #[serde(default)]
    pub extra_queries: Vec<String>,
    #[serde(default)]
    pub extra_weak_tools: Vec<ToolSpec>,
    /// `q` on `t`.
    pub strong_call: ToolCall,
    /// `q` on `t'`.
    pub weak_call: ToolCall,
    #[serde(default)]
    pub cross_calls: Vec<CrossCall>,
}

impl QueryToolCluster {
    pub fn query(&self, role: QueryRole) -> &str {
        match role {
            QueryRole::Strong => &self.strong_query,
            QueryRole::Weak => &self.weak_query,
        }
    }

    /// Annotated call for `query` on the named tool, if the cluster carries one.
    pub fn call_for(&self, query: QueryRole, tool_name: &str) -> Option<&ToolCall> {
        let tool_name = normalize_name(tool_name);
        if query == QueryRole::Strong {
            if tool_name == normalize_name(&self.strong_tool.name) {
                return Some(&self.strong_call);
            }
            if tool_name == normalize_name(&self.weak_tool.name) {
                return Some(&self.weak_call);
            }
        }
        self.cross_calls
            .iter()
            .find(|c| c.query == query && normalize_name(&c.tool_name) == tool_name)
            .map(|c| &c.call)
    }

    /// All tools that belong to this cluster: strong, weak, then surplus weak.
    pub fn tools(&self) -> impl Iterator<Item = &ToolSpec> {
        [&self.strong_tool, &self.weak_tool]
            .into_iter()
            .chain(self.extra_weak_tools.iter())
    }

    pub fn tool_names(&self) -> HashSet<String> {
        self.tools().map(|t| normalize_name(&t.name).to_string()).collect()
    }

    /// Violations of the cluster invariants.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if normalize_name(&self.strong_tool.name) == normalize_name(&self.weak_tool.name) {
            out.push("strong and weak tool share a name".to_string());
        }
        if normalize_name(&self.strong_call.tool_name) != normalize_name(&self.strong_tool.name) {
            out.push("strong call does not target the strong tool".to_string());
        }
        if normalize_name(&self.weak_call.tool_name) != normalize_name(&self.weak_tool.name) {
            out.push("weak call does not target the weak tool".to_string());
        }
        let names = self.tool_names();
        for cross in &self.cross_calls {
            if !names.contains(normalize_name(&cross.tool_name))
                || normalize_name(&cross.call.tool_name) != normalize_name(&cross.tool_name)
            {
                out.push(format!(
                    "cross call references tool `{}` outside the cluster",
                    cross.tool_name
                ));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairType {
    ZeroToOne,
    WeakToStrong,
    TestOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "pure_train")]
    PureTrain,
    #[serde(rename = "seen_q_unseen_t")]
    SeenQueryUnseenTool,
    #[serde(rename = "seen_q_seen_t")]
    SeenQuerySeenTool,
    #[serde(rename = "unseen_q_unseen_t")]
    UnseenQueryUnseenTool,
    #[serde(rename = "unseen_q_seen_t")]
    UnseenQuerySeenTool,
}

impl Scenario {
    /// The four evaluation buckets, in reporting order.
    pub const TEST: [Scenario; 4] = [
        Scenario::SeenQueryUnseenTool,
        Scenario::SeenQuerySeenTool,
        Scenario::UnseenQueryUnseenTool,
        Scenario::UnseenQuerySeenTool,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::PureTrain => "pure_train",
            Scenario::SeenQueryUnseenTool => "seen_q_unseen_t",
            Scenario::SeenQuerySeenTool => "seen_q_seen_t",
            Scenario::UnseenQueryUnseenTool => "unseen_q_unseen_t",
            Scenario::UnseenQuerySeenTool => "unseen_q_seen_t",
        }
    }

    pub fn seen_query(self) -> bool {
        matches!(
            self,
            Scenario::SeenQueryUnseenTool | Scenario::SeenQuerySeenTool
        )
    }

    pub fn seen_tool(self) -> bool {
        matches!(
            self,
            Scenario::SeenQuerySeenTool | Scenario::UnseenQuerySeenTool
        )
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Scenario::PureTrain]
            .into_iter()
            .chain(Scenario::TEST)
            .find(|sc| sc.as_str() == s)
            .ok_or_else(|| format!("unknown scenario `{s}`"))
    }
}

/// One `(toolset, query, gold call, gold tool)` record plus its rank label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingInstance {
    pub id: String,
    pub toolset: Vec<ToolSpec>,
    pub query: String,
    /// `None` when no tool in the toolset applies.
    pub gold_tool: Option<String>,
    pub gold_call: ToolCall,
    pub rank_label: Vec<String>,
    pub pair_type: PairType,
    pub scenario: Scenario,
    pub cluster_id: String,
}

impl TrainingInstance {
    /// Tools ranked ahead of `generate_response` in the label.
    pub fn useful_tools(&self) -> &[String] {
        let pos = self
            .rank_label
            .iter()
            .position(|n| n == SENTINEL_TOOL)
            .unwrap_or(self.rank_label.len());
        &self.rank_label[..pos]
    }

    /// Violations of the instance invariants for a toolset built with `k`
    /// retrieved tools.
    pub fn violations(&self, k: usize) -> Vec<String> {
        let mut out = Vec::new();
        if self.toolset.len() != k + 1 {
            out.push(format!(
                "toolset has {} entries, expected {}",
                self.toolset.len(),
                k + 1
            ));
        }
        let names: Vec<&str> = self.toolset.iter().map(|t| normalize_name(&t.name)).collect();
        let unique: HashSet<&str> = names.iter().copied().collect();
        if unique.len() != names.len() {
            out.push("toolset has duplicate names".to_string());
        }
        if !unique.contains(SENTINEL_TOOL) {
            out.push("toolset lacks generate_response".to_string());
        }
        match &self.gold_tool {
            Some(gold) => {
                if !unique.contains(normalize_name(gold)) {
                    out.push(format!("gold tool `{gold}` is not in the toolset"));
                }
                if normalize_name(&self.gold_call.tool_name) != normalize_name(gold) {
                    out.push("gold call does not target the gold tool".to_string());
                }
            }
            None => {
                if !self.gold_call.is_sentinel() {
                    out.push("no-tool instance must call generate_response()".to_string());
                }
            }
        }
        let mut label: Vec<&str> = self.rank_label.iter().map(|n| normalize_name(n)).collect();
        let first = label.first().copied();
        label.sort_unstable();
        let mut sorted_names = names.clone();
        sorted_names.sort_unstable();
        if label != sorted_names {
            out.push("rank label is not a permutation of the toolset".to_string());
        }
        if first != Some(normalize_name(&self.gold_call.tool_name)) {
            out.push("rank label does not start with the gold call's tool".to_string());
        }
        out
    }
}

/// A model response split into its two tasks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedOutput {
    /// Task 1: tool names, best first.
    pub ranking: Vec<String>,
    /// Task 2: the invocation of the top-ranked tool.
    pub invocation: ToolCall,
    pub raw_text: String,
    pub parse_ok: bool,
}

impl RankedOutput {
    pub fn unparsed(raw_text: impl Into<String>) -> Self {
        Self {
            ranking: Vec::new(),
            invocation: ToolCall::new(""),
            raw_text: raw_text.into(),
            parse_ok: false,
        }
    }
}
