use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::instance::{QueryRole, QueryToolCluster};
use crate::tool::{identifier_words, normalize_name, validate_tool, ToolCall, ToolSpec};

pub const CHECK_QUERY: &str = "query_well_formed";
pub const CHECK_SCHEMA: &str = "schema_conformance";
pub const CHECK_KEYS: &str = "argument_keys_subset";
pub const CHECK_GROUNDING: &str = "argument_values_grounded";

/// Outcome of the automated rubric for one cluster.
///
/// Grounding is a proxy for "the reference tool solves the query": a value
/// passes when it occurs in the query, or when it is the kind of value the
/// annotator may legitimately supply itself (dates, times, personal data).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityReport {
    pub cluster_id: String,
    pub checks: BTreeMap<String, bool>,
    pub all_valid: bool,
    /// Failures, plus values accepted as inferred.
    pub notes: Vec<String>,
}

/// Nonempty and either ends in terminal punctuation or runs longer than
/// three words.
pub fn query_well_formed(query: &str) -> bool {
    let q = query.trim();
    !q.is_empty() && (q.ends_with(['.', '?', '!']) || q.split_whitespace().count() > 3)
}

const DATE_TIME_WORDS: &[&str] = &[
    "date", "time", "day", "days", "deadline", "timestamp", "datetime", "when", "year", "month",
    "hour", "schedule", "duration",
];
const PERSONAL_WORDS: &[&str] = &[
    "password", "account", "username", "email", "phone", "contact", "mobile", "passport", "ssn",
    "birthday", "address",
];
const PERSON_QUALIFIERS: &[&str] = &[
    "user", "first", "last", "full", "passenger", "customer", "person", "guest", "patient",
    "contact", "owner", "my",
];

/// Keys whose values the annotator may fill from context rather than the
/// query text.
fn inferred_allowed_key(key: &str) -> bool {
    let words = identifier_words(key);
    let has = |w: &str| words.iter().any(|x| x == w);
    DATE_TIME_WORDS.iter().any(|w| has(w))
        || PERSONAL_WORDS.iter().any(|w| has(w))
        || (has("name") && PERSON_QUALIFIERS.iter().any(|w| has(w)))
        || words == ["id", "number"]
        || words == ["user", "id"]
}

/// `2023-10-25`, `19:00`, `2023-10-25T19:00:00` and similar.
fn date_or_time_shaped(value: &str) -> bool {
    let v = value.trim();
    let date = |s: &str| {
        let b = s.as_bytes();
        b.len() == 10
            && b[4] == b'-'
            && b[7] == b'-'
            && b.iter().enumerate().all(|(i, c)| i == 4 || i == 7 || c.is_ascii_digit())
    };
    let time = |s: &str| {
        let parts: Vec<&str> = s.split(':').collect();
        (2..=3).contains(&parts.len())
            && parts
                .iter()
                .enumerate()
                .all(|(i, p)| (1..=2).contains(&p.len()) && (i > 0 || !p.is_empty()) && p.bytes().all(|c| c.is_ascii_digit()))
    };
    match v.split_once('T') {
        Some((d, t)) => date(d) && time(t.trim_end_matches('Z')),
        None => date(v) || time(v),
    }
}

fn grounded(query: &str, value: &str) -> bool {
    let v = value.trim().to_lowercase();
    !v.is_empty() && query.to_lowercase().contains(&v)
}

fn check_call(
    label: &str,
    query: &str,
    call: &ToolCall,
    tool: Option<&ToolSpec>,
    keys_ok: &mut bool,
    grounded_ok: &mut bool,
    notes: &mut Vec<String>,
) {
    let Some(tool) = tool else {
        *keys_ok = false;
        notes.push(format!("{label}: calls unknown tool `{}`", call.tool_name));
        return;
    };
    for (key, value) in &call.arguments {
        if tool.parameter(key).is_none() {
            *keys_ok = false;
            notes.push(format!("{label}: `{key}` is not a parameter of `{}`", tool.name));
        }
        if grounded(query, value) {
            continue;
        }
        if inferred_allowed_key(key) || date_or_time_shaped(value) {
            notes.push(format!("{label}: `{key}`={value:?} accepted as inferred"));
        } else {
            *grounded_ok = false;
            notes.push(format!("{label}: `{key}`={value:?} does not occur in the query"));
        }
    }
}

/// Runs the automatable rubric rows over a cluster.
pub fn validate_cluster(cluster: &QueryToolCluster) -> QualityReport {
    let mut notes = Vec::new();

    let mut query_ok = true;
    let queries = [&cluster.strong_query, &cluster.weak_query]
        .into_iter()
        .chain(&cluster.extra_queries);
    for q in queries {
        if !query_well_formed(q) {
            query_ok = false;
            notes.push(format!("malformed query {q:?}"));
        }
    }

    let mut schema_ok = true;
    for tool in cluster.tools() {
        for v in validate_tool(tool) {
            schema_ok = false;
            notes.push(format!("tool `{}`: {v}", tool.name));
        }
    }
    for v in cluster.violations() {
        schema_ok = false;
        notes.push(v);
    }

    let tool_named = |name: &str| {
        cluster
            .tools()
            .find(|t| normalize_name(&t.name) == normalize_name(name))
    };
    let mut keys_ok = true;
    let mut grounded_ok = true;
    let mut calls: Vec<(String, &str, &ToolCall)> = vec![
        ("strong call".into(), cluster.query(QueryRole::Strong), &cluster.strong_call),
        ("weak call".into(), cluster.query(QueryRole::Strong), &cluster.weak_call),
    ];
    for cross in &cluster.cross_calls {
        calls.push((
            format!("{:?} query on `{}`", cross.query, cross.tool_name),
            cluster.query(cross.query),
            &cross.call,
        ));
    }
    for (label, query, call) in calls {
        check_call(
            &label,
            query,
            call,
            tool_named(&call.tool_name),
            &mut keys_ok,
            &mut grounded_ok,
            &mut notes,
        );
    }

    let checks: BTreeMap<String, bool> = [
        (CHECK_QUERY, query_ok),
        (CHECK_SCHEMA, schema_ok),
        (CHECK_KEYS, keys_ok),
        (CHECK_GROUNDING, grounded_ok),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    QualityReport {
        cluster_id: cluster.id.clone(),
        all_valid: checks.values().all(|&v| v),
        checks,
        notes,
    }
}
