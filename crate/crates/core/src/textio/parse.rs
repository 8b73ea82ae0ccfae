use serde_json::Value;

use crate::instance::RankedOutput;
use crate::textio::extract::extract_object;
use crate::textio::invocation::parse_invocations;
use crate::tool::ToolCall;

pub const FIRST_TASK_KEY: &str = "The output of the first task";
pub const SECOND_TASK_KEY: &str = "The output of the second task";

/// Parses a model response. Never fails: anything that does not meet the
/// output contract comes back with `parse_ok == false`.
///
/// The contract is a JSON object (optionally surrounded by prose) with
/// exactly two keys, one starting with each task prefix. Task 1 must be a
/// list of tool names; task 2 a non-empty list of invocation strings that
/// all denote the same call.
pub fn parse_model_output(text: &str) -> RankedOutput {
    match try_parse(text) {
        Some((ranking, invocation)) => RankedOutput {
            ranking,
            invocation,
            raw_text: text.to_string(),
            parse_ok: true,
        },
        None => RankedOutput::unparsed(text),
    }
}

fn try_parse(text: &str) -> Option<(Vec<String>, ToolCall)> {
    let object = extract_object(text)?;
    if object.len() != 2 {
        return None;
    }
    let first = task_value(&object, FIRST_TASK_KEY)?;
    let second = task_value(&object, SECOND_TASK_KEY)?;

    let ranking = first
        .as_array()?
        .iter()
        .map(|v| v.as_str().map(ranking_name))
        .collect::<Option<Vec<_>>>()?;

    let items = second.as_array()?;
    let mut calls = Vec::new();
    for item in items {
        calls.extend(parse_invocations(item.as_str()?).ok()?);
    }
    let (head, rest) = calls.split_first()?;
    if rest.iter().all(|c| c.same_call(head)) {
        Some((ranking, head.clone()))
    } else {
        None
    }
}

fn task_value<'a>(object: &'a serde_json::Map<String, Value>, prefix: &str) -> Option<&'a Value> {
    let mut hits = object.iter().filter(|(k, _)| k.trim_start().starts_with(prefix));
    let (_, value) = hits.next()?;
    hits.next().is_none().then_some(value)
}

/// Ranking entries are names, but models often echo the prompt's
/// `generate_response()` spelling.
fn ranking_name(raw: &str) -> String {
    let name = raw.trim();
    name.strip_suffix("()").unwrap_or(name).trim_end().to_string()
}
