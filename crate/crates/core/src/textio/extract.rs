//! Locating JSON inside noisy model text.
//!
//! Tolerance is deliberately narrow: a strict parse of the whole text, then
//! exactly one repair pass (drop a Markdown code fence, cut out the first
//! balanced block, strict-parse it). Nothing is rewritten inside the block.

use serde_json::Value;

/// Contents of the first fenced block (```` ```lang ... ``` ````), or the input
/// unchanged when there is no complete fence.
pub fn strip_code_fence(text: &str) -> &str {
    let Some(start) = text.find("```") else {
        return text;
    };
    let after = &text[start + 3..];
    // Skip the info string (e.g. `json`) up to the end of the fence line.
    let body_start = after.find('\n').map(|i| i + 1).unwrap_or(after.len());
    let body = &after[body_start..];
    match body.find("```") {
        Some(end) => &body[..end],
        None => text,
    }
}

/// The first `{...}` or `[...]` block (whichever opens first, or only the
/// requested kind) whose brackets balance, honouring JSON string literals.
pub fn first_balanced_block<'a>(text: &'a str, kinds: &[char]) -> Option<&'a str> {
    let start = text.find(|c: char| kinds.contains(&c))?;
    let mut stack: Vec<char> = Vec::new();
    let mut in_string = false;
    let mut escaped = false;
    for (offset, c) in text[start..].char_indices() {
        if in_string {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            continue;
        }
        match c {
            '"' => in_string = true,
            '{' => stack.push('}'),
            '[' => stack.push(']'),
            '}' | ']' => {
                if stack.pop() != Some(c) {
                    return None;
                }
                if stack.is_empty() {
                    return Some(&text[start..start + offset + c.len_utf8()]);
                }
            }
            _ => {}
        }
    }
    None
}

/// Strict parse, else one repair pass over any JSON value kind.
pub fn extract_json(text: &str) -> Option<Value> {
    if let Ok(v) = serde_json::from_str(text.trim()) {
        return Some(v);
    }
    let unfenced = strip_code_fence(text);
    if let Ok(v) = serde_json::from_str(unfenced.trim()) {
        return Some(v);
    }
    let block = first_balanced_block(unfenced, &['{', '['])?;
    serde_json::from_str(block).ok()
}

/// Strict parse of a JSON object, else the first balanced `{...}` block.
pub fn extract_object(text: &str) -> Option<serde_json::Map<String, Value>> {
    if let Ok(Value::Object(map)) = serde_json::from_str(text.trim()) {
        return Some(map);
    }
    let block = first_balanced_block(text, &['{'])?;
    match serde_json::from_str(block) {
        Ok(Value::Object(map)) => Some(map),
        _ => None,
    }
}
