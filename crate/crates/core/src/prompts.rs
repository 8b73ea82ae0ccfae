//! Prompt templates shipped under `templates/`.
//!
//! Placeholders are `{name}` tokens; everything else, including the literal
//! braces of the JSON output stanza, is copied through unchanged.

use sha2::{Digest, Sha256};

use crate::tool::{ParameterSpec, ToolSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Template {
    /// Two-task ranking and invocation prompt given to the model under test.
    RankAndInvoke,
    /// Weak-tool generation.
    ToolGeneration,
    /// Query generation for a weak/strong tool pair.
    QueryGeneration,
    /// Call annotation for a query/tool combination.
    CallAnnotation,
}

impl Template {
    pub const ALL: [Template; 4] = [
        Template::RankAndInvoke,
        Template::ToolGeneration,
        Template::QueryGeneration,
        Template::CallAnnotation,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            Template::RankAndInvoke => "rank_and_invoke.txt",
            Template::ToolGeneration => "tool_generation.txt",
            Template::QueryGeneration => "query_generation.txt",
            Template::CallAnnotation => "call_annotation.txt",
        }
    }

    /// Raw file contents.
    pub fn source(self) -> &'static str {
        match self {
            Template::RankAndInvoke => include_str!("../templates/rank_and_invoke.txt"),
            Template::ToolGeneration => include_str!("../templates/tool_generation.txt"),
            Template::QueryGeneration => include_str!("../templates/query_generation.txt"),
            Template::CallAnnotation => include_str!("../templates/call_annotation.txt"),
        }
    }

    /// Template text without the file's final newline.
    pub fn text(self) -> &'static str {
        self.source().strip_suffix('\n').unwrap_or(self.source())
    }

    /// SHA-256 of the shipped file, as listed in `templates/SHA256SUMS`.
    pub fn expected_sha256(self) -> &'static str {
        match self {
            Template::RankAndInvoke => "aaddb2f5ce27552683982c1313c240408faace960948940f86eceb51b3ee5e71",
            Template::ToolGeneration => "4b67912e288dbd571ccb65618a057b4a430903e15d43cd8ec03e3d3a494aa644",
            Template::QueryGeneration => "648b0719d0b95a551e52606ef855f234da0a3c99e6bc0e44840e2478f2d9148d",
            Template::CallAnnotation => "8f572a5a18ba109528aedfcb574a3b96dd7353b9152b7e5cc268765d316b6912",
        }
    }

    pub fn sha256(self) -> String {
        hex::encode(Sha256::digest(self.source().as_bytes()))
    }

    /// First line of the template; identifies which prompt a request carries.
    pub fn header(self) -> &'static str {
        self.text().lines().next().unwrap_or_default()
    }

    pub fn identify(prompt: &str) -> Option<Template> {
        Template::ALL
            .into_iter()
            .find(|t| prompt.starts_with(t.header()))
    }

    pub fn placeholders(self) -> &'static [&'static str] {
        match self {
            Template::RankAndInvoke => &["input_query", "tools"],
            Template::ToolGeneration => &["user_query", "ex_tools"],
            Template::QueryGeneration => &["weak", "strong"],
            Template::CallAnnotation => &["demons_example_tool_set", "query", "tools"],
        }
    }

    /// Substitutes `values` in a single left-to-right pass, so text inserted
    /// for one placeholder is never re-scanned for another.
    ///
    /// Panics if a value is missing for one of the template's placeholders.
    pub fn render(self, values: &[(&str, &str)]) -> String {
        for name in self.placeholders() {
            assert!(
                values.iter().any(|(k, _)| k == name),
                "missing value for placeholder `{name}` in {}",
                self.file_name()
            );
        }
        fill(self.text(), values)
    }
}

fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() + 256);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let replaced = after.find('}').and_then(|close| {
            let name = &after[..close];
            values
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| (close, *v))
        });
        match replaced {
            Some((close, value)) => {
                out.push_str(value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Renders tools as the JSON array embedded in prompts (two-space indent).
pub fn toolset_json(tools: &[ToolSpec]) -> String {
    serde_json::to_string_pretty(tools).expect("tool specs always serialize")
}

/// The `file_write` tool used by the call-annotation demonstration.
pub fn demonstration_tool() -> ToolSpec {
    ToolSpec::new("file_write", "Write content to a file, creating it if it does not exist")
        .param(ParameterSpec::new("file_path", "Path of the file to write"))
        .param(ParameterSpec::new("content", "Content to write into the file"))
        .returns("status", "Whether the write succeeded")
}

pub fn tool_generation_prompt(user_query: &str, existing: &ToolSpec) -> String {
    Template::ToolGeneration.render(&[
        ("user_query", user_query),
        ("ex_tools", &toolset_json(std::slice::from_ref(existing))),
    ])
}

pub fn query_generation_prompt(weak: &ToolSpec, strong: &ToolSpec) -> String {
    Template::QueryGeneration.render(&[
        ("weak", &toolset_json(std::slice::from_ref(weak))),
        ("strong", &toolset_json(std::slice::from_ref(strong))),
    ])
}

pub fn call_annotation_prompt(query: &str, tool: &ToolSpec) -> String {
    Template::CallAnnotation.render(&[
        ("demons_example_tool_set", &toolset_json(&[demonstration_tool()])),
        ("query", query),
        ("tools", &toolset_json(std::slice::from_ref(tool))),
    ])
}

/// Text between the last occurrence of `start` and the following `end`.
pub(crate) fn section<'a>(prompt: &'a str, start: &str, end: &str) -> Option<&'a str> {
    let from = prompt.rfind(start)? + start.len();
    let to = prompt[from..].find(end)? + from;
    Some(&prompt[from..to])
}
