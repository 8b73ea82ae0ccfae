use crate::tool::{normalize_name, ToolSpec, SENTINEL_TOOL};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LabelError {
    #[error("`{0}` is not in the toolset")]
    NotInToolset(String),
    #[error("the toolset has no generate_response entry")]
    NoSentinel,
    #[error("a weak tool needs a gold tool to rank below")]
    WeakWithoutGold,
    #[error("gold and weak tool are both `{0}`")]
    SameTool(String),
    #[error("`{0}` cannot be the gold or weak tool")]
    SentinelAsTool(String),
}

/// Rank label for a toolset.
///
/// * no useful tool: `generate_response`, then everything else;
/// * gold only: gold, `generate_response`, everything else;
/// * gold and weak: gold, weak, `generate_response`, everything else.
///
/// "Everything else" is sorted lexicographically.
pub fn rank_label_for(
    toolset: &[ToolSpec],
    gold: Option<&str>,
    weak: Option<&str>,
) -> Result<Vec<String>, LabelError> {
    let names: Vec<&str> = toolset.iter().map(|t| normalize_name(&t.name)).collect();
    if !names.contains(&SENTINEL_TOOL) {
        return Err(LabelError::NoSentinel);
    }
    let gold = gold.map(normalize_name);
    let weak = weak.map(normalize_name);
    if weak.is_some() && gold.is_none() {
        return Err(LabelError::WeakWithoutGold);
    }
    if let (Some(g), Some(w)) = (gold, weak) {
        if g == w {
            return Err(LabelError::SameTool(g.to_string()));
        }
    }
    let mut head: Vec<&str> = Vec::new();
    for name in gold.into_iter().chain(weak) {
        if name == SENTINEL_TOOL {
            return Err(LabelError::SentinelAsTool(name.to_string()));
        }
        if !names.contains(&name) {
            return Err(LabelError::NotInToolset(name.to_string()));
        }
        head.push(name);
    }
    head.push(SENTINEL_TOOL);
    let mut rest: Vec<&str> = names.iter().copied().filter(|n| !head.contains(n)).collect();
    rest.sort_unstable();
    Ok(head.into_iter().chain(rest).map(str::to_string).collect())
}
