use std::collections::HashSet;

use crate::scenarios::ScenarioCorpus;
use crate::tool::normalize_name;

/// Leakage scan over a compiled corpus.
///
/// For each test instance: an unseen-tool gold tool must be absent from every
/// training toolset and a seen-tool gold tool present in at least one; an
/// unseen query must not occur as a training query and a seen query must.
pub fn soundness_violations(corpus: &ScenarioCorpus) -> Vec<String> {
    let train_tools: HashSet<&str> = corpus
        .train
        .iter()
        .flat_map(|i| i.toolset.iter().map(|t| normalize_name(&t.name)))
        .collect();
    let train_queries: HashSet<&str> = corpus.train.iter().map(|i| i.query.as_str()).collect();

    let mut out = Vec::new();
    for inst in corpus.test_instances() {
        let scenario = inst.scenario;
        if let Some(gold) = &inst.gold_tool {
            let seen = train_tools.contains(normalize_name(gold));
            if seen != scenario.seen_tool() {
                out.push(format!(
                    "{} ({scenario}): gold tool `{gold}` {} training toolsets",
                    inst.id,
                    if seen { "appears in" } else { "is missing from" }
                ));
            }
        }
        let seen = train_queries.contains(inst.query.as_str());
        if seen != scenario.seen_query() {
            out.push(format!(
                "{} ({scenario}): query {} the training queries",
                inst.id,
                if seen { "appears in" } else { "is missing from" }
            ));
        }
    }
    out
}
