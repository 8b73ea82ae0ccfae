//! Weak-tool generation, query generation, call annotation, and the
//! automated quality checks that gate each cluster.

mod quality;
mod seeds;

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::instance::{CrossCall, QueryRole, QueryToolCluster};
use crate::prompts::{call_annotation_prompt, query_generation_prompt, tool_generation_prompt};
use crate::provider::{
    GenerationRequest, ProviderError, TextGenerator, ANNOTATION_TEMPERATURE,
    GENERATION_TEMPERATURE,
};
use crate::textio::extract::extract_json;
use crate::textio::invocation::parse_invocation;
use crate::tool::{normalize_name, validate_tool, ToolCall, ToolSpec};

pub use quality::{query_well_formed, validate_cluster, QualityReport};
pub use seeds::{mock_seed_corpus, DOMAINS};

/// Weak variants generated per seed.
pub const WEAK_TOOLS_PER_SEED: usize = 2;
/// Queries generated per weak/strong pair.
pub const QUERIES_PER_PAIR: usize = 10;

/// An original single-tool usage case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPair {
    pub query: String,
    pub gold_tool: ToolSpec,
    pub domain_tag: String,
}

impl SeedPair {
    pub fn violations(&self) -> Vec<String> {
        let mut out = validate_tool(&self.gold_tool);
        if self.query.trim().is_empty() {
            out.push("empty query".to_string());
        }
        if self.gold_tool.is_sentinel() {
            out.push("gold tool is generate_response".to_string());
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    WeakTool,
    Queries,
    Annotation,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::WeakTool => "weak-tool generation",
            Stage::Queries => "query generation",
            Stage::Annotation => "call annotation",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SynthesisError {
    #[error("invalid seed: {}", .0.join("; "))]
    InvalidSeed(Vec<String>),
    #[error("{stage}: {source}")]
    Provider {
        stage: Stage,
        #[source]
        source: ProviderError,
    },
    #[error("{stage}: no usable output after {attempts} attempts ({reason}); last response: {raw:?}")]
    Unusable {
        stage: Stage,
        attempts: u32,
        reason: String,
        raw: String,
    },
    #[error("cluster {id} is inconsistent: {}", .violations.join("; "))]
    Cluster { id: String, violations: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisConfig {
    pub model_id: String,
    /// Attempts per generated weak tool, and rounds of query generation.
    pub max_attempts: u32,
    /// Attempts per annotation (the first prompt plus re-prompts).
    pub annotation_attempts: u32,
    pub max_tokens: u32,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            model_id: "gpt-4o".to_string(),
            max_attempts: 3,
            annotation_attempts: 2,
            max_tokens: 2048,
        }
    }
}

/// Runs the three generation stages against a text generator.
pub struct Synthesizer<G> {
    generator: G,
    config: SynthesisConfig,
}

impl<G: TextGenerator> Synthesizer<G> {
    pub fn new(generator: G, config: SynthesisConfig) -> Self {
        Self { generator, config }
    }

    pub fn generator(&self) -> &G {
        &self.generator
    }

    fn ask(&self, stage: Stage, prompt: &str, temperature: f64, variant: u32) -> Result<String, SynthesisError> {
        let mut request = GenerationRequest::new(prompt, &self.config.model_id)
            .temperature(temperature)
            .variant(variant);
        request.max_tokens = self.config.max_tokens;
        self.generator
            .generate(&request)
            .map_err(|source| SynthesisError::Provider { stage, source })
    }

    /// Two structurally valid weak variants of the seed tool, with names
    /// distinct from the seed tool and from each other.
    pub fn generate_weak_tools(&self, seed: &SeedPair) -> Result<Vec<ToolSpec>, SynthesisError> {
        let problems = seed.violations();
        if !problems.is_empty() {
            return Err(SynthesisError::InvalidSeed(problems));
        }
        let prompt = tool_generation_prompt(&seed.query, &seed.gold_tool);
        let attempts = self.config.max_attempts.max(1);
        let mut taken: Vec<String> = vec![normalize_name(&seed.gold_tool.name).to_string()];
        let mut tools = Vec::with_capacity(WEAK_TOOLS_PER_SEED);
        for slot in 0..WEAK_TOOLS_PER_SEED as u32 {
            let mut last = (String::new(), String::new());
            let mut found = None;
            for attempt in 0..attempts {
                let raw = self.ask(Stage::WeakTool, &prompt, GENERATION_TEMPERATURE, slot * attempts + attempt)?;
                match read_tool(&raw, &taken) {
                    Ok(tool) => {
                        found = Some(tool);
                        break;
                    }
                    Err(reason) => {
                        tracing::debug!(%reason, slot, attempt, "rejected weak tool");
                        last = (reason, raw);
                    }
                }
            }
            let Some(tool) = found else {
                return Err(SynthesisError::Unusable {
                    stage: Stage::WeakTool,
                    attempts,
                    reason: last.0,
                    raw: last.1,
                });
            };
            taken.push(normalize_name(&tool.name).to_string());
            tools.push(tool);
        }
        Ok(tools)
    }

    /// Ten queries, pairwise distinct after whitespace normalization.
    pub fn generate_queries(&self, weak: &ToolSpec, strong: &ToolSpec) -> Result<Vec<String>, SynthesisError> {
        self.generate_queries_avoiding(weak, strong, &[])
    }

    fn generate_queries_avoiding(
        &self,
        weak: &ToolSpec,
        strong: &ToolSpec,
        avoid: &[&str],
    ) -> Result<Vec<String>, SynthesisError> {
        if normalize_name(&weak.name) == normalize_name(&strong.name) {
            return Err(SynthesisError::Unusable {
                stage: Stage::Queries,
                attempts: 0,
                reason: "weak and strong tool share a name".into(),
                raw: String::new(),
            });
        }
        let prompt = query_generation_prompt(weak, strong);
        let mut seen: HashSet<String> = avoid.iter().map(|q| collapse_whitespace(q)).collect();
        let mut queries = Vec::with_capacity(QUERIES_PER_PAIR);
        let rounds = self.config.max_attempts.max(1);
        let mut last_raw = String::new();
        for round in 0..rounds {
            let raw = self.ask(Stage::Queries, &prompt, GENERATION_TEMPERATURE, round)?;
            let parsed = match extract_json(&raw) {
                Some(Value::Array(items)) => items,
                _ => {
                    last_raw = raw;
                    continue;
                }
            };
            for item in parsed {
                let Some(text) = item.as_str() else { continue };
                let query = collapse_whitespace(text);
                if !query.is_empty() && seen.insert(query.clone()) && queries.len() < QUERIES_PER_PAIR {
                    queries.push(query);
                }
            }
            if queries.len() == QUERIES_PER_PAIR {
                return Ok(queries);
            }
            last_raw = raw;
        }
        Err(SynthesisError::Unusable {
            stage: Stage::Queries,
            attempts: rounds,
            reason: format!("collected {} distinct queries", queries.len()),
            raw: last_raw,
        })
    }

    /// The call a model makes for `query` on `tool`. Argument keys outside
    /// the tool's schema trigger a re-prompt, then an error.
    pub fn annotate_call(&self, query: &str, tool: &ToolSpec) -> Result<ToolCall, SynthesisError> {
        let prompt = call_annotation_prompt(query, tool);
        let attempts = self.config.annotation_attempts.max(1);
        let mut last = (String::new(), String::new());
        for attempt in 0..attempts {
            let raw = self.ask(Stage::Annotation, &prompt, ANNOTATION_TEMPERATURE, attempt)?;
            match read_call(&raw, tool) {
                Ok(call) => return Ok(call),
                Err(reason) => {
                    tracing::debug!(%reason, attempt, tool = %tool.name, "rejected annotation");
                    last = (reason, raw);
                }
            }
        }
        Err(SynthesisError::Unusable {
            stage: Stage::Annotation,
            attempts,
            reason: last.0,
            raw: last.1,
        })
    }

    /// Runs all stages for one seed.
    ///
    /// The first weak tool becomes `t'` and the second is kept as a
    /// distractor; the first generated query becomes `q'` and the other nine
    /// are kept as extras.
    pub fn build_cluster(&self, id: &str, seed: &SeedPair) -> Result<QueryToolCluster, SynthesisError> {
        let mut weak_tools = self.generate_weak_tools(seed)?;
        let weak_tool = weak_tools.remove(0);
        let strong_tool = seed.gold_tool.clone();
        let mut queries = self.generate_queries_avoiding(&weak_tool, &strong_tool, &[&seed.query])?;
        let pick = queries.iter().position(|q| query_well_formed(q)).unwrap_or(0);
        let weak_query = queries.remove(pick);
        let strong_query = seed.query.trim().to_string();

        let strong_call = self.annotate_call(&strong_query, &strong_tool)?;
        let weak_call = self.annotate_call(&strong_query, &weak_tool)?;
        let cross_calls = vec![
            CrossCall {
                query: QueryRole::Weak,
                tool_name: strong_tool.name.clone(),
                call: self.annotate_call(&weak_query, &strong_tool)?,
            },
            CrossCall {
                query: QueryRole::Weak,
                tool_name: weak_tool.name.clone(),
                call: self.annotate_call(&weak_query, &weak_tool)?,
            },
        ];
        let cluster = QueryToolCluster {
            id: id.to_string(),
            domain: seed.domain_tag.clone(),
            strong_query,
            strong_tool,
            weak_query,
            weak_tool,
            extra_queries: queries,
            extra_weak_tools: weak_tools,
            strong_call,
            weak_call,
            cross_calls,
        };
        let violations = cluster.violations();
        if !violations.is_empty() {
            return Err(SynthesisError::Cluster {
                id: id.to_string(),
                violations,
            });
        }
        Ok(cluster)
    }

    /// Builds one cluster per seed on up to `jobs` threads. Results keep the
    /// seed order; cluster ids are `c` plus the zero-padded seed index.
    pub fn build_clusters(
        &self,
        seeds: &[SeedPair],
        jobs: usize,
    ) -> Vec<Result<QueryToolCluster, SynthesisError>> {
        let run = || {
            seeds
                .par_iter()
                .enumerate()
                .map(|(i, seed)| self.build_cluster(&cluster_id(i), seed))
                .collect()
        };
        match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        }
    }
}

pub fn cluster_id(index: usize) -> String {
    format!("c{index:05}")
}

fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn read_tool(raw: &str, taken: &[String]) -> Result<ToolSpec, String> {
    let value = extract_json(raw).ok_or("no JSON in response")?;
    let value = match value {
        Value::Array(mut items) if items.len() == 1 => items.remove(0),
        other => other,
    };
    let tool: ToolSpec = serde_json::from_value(value).map_err(|e| format!("not a tool: {e}"))?;
    let problems = validate_tool(&tool);
    if !problems.is_empty() {
        return Err(problems.join("; "));
    }
    if tool.is_sentinel() {
        return Err("generated the reserved generate_response name".into());
    }
    if taken.iter().any(|n| n == normalize_name(&tool.name)) {
        return Err(format!("name `{}` is already used", tool.name));
    }
    Ok(tool)
}

fn value_text(value: &Value) -> Option<String> {
    match value {
        Value::Null => None,
        Value::String(s) => Some(s.clone()),
        other => Some(other.to_string()),
    }
}

/// Accepts `{"tool_name": .., "arguments": {..}}` or a bare invocation string
/// like the one in the annotation prompt's demonstration.
fn read_call(raw: &str, tool: &ToolSpec) -> Result<ToolCall, String> {
    let call = match extract_json(raw) {
        Some(Value::Object(map)) => {
            let name = map
                .get("tool_name")
                .or_else(|| map.get("name"))
                .and_then(Value::as_str)
                .ok_or("missing tool_name")?;
            let mut call = ToolCall::new(name.trim());
            match map.get("arguments") {
                None | Some(Value::Null) => {}
                Some(Value::Object(args)) => {
                    for (k, v) in args {
                        if let Some(text) = value_text(v) {
                            call.arguments.insert(k.clone(), text);
                        }
                    }
                }
                Some(_) => return Err("arguments is not an object".into()),
            }
            call
        }
        _ => parse_invocation(raw.trim()).map_err(|e| e.to_string())?,
    };
    if normalize_name(&call.tool_name) != normalize_name(&tool.name) {
        return Err(format!("called `{}` instead of `{}`", call.tool_name, tool.name));
    }
    if let Some(key) = call.arguments.keys().find(|k| tool.parameter(k).is_none()) {
        return Err(format!("argument `{key}` is not a parameter of `{}`", tool.name));
    }
    Ok(ToolCall {
        tool_name: tool.name.clone(),
        arguments: call.arguments,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::atomic::{AtomicUsize, Ordering};

    use super::*;
    use crate::provider::MockGenerator;
    use crate::tool::ParameterSpec;
    use proptest::prelude::*;

    fn restaurant_seed() -> SeedPair {
        SeedPair {
            query: "What are the best restaurants in New York City, and what cuisines do they serve?".into(),
            gold_tool: ToolSpec::new("restaurant_finder", "Find top restaurants in a city with their cuisines")
                .param(ParameterSpec::new("city", "City name"))
                .param(ParameterSpec::new("max_results", "How many restaurants").optional())
                .returns("restaurants", "Top restaurants")
                .returns("cuisines", "Cuisine served by each restaurant"),
            domain_tag: "food".into(),
        }
    }

    fn mock(seed: u64) -> Synthesizer<MockGenerator> {
        Synthesizer::new(MockGenerator::new(seed), SynthesisConfig::default())
    }

    /// Replays canned responses in order, then repeats the last one.
    struct Scripted {
        replies: Vec<String>,
        calls: AtomicUsize,
    }

    impl Scripted {
        fn new(replies: &[&str]) -> Self {
            Self {
                replies: replies.iter().map(|s| s.to_string()).collect(),
                calls: AtomicUsize::new(0),
            }
        }
    }

    impl TextGenerator for Scripted {
        fn backend_id(&self) -> String {
            "scripted".into()
        }
        fn generate(&self, _: &GenerationRequest) -> Result<String, ProviderError> {
            let i = self.calls.fetch_add(1, Ordering::SeqCst);
            Ok(self.replies[i.min(self.replies.len() - 1)].clone())
        }
        fn request_count(&self) -> usize {
            self.calls.load(Ordering::SeqCst)
        }
    }

    #[test]
    fn weak_tools_are_valid_distinct_and_reproducible() {
        let seed = restaurant_seed();
        let tools = mock(5).generate_weak_tools(&seed).unwrap();
        assert_eq!(tools.len(), 2);
        assert_ne!(tools[0].name, tools[1].name);
        for t in &tools {
            assert!(validate_tool(t).is_empty());
            assert_ne!(t.name, seed.gold_tool.name);
            assert!(t.returns.iter().all(|r| r.name != "cuisines"));
        }
        assert_eq!(tools, mock(5).generate_weak_tools(&seed).unwrap());
    }

    #[test]
    fn corrupt_weak_tools_fail_after_three_attempts() {
        let bad = r#"{"name": "", "description": "x", "arguments": {"type": "object", "properties": {}}, "returns": {}}"#;
        let synth = Synthesizer::new(Scripted::new(&[bad]), SynthesisConfig::default());
        match synth.generate_weak_tools(&restaurant_seed()) {
            Err(SynthesisError::Unusable { stage: Stage::WeakTool, attempts: 3, raw, .. }) => {
                assert_eq!(raw, bad)
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(synth.generator().request_count(), 3);
    }

    #[test]
    fn queries_are_ten_and_distinct() {
        let seed = restaurant_seed();
        let synth = mock(11);
        let weak = synth.generate_weak_tools(&seed).unwrap().remove(0);
        let queries = synth.generate_queries(&weak, &seed.gold_tool).unwrap();
        assert_eq!(queries.len(), QUERIES_PER_PAIR);
        let distinct: HashSet<String> = queries.iter().map(|q| collapse_whitespace(q)).collect();
        assert_eq!(distinct.len(), QUERIES_PER_PAIR);
        assert_eq!(queries, synth.generate_queries(&weak, &seed.gold_tool).unwrap());
    }

    #[test]
    fn duplicate_heavy_query_output_is_topped_up_or_rejected() {
        let five = r#"["a b", "a  b", "c", "d", "e", "f"]"#;
        let more = r#"["g", "h", "i", "j", "k", "l"]"#;
        let seed = restaurant_seed();
        let weak = ToolSpec::new("lite_restaurant_finder", "x").returns("r", "r");
        let synth = Synthesizer::new(Scripted::new(&[five, more]), SynthesisConfig::default());
        let queries = synth.generate_queries(&weak, &seed.gold_tool).unwrap();
        assert_eq!(queries, ["a b", "c", "d", "e", "f", "g", "h", "i", "j", "k"]);

        let synth = Synthesizer::new(Scripted::new(&[five]), SynthesisConfig::default());
        assert!(matches!(
            synth.generate_queries(&weak, &seed.gold_tool),
            Err(SynthesisError::Unusable { stage: Stage::Queries, .. })
        ));
    }

    #[test]
    fn annotation_matches_the_demonstration_form() {
        let tool = crate::prompts::demonstration_tool();
        let reply = "file_write(file_path='Desktop/2023 October Work Log.txt', content='Tasks Completed Today')";
        let synth = Synthesizer::new(Scripted::new(&[reply]), SynthesisConfig::default());
        let call = synth
            .annotate_call("create file 2023 October Work Log.txt with Tasks Completed Today", &tool)
            .unwrap();
        assert_eq!(
            call,
            ToolCall::new("file_write")
                .arg("file_path", "Desktop/2023 October Work Log.txt")
                .arg("content", "Tasks Completed Today")
        );
    }

    #[test]
    fn out_of_schema_keys_are_reprompted_once() {
        let tool = ToolSpec::new("t", "d")
            .param(ParameterSpec::new("a", "a"))
            .returns("r", "r");
        let bad = r#"{"tool_name": "t", "arguments": {"zzz": "1"}}"#;
        let good = r#"{"tool_name": "t", "arguments": {"a": 7}}"#;
        let synth = Synthesizer::new(Scripted::new(&[bad, good]), SynthesisConfig::default());
        assert_eq!(synth.annotate_call("q", &tool).unwrap(), ToolCall::new("t").arg("a", "7"));

        let synth = Synthesizer::new(Scripted::new(&[bad]), SynthesisConfig::default());
        assert!(matches!(
            synth.annotate_call("q", &tool),
            Err(SynthesisError::Unusable { stage: Stage::Annotation, attempts: 2, .. })
        ));
        assert_eq!(synth.generator().request_count(), 2);
    }

    #[test]
    fn zero_parameter_tool_gets_an_empty_call() {
        let tool = ToolSpec::new("ping", "Check liveness").returns("ok", "Alive");
        assert_eq!(mock(1).annotate_call("ping it", &tool).unwrap(), ToolCall::new("ping"));
    }

    #[test]
    fn cluster_has_expected_shape_and_is_reproducible() {
        let seed = mock_seed_corpus(1, 4).remove(0);
        let cluster = mock(2).build_cluster("c0", &seed).unwrap();
        assert_eq!(cluster.extra_weak_tools.len(), 1);
        assert_eq!(cluster.extra_queries.len(), 9);
        assert_eq!(cluster.strong_tool, seed.gold_tool);
        assert!(cluster.violations().is_empty());
        assert!(cluster.call_for(QueryRole::Weak, &cluster.strong_tool.name).is_some());
        assert!(cluster.call_for(QueryRole::Weak, &cluster.weak_tool.name).is_some());
        assert!(validate_cluster(&cluster).all_valid, "{:?}", validate_cluster(&cluster));
        assert_eq!(cluster, mock(2).build_cluster("c0", &seed).unwrap());
    }

    #[test]
    fn parallel_build_keeps_seed_order() {
        let seeds = mock_seed_corpus(6, 9);
        let synth = mock(3);
        let serial: Vec<_> = seeds
            .iter()
            .enumerate()
            .map(|(i, s)| synth.build_cluster(&cluster_id(i), s).unwrap())
            .collect();
        let parallel: Vec<_> = synth
            .build_clusters(&seeds, 4)
            .into_iter()
            .map(Result::unwrap)
            .collect();
        assert_eq!(serial, parallel);
    }

    fn arb_tool() -> impl Strategy<Value = ToolSpec> {
        (
            "[a-z]{3,8}_[a-z]{3,8}",
            prop::collection::btree_map("[a-z]{2,6}(_[a-z]{2,6})?", any::<bool>(), 0..6),
        )
            .prop_map(|(name, params)| {
                let mut tool = ToolSpec::new(name, "Generated tool").returns("result", "Result");
                for (p, required) in params {
                    let spec = ParameterSpec::new(p.clone(), format!("The {p}"));
                    tool = tool.param(if required { spec } else { spec.optional() });
                }
                tool
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn annotation_keys_stay_inside_the_schema(
            tool in arb_tool(),
            query in "[A-Za-z ,.\"]{0,80}",
            seed in any::<u64>(),
        ) {
            let call = mock(seed).annotate_call(&query, &tool).unwrap();
            prop_assert_eq!(&call.tool_name, &tool.name);
            for key in call.arguments.keys() {
                prop_assert!(tool.parameter(key).is_some());
            }
            for p in tool.required_parameters() {
                prop_assert!(call.arguments.contains_key(&p.name));
            }
        }
    }
}
