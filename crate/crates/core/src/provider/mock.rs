//! Offline stand-in for a chat model.
//!
//! The mock reads the structured inputs back out of the three synthesis
//! prompts and answers them the way a cooperative model would, with all
//! randomness drawn from a ChaCha stream keyed by `(seed, model, prompt,
//! variant)`. Its answers are deliberately a little noisy (code fences,
//! preambles, repeated queries) so the parsing and retry paths get exercised.

use std::sync::atomic::{AtomicUsize, Ordering};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use sha2::{Digest, Sha256};

use super::{GenerationRequest, ProviderError, TextGenerator};
use crate::prompts::{section, Template};
use crate::tool::{identifier_words, ReturnField, ToolSpec};

const WEAK_PREFIXES: [&str; 8] = [
    "basic", "simple", "lite", "quick", "mini", "limited", "plain", "compact",
];

const QUERY_FRAMES: [(&str, &str); 5] = [
    ("I need help with a", "."),
    ("Could you handle a", "?"),
    ("Please process a", "."),
    ("Can you take care of a", "?"),
    ("Help me with a", "."),
];

const VALUE_WORDS: [&str; 16] = [
    "harbor", "maple", "orion", "cedar", "summit", "delta", "willow", "ember", "aurora",
    "granite", "lotus", "meadow", "falcon", "coral", "juniper", "atlas",
];

#[derive(Debug)]
pub struct MockGenerator {
    seed: u64,
    calls: AtomicUsize,
}

impl MockGenerator {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            calls: AtomicUsize::new(0),
        }
    }

    fn rng_for(&self, req: &GenerationRequest) -> ChaCha8Rng {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(req.model_id.as_bytes());
        h.update([0]);
        h.update(req.prompt.as_bytes());
        h.update(req.variant.to_le_bytes());
        let digest = h.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest[..32]);
        ChaCha8Rng::from_seed(seed)
    }
}

impl TextGenerator for MockGenerator {
    fn backend_id(&self) -> String {
        format!("mock:{}", self.seed)
    }

    fn generate(&self, request: &GenerationRequest) -> Result<String, ProviderError> {
        request.validate()?;
        self.calls.fetch_add(1, Ordering::Relaxed);
        let mut rng = self.rng_for(request);
        let prompt = request.prompt.as_str();
        let answer = match Template::identify(prompt) {
            Some(Template::ToolGeneration) => weak_tool_answer(prompt, &mut rng),
            Some(Template::QueryGeneration) => queries_answer(prompt, &mut rng),
            Some(Template::CallAnnotation) => annotation_answer(prompt, &mut rng),
            _ => None,
        };
        Ok(answer.unwrap_or_else(|| format!("mock response {:08x}", rng.random::<u32>())))
    }

    fn request_count(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}

fn first_tool(json_text: &str) -> Option<ToolSpec> {
    serde_json::from_str::<Vec<ToolSpec>>(json_text.trim())
        .ok()?
        .into_iter()
        .next()
}

fn weak_tool_answer(prompt: &str, rng: &mut ChaCha8Rng) -> Option<String> {
    let gold = first_tool(section(prompt, "#existing tools#:\n", "\n#new tool#")?)?;
    let base = WEAK_PREFIXES
        .iter()
        .find_map(|p| gold.name.strip_prefix(&format!("{p}_")))
        .unwrap_or(&gold.name)
        .to_string();
    let start = rng.random_range(0..WEAK_PREFIXES.len());
    let (prefix, name) = (0..WEAK_PREFIXES.len())
        .map(|i| WEAK_PREFIXES[(start + i) % WEAK_PREFIXES.len()])
        .map(|p| (p, format!("{p}_{base}")))
        .find(|(_, n)| *n != gold.name)?;

    let mut weak = ToolSpec::new(
        name,
        format!(
            "{}{} {} tool with limited functionality",
            prefix[..1].to_uppercase(),
            &prefix[1..],
            identifier_words(&base).join(" ")
        ),
    );
    for (i, p) in gold.parameters.iter().enumerate() {
        if i == 0 || rng.random_bool(0.6) {
            weak.parameters.push(p.clone());
        }
    }
    let keep = if gold.returns.len() >= 2 {
        gold.returns.len() - 1
    } else {
        gold.returns.len()
    };
    weak.returns = gold.returns[..keep].to_vec();
    if weak.returns.is_empty() {
        weak.returns.push(ReturnField {
            name: "result".into(),
            description: "Result summary".into(),
        });
    }

    let body = weak.to_json_pretty();
    Some(match rng.random_range(0..10) {
        0..=2 => format!("```json\n{body}\n```"),
        3 => format!("Here is the new tool:\n{body}"),
        _ => body,
    })
}

fn random_value(rng: &mut ChaCha8Rng) -> String {
    const ALNUM: &[u8] = b"ABCDEFGHJKLMNPQRSTUVWXYZ23456789";
    match rng.random_range(0..3) {
        0 => (0..6)
            .map(|_| ALNUM[rng.random_range(0..ALNUM.len())] as char)
            .collect(),
        1 => format!(
            "{} {}",
            VALUE_WORDS.choose(rng).unwrap(),
            rng.random_range(10..1000)
        ),
        _ => format!(
            "{}-{}",
            VALUE_WORDS.choose(rng).unwrap(),
            (0..4)
                .map(|_| ALNUM[rng.random_range(0..ALNUM.len())] as char)
                .collect::<String>()
        ),
    }
}

/// A request sentence with `the pickup time is "..."` phrases for every
/// required parameter plus a random share of optional ones.
fn describe_request(tool: &ToolSpec, rng: &mut ChaCha8Rng) -> String {
    let mut mentions: Vec<String> = Vec::new();
    for p in &tool.parameters {
        if p.required || rng.random_bool(0.5) {
            mentions.push(format!(
                "the {} is \"{}\"",
                identifier_words(&p.name).join(" "),
                random_value(rng)
            ));
        }
    }
    if mentions.is_empty() {
        mentions.push(format!("the reference is \"{}\"", random_value(rng)));
    }
    let joined = match mentions.len() {
        1 => mentions.remove(0),
        _ => {
            let last = mentions.pop().unwrap();
            format!("{} and {}", mentions.join(", "), last)
        }
    };
    let (opener, punct) = QUERY_FRAMES.choose(rng).unwrap();
    let subject = tool.description.trim().trim_end_matches('.').to_lowercase();
    format!("{opener} {subject} request where {joined}{punct}")
}

fn queries_answer(prompt: &str, rng: &mut ChaCha8Rng) -> Option<String> {
    // The weak set is parsed only to reject malformed prompts; questions are
    // written for the strong set.
    first_tool(section(prompt, "#weak tool sets#: ", "\n#strong tool sets#: ")?)?;
    let strong = first_tool(section(prompt, "#strong tool sets#: ", "\n#output#:")?)?;
    let mut queries: Vec<String> = Vec::with_capacity(10);
    for i in 0..10 {
        if i > 0 && rng.random_bool(0.1) {
            // A near-verbatim repeat that only differs in whitespace.
            let again = queries[i - 1].replacen(' ', "  ", 1);
            queries.push(again);
        } else {
            queries.push(describe_request(&strong, rng));
        }
    }
    Some(serde_json::to_string_pretty(&queries).expect("strings serialize"))
}

fn ascii_find_ci(haystack: &str, needle: &str) -> Option<usize> {
    haystack
        .to_ascii_lowercase()
        .find(&needle.to_ascii_lowercase())
}

/// The value a cooperative annotator would read out of `query` for a
/// parameter whose words are `words`. Always a substring of the query.
fn read_value(query: &str, words: &[String], required: bool, rng: &mut ChaCha8Rng) -> Option<String> {
    let phrase = format!("{} is \"", words.join(" "));
    if let Some(pos) = ascii_find_ci(query, &phrase) {
        let start = pos + phrase.len();
        if let Some(len) = query[start..].find('"') {
            return Some(query[start..start + len].to_string());
        }
    }
    if !required {
        return None;
    }
    let tokens: Vec<&str> = query.split_whitespace().collect();
    let clean = |t: &str| {
        t.trim_matches(|c: char| !c.is_alphanumeric())
            .to_string()
    };
    if let Some(last) = words.last() {
        for pair in tokens.windows(2) {
            if clean(pair[0]).eq_ignore_ascii_case(last) {
                let v = clean(pair[1]);
                if !v.is_empty() {
                    return Some(v);
                }
            }
        }
    }
    let content: Vec<String> = tokens
        .iter()
        .map(|t| clean(t))
        .filter(|t| t.chars().count() >= 3)
        .collect();
    match content.choose(rng) {
        Some(v) => Some(v.clone()),
        None => Some(query.trim().to_string()),
    }
}

fn annotation_answer(prompt: &str, rng: &mut ChaCha8Rng) -> Option<String> {
    let query = section(prompt, "#user query#:\n", "\n#toolsets#:\n")?;
    let tool = first_tool(section(prompt, "#toolsets#:\n", "\n#output#:")?)?;
    let mut arguments = serde_json::Map::new();
    for p in &tool.parameters {
        if let Some(v) = read_value(query, &identifier_words(&p.name), p.required, rng) {
            arguments.insert(p.name.clone(), json!(v));
        }
    }
    let answer = json!({"tool_name": tool.name, "arguments": arguments});
    Some(serde_json::to_string_pretty(&answer).expect("json serializes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompts::{call_annotation_prompt, query_generation_prompt, tool_generation_prompt};
    use crate::tool::ParameterSpec;

    fn restaurant_tool() -> ToolSpec {
        ToolSpec::new("restaurant_finder", "Find top restaurants in a city with their cuisines")
            .param(ParameterSpec::new("city", "City name"))
            .param(ParameterSpec::new("max_results", "How many restaurants").optional())
            .returns("restaurants", "Top restaurants")
            .returns("cuisines", "Cuisine served by each restaurant")
    }

    fn ask(seed: u64, prompt: String, variant: u32) -> String {
        MockGenerator::new(seed)
            .generate(&GenerationRequest::new(prompt, "mock-model").variant(variant))
            .unwrap()
    }

    #[test]
    fn weak_tool_drops_last_return_field() {
        let q = "What are the best restaurants in New York City, and what cuisines do they serve?";
        let text = ask(3, tool_generation_prompt(q, &restaurant_tool()), 0);
        let weak: ToolSpec =
            serde_json::from_value(crate::textio::extract::extract_json(&text).unwrap()).unwrap();
        assert_ne!(weak.name, "restaurant_finder");
        assert!(weak.returns.iter().all(|r| r.name != "cuisines"));
        assert_eq!(weak.parameters[0].name, "city");
    }

    #[test]
    fn same_seed_same_answer_different_seed_differs() {
        let prompt = query_generation_prompt(&restaurant_tool(), &restaurant_tool());
        assert_eq!(ask(1, prompt.clone(), 0), ask(1, prompt.clone(), 0));
        assert_ne!(ask(1, prompt.clone(), 0), ask(2, prompt.clone(), 0));
        assert_ne!(ask(1, prompt.clone(), 0), ask(1, prompt, 1));
    }

    #[test]
    fn annotation_reads_quoted_values() {
        let q = "Please process a find restaurants request where the city is \"maple 42\".";
        let text = ask(9, call_annotation_prompt(q, &restaurant_tool()), 0);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["tool_name"], "restaurant_finder");
        assert_eq!(v["arguments"]["city"], "maple 42");
        assert!(v["arguments"].get("max_results").is_none());
    }

    #[test]
    fn annotation_falls_back_to_the_word_after_the_parameter_name() {
        let tool = ToolSpec::new("simple_car_rental", "Basic Car Rental Service")
            .param(ParameterSpec::new("carCode", "Car code"))
            .returns("status", "Rental status");
        let q = "I need to know the exact pick-up and drop-off times for a car rental reservation with the code ABC123, including any grace periods.";
        let text = ask(0, call_annotation_prompt(q, &tool), 0);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["arguments"]["carCode"], "ABC123");
    }

    #[test]
    fn unknown_prompt_gets_a_generic_reply() {
        assert!(ask(0, "hello there".into(), 0).starts_with("mock response "));
    }
}
