use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use tracing::{info, warn};

use gentool_core::jsonl;
use gentool_core::metrics::{aggregate, rank_analysis, score_instance, RankAnalysis};
use gentool_core::provider::{
    CachedEmbedder, CachedGenerator, Embedder, HashEmbedder, MockGenerator, ProviderError, RemoteConfig,
    RemoteEmbedder, RemoteGenerator, ResponseCache, TextGenerator,
};
use gentool_core::retrieval::{index_tools, related_example_count, ToolIndex};
use gentool_core::scenarios::{cluster_tools, compile_corpus, split_clusters, SplitPlan};
use gentool_core::stats::corpus_stats;
use gentool_core::synthesis::{
    mock_seed_corpus, validate_cluster, SeedPair, SynthesisConfig, SynthesisError, Synthesizer,
};
use gentool_core::textio::{parse_model_output, render_gold, RenderedExample};
use gentool_core::{QueryToolCluster, RankedOutput, Scenario, ToolSpec, TrainingInstance};

use crate::config::{Backend, EmbeddingBackend, RunConfig};

/// Errors with a dedicated exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("none of the {0} predictions could be parsed")]
    NoParseable(usize),
    #[error("{0}")]
    Input(String),
}

/// 1: nothing parseable; 3: remote or synthesis failure; 2: any other
/// malformed input or setting.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(CliError::NoParseable(_)) = cause.downcast_ref::<CliError>() {
            return 1;
        }
        if cause.is::<SynthesisError>() || cause.is::<ProviderError>() {
            return 3;
        }
    }
    2
}

/// One line of a predictions file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Prediction {
    pub instance_id: String,
    pub output: String,
}

fn cache(cfg: &RunConfig) -> anyhow::Result<Option<Arc<ResponseCache>>> {
    cfg.cache_dir
        .as_deref()
        .map(|dir| {
            ResponseCache::open(dir)
                .map(Arc::new)
                .with_context(|| format!("cannot open cache in {}", dir.display()))
        })
        .transpose()
}

fn remote_config(cfg: &RunConfig, endpoint: &Option<String>) -> RemoteConfig {
    let mut rc = RemoteConfig::from_env(endpoint.clone().unwrap_or_default());
    rc.max_in_flight = cfg.max_in_flight;
    rc
}

fn generator(cfg: &RunConfig) -> anyhow::Result<Arc<dyn TextGenerator>> {
    let inner: Arc<dyn TextGenerator> = match cfg.backend {
        Backend::Mock => Arc::new(MockGenerator::new(cfg.seed)),
        Backend::Remote => Arc::new(RemoteGenerator::new(remote_config(cfg, &cfg.endpoint))?),
    };
    Ok(match cache(cfg)? {
        Some(c) => Arc::new(CachedGenerator::new(inner, c)),
        None => inner,
    })
}

fn embedder(cfg: &RunConfig) -> anyhow::Result<Arc<dyn Embedder>> {
    let inner: Arc<dyn Embedder> = match cfg.embedding_backend() {
        EmbeddingBackend::Hash => Arc::new(HashEmbedder::default()),
        EmbeddingBackend::Remote => Arc::new(RemoteEmbedder::new(
            remote_config(cfg, &cfg.embedding_endpoint),
            &cfg.embedding_model,
        )?),
    };
    Ok(match cache(cfg)? {
        Some(c) => Arc::new(CachedEmbedder::new(inner, c)),
        None => inner,
    })
}

fn out(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.out_dir.join(name)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{} is not valid", path.display()))
}

fn read_clusters(path: &Path) -> anyhow::Result<Vec<QueryToolCluster>> {
    let clusters: Vec<QueryToolCluster> = jsonl::read(path)?;
    for c in &clusters {
        let violations = c.violations();
        if !violations.is_empty() {
            return Err(CliError::Input(format!("cluster {}: {}", c.id, violations.join("; "))).into());
        }
    }
    Ok(clusters)
}

pub fn mock_seeds(cfg: &RunConfig, count: usize) -> anyhow::Result<()> {
    let seeds = mock_seed_corpus(count, cfg.seed);
    let path = out(cfg, "seeds.jsonl");
    jsonl::write(&path, &seeds)?;
    info!(count = seeds.len(), path = %path.display(), "wrote seeds");
    Ok(())
}

pub fn synthesize(cfg: &RunConfig, seeds_path: &Path) -> anyhow::Result<()> {
    let seeds: Vec<SeedPair> = jsonl::read(seeds_path)?;
    for (i, seed) in seeds.iter().enumerate() {
        let violations = seed.violations();
        if !violations.is_empty() {
            return Err(CliError::Input(format!(
                "{}:{}: {}",
                seeds_path.display(),
                i + 1,
                violations.join("; ")
            ))
            .into());
        }
    }
    let synth = Synthesizer::new(
        generator(cfg)?,
        SynthesisConfig {
            model_id: cfg.generation_model.clone(),
            ..SynthesisConfig::default()
        },
    );
    let mut clusters = Vec::new();
    let mut first_failure = None;
    for (i, result) in synth.build_clusters(&seeds, cfg.jobs).into_iter().enumerate() {
        match result {
            Ok(c) => clusters.push(c),
            Err(e) => {
                warn!(seed = i + 1, error = %e, "seed skipped");
                first_failure.get_or_insert(e);
            }
        }
    }
    if clusters.is_empty() {
        if let Some(e) = first_failure {
            return Err(anyhow::Error::new(e).context("no cluster could be synthesized"));
        }
    }
    let reports: Vec<_> = clusters.iter().map(validate_cluster).collect();
    let flagged = reports.iter().filter(|r| !r.all_valid).count();
    jsonl::write(&out(cfg, "clusters.jsonl"), &clusters)?;
    jsonl::write(&out(cfg, "quality.jsonl"), &reports)?;
    info!(
        clusters = clusters.len(),
        skipped = seeds.len() - clusters.len(),
        flagged,
        requests = synth.generator().request_count(),
        "synthesis done"
    );
    Ok(())
}

fn build_index(cfg: &RunConfig, clusters: &[QueryToolCluster]) -> anyhow::Result<ToolIndex> {
    let tools = cluster_tools(clusters);
    Ok(index_tools(&tools, &embedder(cfg)?)?)
}

pub fn index(cfg: &RunConfig, clusters_path: &Path) -> anyhow::Result<()> {
    let clusters = read_clusters(clusters_path)?;
    let index = build_index(cfg, &clusters)?;
    let path = out(cfg, "tool_index.json");
    index.save(&path)?;
    info!(tools = index.len(), path = %path.display(), "wrote tool index");
    Ok(())
}

pub fn split(cfg: &RunConfig, clusters_path: &Path) -> anyhow::Result<()> {
    let clusters = read_clusters(clusters_path)?;
    let ids: Vec<&str> = clusters.iter().map(|c| c.id.as_str()).collect();
    let plan = split_clusters(&ids, cfg.split_ratio, cfg.seed)?;
    write_json(&out(cfg, "split_plan.json"), &plan)?;
    info!(
        train = plan.train_cluster_ids.len(),
        test = plan.test_cluster_ids.len(),
        "wrote split plan"
    );
    Ok(())
}

pub fn compile(cfg: &RunConfig, clusters_path: &Path, plan_path: &Path, index_path: Option<&Path>) -> anyhow::Result<()> {
    let clusters = read_clusters(clusters_path)?;
    let plan: SplitPlan = read_json(plan_path)?;
    let index = match index_path {
        Some(p) => ToolIndex::load(p)?,
        None => build_index(cfg, &clusters)?,
    };
    let corpus = compile_corpus(&clusters, &plan, &index, cfg.k)?;
    jsonl::write(&out(cfg, "train.jsonl"), &corpus.train)?;
    for scenario in Scenario::TEST {
        let empty = Vec::new();
        let bucket = corpus.test.get(&scenario).unwrap_or(&empty);
        jsonl::write(&out(cfg, &format!("test_{scenario}.jsonl")), bucket)?;
        info!(%scenario, instances = bucket.len(), "wrote test bucket");
    }
    info!(train = corpus.train.len(), "wrote training instances");
    Ok(())
}

pub fn render(instances_path: &Path, output: &Path) -> anyhow::Result<()> {
    let instances: Vec<TrainingInstance> = jsonl::read(instances_path)?;
    let rendered: Vec<RenderedExample> = instances.iter().map(RenderedExample::new).collect();
    jsonl::write(output, &rendered)?;
    Ok(())
}

pub fn predict_gold(instances_path: &Path, output: &Path) -> anyhow::Result<()> {
    let instances: Vec<TrainingInstance> = jsonl::read(instances_path)?;
    let predictions: Vec<Prediction> = instances
        .iter()
        .map(|i| Prediction {
            instance_id: i.id.clone(),
            output: render_gold(i),
        })
        .collect();
    jsonl::write(output, &predictions)?;
    Ok(())
}

/// Parsed predictions aligned with `instances`; a missing prediction becomes
/// an unparsed output.
fn align(instances: &[TrainingInstance], predictions_path: &Path) -> anyhow::Result<Vec<RankedOutput>> {
    let predictions: Vec<Prediction> = jsonl::read(predictions_path)?;
    let known: HashSet<&str> = instances.iter().map(|i| i.id.as_str()).collect();
    let mut by_id: HashMap<&str, &str> = HashMap::new();
    for p in &predictions {
        if !known.contains(p.instance_id.as_str()) {
            return Err(CliError::Input(format!("prediction for unknown instance `{}`", p.instance_id)).into());
        }
        if by_id.insert(&p.instance_id, &p.output).is_some() {
            return Err(CliError::Input(format!("duplicate prediction for `{}`", p.instance_id)).into());
        }
    }
    let missing = instances.len() - by_id.len();
    if missing > 0 {
        warn!(missing, "instances without a prediction are scored as unparsed");
    }
    Ok(instances
        .iter()
        .map(|i| match by_id.get(i.id.as_str()) {
            Some(text) => parse_model_output(text),
            None => RankedOutput::unparsed(""),
        })
        .collect())
}

pub fn evaluate(cfg: &RunConfig, instances_path: &Path, predictions_path: &Path) -> anyhow::Result<()> {
    let instances: Vec<TrainingInstance> = jsonl::read(instances_path)?;
    let outputs = align(&instances, predictions_path)?;
    let report = aggregate(
        instances
            .iter()
            .zip(&outputs)
            .map(|(inst, pred)| score_instance(inst, pred))
            .collect(),
    );
    write_json(&out(cfg, "report.json"), &report)?;
    print!("{}", report.table());
    if !instances.is_empty() && outputs.iter().all(|o| !o.parse_ok) {
        return Err(CliError::NoParseable(outputs.len()).into());
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct AnalysisOutput {
    #[serde(flatten)]
    rank: RankAnalysis,
    /// Mean number of training gold tools related to each test gold tool.
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_related_examples: Option<f64>,
}

fn gold_spec(inst: &TrainingInstance) -> Option<&ToolSpec> {
    let gold = inst.gold_tool.as_deref()?;
    inst.toolset.iter().find(|t| t.name == gold)
}

pub fn analyze(
    cfg: &RunConfig,
    instances_path: &Path,
    predictions_path: &Path,
    relatedness: Option<(&Path, &Path)>,
) -> anyhow::Result<()> {
    let instances: Vec<TrainingInstance> = jsonl::read(instances_path)?;
    let outputs = align(&instances, predictions_path)?;
    let rank = rank_analysis(&outputs, &instances)?;
    let mean_related_examples = match relatedness {
        None => None,
        Some((train_path, index_path)) => {
            let train: Vec<TrainingInstance> = jsonl::read(train_path)?;
            let index = ToolIndex::load(index_path)?;
            let train_gold: Vec<ToolSpec> = train.iter().filter_map(gold_spec).cloned().collect();
            let mut counts = Vec::new();
            for inst in &instances {
                if let Some(gold) = gold_spec(inst) {
                    counts.push(related_example_count(&train_gold, gold, &index, cfg.relatedness_threshold)?);
                }
            }
            Some(if counts.is_empty() {
                0.0
            } else {
                counts.iter().sum::<usize>() as f64 / counts.len() as f64
            })
        }
    };
    let result = AnalysisOutput {
        rank,
        mean_related_examples,
    };
    println!("{}", serde_json::to_string_pretty(&result)?);
    Ok(())
}

pub fn stats(paths: &[PathBuf]) -> anyhow::Result<()> {
    let mut all = Vec::new();
    let mut per_file = BTreeMap::new();
    for path in paths {
        let instances: Vec<TrainingInstance> = jsonl::read(path)?;
        per_file.insert(path.display().to_string(), corpus_stats(&instances));
        all.extend(instances);
    }
    let combined = corpus_stats(&all);
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({ "combined": combined, "files": per_file }))?
    );
    Ok(())
}
