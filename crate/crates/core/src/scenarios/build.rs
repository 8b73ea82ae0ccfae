use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{rank_label_for, ScenarioCorpus, ScenarioError, SplitError, SplitPlan};
use crate::instance::{PairType, QueryRole, QueryToolCluster, Scenario, TrainingInstance};
use crate::retrieval::{build_toolset, build_toolset_around, ToolIndex};
use crate::tool::{normalize_name, ToolCall, ToolSpec};

/// Part a test cluster plays in scenario compilation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Supplies seen-query/unseen-tool instances for both of its tools.
    C2,
    /// Supplies the unseen-query buckets and a second seen-query case.
    C3,
    /// Supplies the seen-query/seen-tool bucket.
    C4,
}

const ROLES: [Role; 3] = [Role::C2, Role::C3, Role::C4];

/// Shared inputs for instance construction.
#[derive(Debug, Clone)]
pub struct BuildContext<'a> {
    pub index: &'a ToolIndex,
    pub k: usize,
    /// Tools that must stay out of every training toolset.
    pub held_out: BTreeSet<String>,
}

impl<'a> BuildContext<'a> {
    pub fn new(index: &'a ToolIndex, k: usize) -> Self {
        Self {
            index,
            k,
            held_out: BTreeSet::new(),
        }
    }
}

/// Every tool of every cluster, in cluster order.
pub fn cluster_tools(clusters: &[QueryToolCluster]) -> Vec<ToolSpec> {
    clusters.iter().flat_map(|c| c.tools().cloned()).collect()
}

/// Builder for the instances of one cluster.
struct Builder<'c, 'a> {
    cluster: &'c QueryToolCluster,
    ctx: &'c BuildContext<'a>,
    out: Vec<TrainingInstance>,
}

/// How a toolset is assembled for one instance.
enum Toolset<'t> {
    /// `required` first, distractors by similarity to the first of them.
    With(&'t [&'t ToolSpec]),
    /// Distractors only, by similarity to this tool.
    Around(&'t ToolSpec),
}

impl<'c, 'a> Builder<'c, 'a> {
    fn new(cluster: &'c QueryToolCluster, ctx: &'c BuildContext<'a>) -> Self {
        Self {
            cluster,
            ctx,
            out: Vec::new(),
        }
    }

    fn retrieval_error(&self, source: crate::retrieval::RetrievalError) -> ScenarioError {
        ScenarioError::Retrieval {
            cluster: self.cluster.id.clone(),
            source,
        }
    }

    /// Cluster tools not listed in `required`, plus the held-out set when
    /// the toolset feeds training.
    fn exclusions(&self, required: &[&ToolSpec], training: bool) -> BTreeSet<String> {
        let required: BTreeSet<&str> = required.iter().map(|t| normalize_name(&t.name)).collect();
        let mut ex: BTreeSet<String> = self
            .cluster
            .tool_names()
            .into_iter()
            .filter(|n| !required.contains(n.as_str()))
            .collect();
        if training {
            ex.extend(self.ctx.held_out.iter().cloned());
        }
        ex
    }

    fn toolset(&self, spec: Toolset<'_>, training: bool) -> Result<Vec<ToolSpec>, ScenarioError> {
        let k = self.ctx.k;
        match spec {
            Toolset::With(required) => {
                let owned: Vec<ToolSpec> = required.iter().map(|t| (*t).clone()).collect();
                build_toolset(&owned, &self.exclusions(required, training), self.ctx.index, k)
            }
            Toolset::Around(anchor) => {
                build_toolset_around(&anchor.name, &[], &self.exclusions(&[], training), self.ctx.index, k)
            }
        }
        .map_err(|e| self.retrieval_error(e))
    }

    fn call(&self, query: QueryRole, tool: &ToolSpec) -> Result<ToolCall, ScenarioError> {
        self.cluster
            .call_for(query, &tool.name)
            .cloned()
            .ok_or_else(|| ScenarioError::MissingCall {
                cluster: self.cluster.id.clone(),
                query,
                tool: tool.name.clone(),
            })
    }

    /// Appends one instance and returns its toolset for reuse.
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        tag: &str,
        toolset: Vec<ToolSpec>,
        query: QueryRole,
        gold: Option<&ToolSpec>,
        weak: Option<&ToolSpec>,
        pair_type: PairType,
        scenario: Scenario,
    ) -> Result<Vec<ToolSpec>, ScenarioError> {
        let gold_call = match gold {
            Some(tool) => self.call(query, tool)?,
            None => ToolCall::sentinel(),
        };
        let rank_label = rank_label_for(
            &toolset,
            gold.map(|t| t.name.as_str()),
            weak.map(|t| t.name.as_str()),
        )
        .map_err(|source| ScenarioError::Label {
            cluster: self.cluster.id.clone(),
            source,
        })?;
        let instance = TrainingInstance {
            id: format!("{}-{tag}", self.cluster.id),
            toolset: toolset.clone(),
            query: self.cluster.query(query).to_string(),
            gold_tool: gold.map(|t| t.name.clone()),
            gold_call,
            rank_label,
            pair_type,
            scenario,
            cluster_id: self.cluster.id.clone(),
        };
        let violations = instance.violations(self.ctx.k);
        if !violations.is_empty() {
            return Err(ScenarioError::Invalid {
                id: instance.id,
                violations,
            });
        }
        self.out.push(instance);
        Ok(toolset)
    }
}

/// Four instances: for each of `(q, t)` and `(q', t')`, one with no
/// applicable tool and one with the tool present.
pub fn build_zero_to_one(
    cluster: &QueryToolCluster,
    ctx: &BuildContext<'_>,
) -> Result<Vec<TrainingInstance>, ScenarioError> {
    let mut b = Builder::new(cluster, ctx);
    let (t, t_weak) = (&cluster.strong_tool, &cluster.weak_tool);
    let train = Scenario::PureTrain;
    for (n, (query, tool)) in [(QueryRole::Strong, t), (QueryRole::Weak, t_weak)].into_iter().enumerate() {
        let none = b.toolset(Toolset::Around(tool), true)?;
        b.push(&format!("z{}", 2 * n), none, query, None, None, PairType::ZeroToOne, train)?;
        let with = b.toolset(Toolset::With(&[tool]), true)?;
        b.push(&format!("z{}", 2 * n + 1), with, query, Some(tool), None, PairType::ZeroToOne, train)?;
    }
    Ok(b.out)
}

/// Two instances for `q`: the weak tool alone solves it, then the strong
/// tool is added and must win.
pub fn build_weak_to_strong(
    cluster: &QueryToolCluster,
    ctx: &BuildContext<'_>,
) -> Result<Vec<TrainingInstance>, ScenarioError> {
    let mut b = Builder::new(cluster, ctx);
    let (t, t_weak) = (&cluster.strong_tool, &cluster.weak_tool);
    let q = QueryRole::Strong;
    let train = Scenario::PureTrain;
    let weak_only = b.toolset(Toolset::With(&[t_weak]), true)?;
    b.push("w0", weak_only, q, Some(t_weak), None, PairType::WeakToStrong, train)?;
    let both = b.toolset(Toolset::With(&[t, t_weak]), true)?;
    b.push("w1", both, q, Some(t), Some(t_weak), PairType::WeakToStrong, train)?;
    Ok(b.out)
}

/// Instances a test cluster contributes: auxiliary training instances
/// (tagged `pure_train`) and test instances.
fn build_test_cluster(
    cluster: &QueryToolCluster,
    role: Role,
    ctx: &BuildContext<'_>,
) -> Result<Vec<TrainingInstance>, ScenarioError> {
    use PairType::{TestOnly, WeakToStrong, ZeroToOne};
    use QueryRole::{Strong as Q, Weak as QW};
    use Scenario::*;

    let mut b = Builder::new(cluster, ctx);
    let (t, tw) = (&cluster.strong_tool, &cluster.weak_tool);
    match role {
        Role::C2 => {
            let none = b.toolset(Toolset::Around(t), true)?;
            b.push("a0", none, Q, None, None, ZeroToOne, PureTrain)?;
            let strong = b.toolset(Toolset::With(&[t]), false)?;
            b.push("t0", strong, Q, Some(t), None, TestOnly, SeenQueryUnseenTool)?;
            let weak = b.toolset(Toolset::With(&[tw]), false)?;
            b.push("t1", weak, Q, Some(tw), None, TestOnly, SeenQueryUnseenTool)?;
        }
        Role::C3 => {
            let weak_set = b.toolset(Toolset::With(&[tw]), true)?;
            let weak_set = b.push("a0", weak_set, Q, Some(tw), None, WeakToStrong, PureTrain)?;
            let both = b.toolset(Toolset::With(&[t, tw]), false)?;
            b.push("t0", both, Q, Some(t), Some(tw), TestOnly, SeenQueryUnseenTool)?;
            let strong = b.toolset(Toolset::With(&[t]), false)?;
            b.push("t1", strong, QW, Some(t), None, TestOnly, UnseenQueryUnseenTool)?;
            let weak_set = b.push("t2", weak_set, QW, Some(tw), None, TestOnly, UnseenQuerySeenTool)?;
            // The same listing with `t'` swapped for the next-best distractor.
            let kept: Vec<&ToolSpec> = weak_set
                .iter()
                .filter(|x| !x.is_sentinel() && x.name != tw.name)
                .collect();
            let scrubbed = build_toolset_around(
                &tw.name,
                &kept.iter().map(|x| (*x).clone()).collect::<Vec<_>>(),
                &b.exclusions(&[], false),
                ctx.index,
                ctx.k,
            )
            .map_err(|e| b.retrieval_error(e))?;
            b.push("t3", scrubbed, QW, None, None, TestOnly, UnseenQuerySeenTool)?;
        }
        Role::C4 => {
            let weak = b.toolset(Toolset::With(&[tw]), true)?;
            b.push("a0", weak, Q, Some(tw), None, WeakToStrong, PureTrain)?;
            let strong = b.toolset(Toolset::With(&[t]), true)?;
            b.push("a1", strong, QW, Some(t), None, ZeroToOne, PureTrain)?;
            let both = b.toolset(Toolset::With(&[t, tw]), false)?;
            b.push("t0", both, Q, Some(t), Some(tw), TestOnly, SeenQuerySeenTool)?;
        }
    }
    Ok(b.out)
}

/// Assigns C2/C3/C4 round-robin over the test clusters after a seeded
/// shuffle.
fn assign_roles(test_ids: &BTreeSet<String>, seed: u64) -> BTreeMap<String, Role> {
    let mut ids: Vec<&String> = test_ids.iter().collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x726f_6c65));
    ids.into_iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), ROLES[i % ROLES.len()]))
        .collect()
}

/// Tools whose test instances require them to be unseen in training.
fn held_out_tools(clusters: &[&QueryToolCluster], roles: &BTreeMap<String, Role>) -> BTreeSet<String> {
    let mut held = BTreeSet::new();
    for c in clusters {
        match roles.get(&c.id) {
            Some(Role::C2) => {
                held.insert(normalize_name(&c.strong_tool.name).to_string());
                held.insert(normalize_name(&c.weak_tool.name).to_string());
            }
            Some(Role::C3) => {
                held.insert(normalize_name(&c.strong_tool.name).to_string());
            }
            _ => {}
        }
    }
    held
}

/// Auxiliary training instances, test buckets, and the role of each test
/// cluster.
pub type TestScenarios = (Vec<TrainingInstance>, BTreeMap<Scenario, Vec<TrainingInstance>>, BTreeMap<String, Role>);

/// Test buckets plus auxiliary training instances for the given test
/// clusters. `ctx.held_out` is extended with the tools these clusters need
/// kept out of training.
pub fn compile_test_scenarios(
    test_clusters: &[&QueryToolCluster],
    ctx: &mut BuildContext<'_>,
    seed: u64,
) -> Result<TestScenarios, ScenarioError> {
    if test_clusters.len() < ROLES.len() {
        return Err(SplitError::TooFewTestClusters(test_clusters.len()).into());
    }
    let ids: BTreeSet<String> = test_clusters.iter().map(|c| c.id.clone()).collect();
    let roles = assign_roles(&ids, seed);
    ctx.held_out.extend(held_out_tools(test_clusters, &roles));
    let ctx: &BuildContext<'_> = ctx;
    let built: Vec<Vec<TrainingInstance>> = test_clusters
        .par_iter()
        .map(|c| build_test_cluster(c, roles[&c.id], ctx))
        .collect::<Result<_, _>>()?;
    let mut aux = Vec::new();
    let mut test: BTreeMap<Scenario, Vec<TrainingInstance>> =
        Scenario::TEST.into_iter().map(|s| (s, Vec::new())).collect();
    for inst in built.into_iter().flatten() {
        if inst.scenario == Scenario::PureTrain {
            aux.push(inst);
        } else {
            test.entry(inst.scenario).or_default().push(inst);
        }
    }
    Ok((aux, test, roles))
}

/// The full corpus for a split: six instances per training cluster plus the
/// test clusters' auxiliary training instances, and the four test buckets.
/// Instances are ordered by cluster id, then construction order.
pub fn compile_corpus(
    clusters: &[QueryToolCluster],
    plan: &SplitPlan,
    index: &ToolIndex,
    k: usize,
) -> Result<ScenarioCorpus, ScenarioError> {
    let ids: Vec<&str> = clusters.iter().map(|c| c.id.as_str()).collect();
    plan.check_against(&ids)?;
    let mut sorted: Vec<&QueryToolCluster> = clusters.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let (train_clusters, test_clusters): (Vec<&QueryToolCluster>, Vec<&QueryToolCluster>) =
        sorted.into_iter().partition(|c| plan.train_cluster_ids.contains(&c.id));

    let mut ctx = BuildContext::new(index, k);
    let (aux, test, roles) = compile_test_scenarios(&test_clusters, &mut ctx, plan.rng_seed)?;
    let ctx = &ctx;
    let pure: Vec<Vec<TrainingInstance>> = train_clusters
        .par_iter()
        .map(|c| {
            let mut v = build_zero_to_one(c, ctx)?;
            v.extend(build_weak_to_strong(c, ctx)?);
            Ok(v)
        })
        .collect::<Result<_, ScenarioError>>()?;
    let mut train: Vec<TrainingInstance> = pure.into_iter().flatten().chain(aux).collect();
    // Stable: keeps construction order within a cluster.
    train.sort_by(|a, b| a.cluster_id.cmp(&b.cluster_id));
    Ok(ScenarioCorpus { train, test, roles })
}
