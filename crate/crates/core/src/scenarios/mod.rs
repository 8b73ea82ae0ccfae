//! Cluster split, training-pair construction, test-scenario compilation,
//! and rank labels.

mod build;
mod rank;
mod soundness;
mod split;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::instance::{QueryRole, Scenario, TrainingInstance};
use crate::retrieval::RetrievalError;

pub use build::{
    build_weak_to_strong, build_zero_to_one, cluster_tools, compile_corpus,
    compile_test_scenarios, BuildContext, Role, TestScenarios,
};
pub use rank::{rank_label_for, LabelError};
pub use soundness::soundness_violations;
pub use split::{split_clusters, SplitError, SplitPlan, DEFAULT_SPLIT_RATIO};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error("cluster {cluster}: {source}")]
    Retrieval {
        cluster: String,
        #[source]
        source: RetrievalError,
    },
    #[error("cluster {cluster}: {source}")]
    Label {
        cluster: String,
        #[source]
        source: LabelError,
    },
    #[error("cluster {cluster} has no annotated call for the {query:?} query on `{tool}`")]
    MissingCall {
        cluster: String,
        query: QueryRole,
        tool: String,
    },
    #[error("instance {id} is invalid: {}", .violations.join("; "))]
    Invalid { id: String, violations: Vec<String> },
}

/// Training instances plus the four test buckets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioCorpus {
    pub train: Vec<TrainingInstance>,
    pub test: BTreeMap<Scenario, Vec<TrainingInstance>>,
    /// Role each test cluster played.
    pub roles: BTreeMap<String, Role>,
}

impl ScenarioCorpus {
    pub fn test_instances(&self) -> impl Iterator<Item = &TrainingInstance> {
        self.test.values().flatten()
    }

    pub fn all_instances(&self) -> impl Iterator<Item = &TrainingInstance> {
        self.train.iter().chain(self.test_instances())
    }

    /// Instance-level invariant violations, and bucket/tag mismatches.
    pub fn violations(&self, k: usize) -> Vec<String> {
        let mut out = Vec::new();
        for inst in self.all_instances() {
            for v in inst.violations(k) {
                out.push(format!("{}: {v}", inst.id));
            }
        }
        for inst in &self.train {
            if inst.scenario != Scenario::PureTrain {
                out.push(format!("{}: training instance tagged {}", inst.id, inst.scenario));
            }
        }
        for (scenario, bucket) in &self.test {
            for inst in bucket {
                if inst.scenario != *scenario {
                    out.push(format!("{}: tagged {} but filed under {scenario}", inst.id, inst.scenario));
                }
            }
        }
        out
    }
}
