use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_SPLIT_RATIO: f64 = 0.67;
/// Clusters needed before a split is meaningful: one for training plus the
/// three test roles.
pub const MIN_CLUSTERS: usize = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SplitError {
    #[error("need at least {MIN_CLUSTERS} clusters, found {0}")]
    TooFewClusters(usize),
    #[error("split ratio must be in (0, 1], got {0}")]
    BadRatio(f64),
    #[error("cluster id `{0}` appears more than once")]
    DuplicateId(String),
    #[error("test compilation needs at least 3 test clusters, found {0}")]
    TooFewTestClusters(usize),
    #[error("split plan does not match the clusters: {0}")]
    PlanMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train_cluster_ids: BTreeSet<String>,
    pub test_cluster_ids: BTreeSet<String>,
    pub rng_seed: u64,
    pub ratio: f64,
}

/// Uniform random partition of cluster ids: `round(ratio * n)` go to
/// training, the rest to test.
pub fn split_clusters<S: AsRef<str>>(ids: &[S], ratio: f64, seed: u64) -> Result<SplitPlan, SplitError> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(SplitError::BadRatio(ratio));
    }
    if ids.len() < MIN_CLUSTERS {
        return Err(SplitError::TooFewClusters(ids.len()));
    }
    let mut sorted: Vec<&str> = ids.iter().map(AsRef::as_ref).collect();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(SplitError::DuplicateId(w[0].to_string()));
    }
    sorted.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((ratio * sorted.len() as f64).round() as usize).min(sorted.len());
    let (train, test) = sorted.split_at(n_train);
    Ok(SplitPlan {
        train_cluster_ids: train.iter().map(|s| s.to_string()).collect(),
        test_cluster_ids: test.iter().map(|s| s.to_string()).collect(),
        rng_seed: seed,
        ratio,
    })
}

impl SplitPlan {
    /// Checks that the plan partitions exactly `ids`.
    pub fn check_against<S: AsRef<str>>(&self, ids: &[S]) -> Result<(), SplitError> {
        if let Some(id) = self.train_cluster_ids.intersection(&self.test_cluster_ids).next() {
            return Err(SplitError::PlanMismatch(format!("`{id}` is in both sets")));
        }
        let given: BTreeSet<&str> = ids.iter().map(AsRef::as_ref).collect();
        if given.len() != ids.len() {
            return Err(SplitError::PlanMismatch("duplicate cluster ids".into()));
        }
        let planned: BTreeSet<&str> = self
            .train_cluster_ids
            .iter()
            .chain(&self.test_cluster_ids)
            .map(String::as_str)
            .collect();
        if let Some(id) = given.symmetric_difference(&planned).next() {
            return Err(SplitError::PlanMismatch(format!("`{id}` is not on both sides")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i:03}")).collect()
    }

    #[test]
    fn hundred_clusters_split_67_33() {
        let plan = split_clusters(&ids(100), 0.67, 1).unwrap();
        assert_eq!(plan.train_cluster_ids.len(), 67);
        assert_eq!(plan.test_cluster_ids.len(), 33);
        assert_eq!(plan, split_clusters(&ids(100), 0.67, 1).unwrap());
        assert_ne!(plan, split_clusters(&ids(100), 0.67, 2).unwrap());
        plan.check_against(&ids(100)).unwrap();
        assert!(plan.check_against(&ids(99)).is_err());
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(split_clusters(&ids(3), 0.67, 0), Err(SplitError::TooFewClusters(3)));
        assert!(matches!(split_clusters(&ids(10), 0.0, 0), Err(SplitError::BadRatio(_))));
        assert!(matches!(split_clusters(&ids(10), f64::NAN, 0), Err(SplitError::BadRatio(_))));
        let all = split_clusters(&ids(10), 1.0, 0).unwrap();
        assert!(all.test_cluster_ids.is_empty());
        let dup = ["a", "b", "c", "a"];
        assert_eq!(split_clusters(&dup, 0.5, 0), Err(SplitError::DuplicateId("a".into())));
    }

    proptest! {
        #[test]
        fn partition_is_disjoint_complete_and_sized(n in 4usize..200, ratio in 0.01f64..1.0, seed in any::<u64>()) {
            let ids = ids(n);
            let plan = split_clusters(&ids, ratio, seed).unwrap();
            prop_assert!(plan.check_against(&ids).is_ok());
            let train = plan.train_cluster_ids.len() as f64;
            prop_assert!((train - ratio * n as f64).abs() <= 1.0);
        }
    }
}
