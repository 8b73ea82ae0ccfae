use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::metrics::InstanceScore;

/// Row label for the all-instance means.
pub const OVERALL: &str = "overall";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricMeans {
    pub count: usize,
    pub tool_selection: f64,
    pub param_name: f64,
    pub param_value: f64,
    pub format: f64,
}

impl MetricMeans {
    /// Percent means, folded in the order given.
    fn of<'a>(scores: impl Iterator<Item = &'a InstanceScore>) -> Self {
        let mut sums = [0.0f64; 4];
        let mut count = 0usize;
        for s in scores {
            sums[0] += s.tool_selection;
            sums[1] += s.param_name;
            sums[2] += s.param_value;
            sums[3] += s.format_ok;
            count += 1;
        }
        let pct = |sum: f64| if count == 0 { 0.0 } else { sum / count as f64 * 100.0 };
        Self {
            count,
            tool_selection: pct(sums[0]),
            param_name: pct(sums[1]),
            param_value: pct(sums[2]),
            format: pct(sums[3]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Per-instance scores, sorted by instance id.
    pub records: Vec<InstanceScore>,
    /// Keyed by scenario name, plus [`OVERALL`].
    pub aggregates: BTreeMap<String, MetricMeans>,
}

/// Groups scores by scenario and averages each metric.
pub fn aggregate(mut scores: Vec<InstanceScore>) -> EvalReport {
    scores.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));
    let mut aggregates = BTreeMap::new();
    aggregates.insert(OVERALL.to_string(), MetricMeans::of(scores.iter()));
    let mut scenarios: Vec<_> = scores.iter().map(|s| s.scenario).collect();
    scenarios.sort();
    scenarios.dedup();
    for scenario in scenarios {
        let means = MetricMeans::of(scores.iter().filter(|s| s.scenario == scenario));
        aggregates.insert(scenario.as_str().to_string(), means);
    }
    EvalReport {
        records: scores,
        aggregates,
    }
}

impl EvalReport {
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn overall(&self) -> &MetricMeans {
        &self.aggregates[OVERALL]
    }

    /// True when the stored aggregates equal a fresh fold over the records.
    pub fn is_consistent(&self) -> bool {
        aggregate(self.records.clone()).aggregates == self.aggregates
    }

    /// Fixed-width table: one row per scenario, then the overall row.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<20} {:>6} {:>10} {:>10} {:>11} {:>8}",
            "scenario", "n", "tool_sel", "param_name", "param_value", "format"
        );
        if self.is_empty() {
            let _ = writeln!(out, "{:<20} {:>6}  (no instances)", OVERALL, 0);
            return out;
        }
        let rows = self
            .aggregates
            .iter()
            .map(|(k, v)| (k.as_str(), v))
            .filter(|(k, _)| *k != OVERALL)
            .chain(std::iter::once((OVERALL, self.overall())));
        for (name, m) in rows {
            let _ = writeln!(
                out,
                "{:<20} {:>6} {:>10.2} {:>10.2} {:>11.2} {:>8.2}",
                name, m.count, m.tool_selection, m.param_name, m.param_value, m.format
            );
        }
        out
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.table())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Scenario;

    fn score(id: &str, scenario: Scenario, v: [f64; 4]) -> InstanceScore {
        InstanceScore {
            instance_id: id.into(),
            scenario,
            tool_selection: v[0],
            param_name: v[1],
            param_value: v[2],
            format_ok: v[3],
        }
    }

    #[test]
    fn empty_report_has_zero_count() {
        let r = aggregate(Vec::new());
        assert_eq!(r.overall().count, 0);
        assert!(r.table().contains("(no instances)"));
    }

    #[test]
    fn means_by_scenario_and_overall() {
        let r = aggregate(vec![
            score("b", Scenario::SeenQuerySeenTool, [1.0, 1.0, 0.5, 1.0]),
            score("a", Scenario::SeenQuerySeenTool, [0.0, 0.0, 0.0, 1.0]),
            score("c", Scenario::UnseenQuerySeenTool, [1.0, 0.5, 0.25, 1.0]),
        ]);
        assert_eq!(r.records[0].instance_id, "a");
        let seen = &r.aggregates["seen_q_seen_t"];
        assert_eq!(seen.count, 2);
        assert_eq!(seen.tool_selection, 50.0);
        assert_eq!(seen.param_value, 25.0);
        assert_eq!(r.overall().format, 100.0);
        assert!(r.is_consistent());
        let table = r.table();
        assert!(table.lines().last().unwrap().starts_with("overall"));
        assert!(table.contains("unseen_q_seen_t"));
    }
}
