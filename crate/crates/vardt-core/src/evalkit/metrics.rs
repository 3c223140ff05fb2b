//! Localization quality metrics over a bug corpus: Top-N recall, mean first
//! rank (MFR) and mean average rank (MAR), plus per-bug outcome records.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::ranker::RankedVar;

/// The Top-N cutoffs every report carries.
pub const TOP_NS: [u32; 4] = [1, 3, 5, 10];

/// One fault-relevant variable of a seeded bug. A ranked candidate counts as
/// locating it when the names are equal and the candidate's class lines touch
/// at least one of the cited lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthVar {
    pub name: String,
    pub lines: BTreeSet<u32>,
    /// Which of the four fault-relevance rules justified the entry (1..=4).
    pub rule: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub bug: String,
    pub vars: Vec<TruthVar>,
}

impl TruthVar {
    pub fn matches(&self, candidate: &RankedVar) -> bool {
        self.name == candidate.name && candidate.lines.iter().any(|l| self.lines.contains(l))
    }
}

/// Best (lowest) rank among candidates matching the truth var, if any.
pub fn rank_of_truth(truth: &TruthVar, ranking: &[RankedVar]) -> Option<f64> {
    ranking
        .iter()
        .filter(|c| truth.matches(c))
        .map(|c| c.rank)
        .min_by(|a, b| a.total_cmp(b))
}

/// How one bug fared under localization.
#[derive(Debug, Clone, Serialize)]
pub struct BugOutcome {
    pub bug: String,
    /// Rank of the best-ranked located truth var; None when nothing matched
    /// (or localization errored out).
    pub first_rank: Option<f64>,
    /// Mean rank over the located truth vars.
    pub mean_rank: Option<f64>,
    pub located: usize,
    pub truth_total: usize,
    pub candidates: usize,
    pub reduction_ratio: f64,
    pub tree_build_seconds: f64,
    pub error: Option<String>,
}

/// Score one bug against its ranking. `ranking` is None when localization
/// failed outright; the bug then counts as a miss at every N and is excluded
/// from MFR/MAR.
pub fn score_bug(truth: &GroundTruth, ranking: Option<&[RankedVar]>) -> BugOutcome {
    let mut outcome = BugOutcome {
        bug: truth.bug.clone(),
        first_rank: None,
        mean_rank: None,
        located: 0,
        truth_total: truth.vars.len(),
        candidates: 0,
        reduction_ratio: 0.0,
        tree_build_seconds: 0.0,
        error: None,
    };
    let Some(ranking) = ranking else {
        return outcome;
    };
    outcome.candidates = ranking.len();
    let ranks: Vec<f64> = truth
        .vars
        .iter()
        .filter_map(|t| rank_of_truth(t, ranking))
        .collect();
    outcome.located = ranks.len();
    if !ranks.is_empty() {
        outcome.first_rank = ranks.iter().copied().min_by(f64::total_cmp);
        outcome.mean_rank = Some(ranks.iter().sum::<f64>() / ranks.len() as f64);
    }
    outcome
}

/// Corpus-level summary. Top-N counts bugs whose first located rank is at
/// most N; bugs that located nothing stay misses. MFR and MAR average only
/// over bugs that located at least one truth var.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub outcomes: Vec<BugOutcome>,
    pub top_n: BTreeMap<u32, usize>,
    pub evaluated: usize,
    pub included: usize,
    pub excluded: Vec<String>,
    pub mfr: Option<f64>,
    pub mar: Option<f64>,
    pub mean_reduction_ratio: f64,
    pub mean_tree_build_seconds: f64,
}

pub fn aggregate(outcomes: Vec<BugOutcome>) -> MetricsReport {
    let evaluated = outcomes.len();
    let mut top_n: BTreeMap<u32, usize> = TOP_NS.iter().map(|&n| (n, 0)).collect();
    for o in &outcomes {
        if let Some(first) = o.first_rank {
            for (&n, hits) in top_n.iter_mut() {
                if first <= n as f64 {
                    *hits += 1;
                }
            }
        }
    }
    let included: Vec<&BugOutcome> = outcomes.iter().filter(|o| o.first_rank.is_some()).collect();
    let mean = |xs: Vec<f64>| {
        if xs.is_empty() {
            None
        } else {
            Some(xs.iter().sum::<f64>() / xs.len() as f64)
        }
    };
    let mfr = mean(included.iter().filter_map(|o| o.first_rank).collect());
    let mar = mean(included.iter().filter_map(|o| o.mean_rank).collect());
    let excluded = outcomes
        .iter()
        .filter(|o| o.first_rank.is_none())
        .map(|o| o.bug.clone())
        .collect();
    let scored = outcomes.iter().filter(|o| o.error.is_none()).count();
    let mean_over_scored = |f: fn(&BugOutcome) -> f64| {
        if scored == 0 {
            0.0
        } else {
            outcomes
                .iter()
                .filter(|o| o.error.is_none())
                .map(f)
                .sum::<f64>()
                / scored as f64
        }
    };
    MetricsReport {
        top_n,
        evaluated,
        included: included.len(),
        excluded,
        mfr,
        mar,
        mean_reduction_ratio: mean_over_scored(|o| o.reduction_ratio),
        mean_tree_build_seconds: mean_over_scored(|o| o.tree_build_seconds),
        outcomes,
    }
}

pub fn render_metrics(report: &MetricsReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "BUGS {} ({} with a located fault variable)",
        report.evaluated, report.included
    );
    for (&n, &hits) in &report.top_n {
        let _ = writeln!(out, "TOP-{n} {hits}/{}", report.evaluated);
    }
    let fmt_opt = |v: Option<f64>| match v {
        Some(x) => format!("{x:.4}"),
        None => "undefined".into(),
    };
    let _ = writeln!(out, "MFR {}", fmt_opt(report.mfr));
    let _ = writeln!(out, "MAR {}", fmt_opt(report.mar));
    let _ = writeln!(out, "REDUCTION {:.4}", report.mean_reduction_ratio);
    let _ = writeln!(out, "TREE-BUILD {:.4}s", report.mean_tree_build_seconds);
    for o in &report.outcomes {
        let _ = write!(
            out,
            "BUG {} located {}/{} first {} mean {}",
            o.bug,
            o.located,
            o.truth_total,
            fmt_opt(o.first_rank),
            fmt_opt(o.mean_rank),
        );
        match &o.error {
            Some(e) => {
                let _ = writeln!(out, " error {e}");
            }
            None => {
                let _ = writeln!(out);
            }
        }
    }
    out
}

pub fn metrics_json(report: &MetricsReport) -> String {
    serde_json::to_string_pretty(report).expect("metrics report serializes")
}
