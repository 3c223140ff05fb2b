//! Corpus evaluation: run the localizer over seeded bugs and summarize
//! Top-N recall, MFR, MAR, reduction, and tree-build cost.

pub mod corpus;
pub mod metrics;
pub mod seed;

use rayon::prelude::*;

use crate::evalkit::corpus::CorpusBug;
use crate::evalkit::metrics::{aggregate, score_bug, BugOutcome, MetricsReport};
use crate::pipeline::{localize_sources, PipelineConfig};

pub use corpus::{load_corpus, parse_truth, render_truth, validate_bug, write_corpus};
pub use metrics::{metrics_json, render_metrics, GroundTruth, TruthVar};
pub use seed::seed_corpus;

/// Localize one bug and score the outcome against its ground truth.
pub fn evaluate_bug(bug: &CorpusBug, config: &PipelineConfig) -> BugOutcome {
    match localize_sources(&bug.buggy, &bug.tests, config) {
        Ok(result) => {
            let mut outcome = score_bug(&bug.truth, Some(&result.ranking));
            outcome.reduction_ratio = result.stats.mean_reduction_ratio;
            outcome.tree_build_seconds = result.stats.tree_build_seconds;
            outcome
        }
        Err(e) => {
            let mut outcome = score_bug(&bug.truth, None);
            outcome.error = Some(e.to_string());
            outcome
        }
    }
}

/// Evaluate a whole corpus under one configuration. Bugs are independent, so
/// they run in parallel; the report lists them in corpus order.
pub fn evaluate_corpus(bugs: &[CorpusBug], config: &PipelineConfig) -> MetricsReport {
    let outcomes: Vec<BugOutcome> = bugs
        .par_iter()
        .map(|bug| evaluate_bug(bug, config))
        .collect();
    aggregate(outcomes)
}
