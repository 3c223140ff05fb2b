//! End-to-end localization: from program and suite sources to a ranked
//! variable list.
//!
//! The run has two execution phases. A coverage pass with no value
//! recording feeds the method-level suspiciousness ranking and the slicing
//! criteria. A second pass records values only for the sliced occurrences
//! of the methods that survived the per-method test gate, and those
//! recordings become the feature tables the trees grow on. Methods are
//! analyzed in suspiciousness order; any skipped method leaves a
//! diagnostic rather than failing the run.

use std::collections::BTreeSet;
use std::time::Instant;

use thiserror::Error;

use crate::dtree::{build_feature_table, build_model, dep_scores, render_model, FeatureTable, Tree};
use crate::lang::{
    analyze, build_classes, build_dependence_graph, parse_program, parse_suite, ParseError,
    Program, TestSuite,
};
use crate::ranker::{
    dynamic_scores, rank_variables, ranking_json, render_ranking, weight_by_method, RankedVar,
    ScoredVar,
};
use crate::runtime::{run_suite, write_traces, ObserveMode, RunConfig, TestTrace};
use crate::sbfl::{coverage_matrix, rank_methods, render_method_ranking, RankedMethod, SbflFormula};
use crate::slicer::{failed_covered_occurrences, slice_for_failures, Slice};
use crate::lang::transform_gsa;

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Dependency penalty base; a candidate's weight is factor^|dependents|.
    pub dep_factor: f64,
    /// How many of the top-ranked methods get variable-level analysis.
    pub top_k_methods: usize,
    pub sbfl_formula: SbflFormula,
    /// Off: candidates are every occurrence on failure-covered lines.
    pub slicing: bool,
    /// Off: no trees are built and ranking falls back to the dependency
    /// weight times the method score.
    pub tree_model: bool,
    /// Off: the dependency factor is treated as 1.0 everywhere.
    pub dep_penalty: bool,
    /// Off: the final score stays the discriminative score.
    pub method_score: bool,
    /// Oracle mode: analyze exactly this method with method score 1.0.
    pub method_known: Option<String>,
    /// Per-test execution step budget.
    pub budget: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            dep_factor: 0.8,
            top_k_methods: 10,
            sbfl_formula: SbflFormula::Ochiai,
            slicing: true,
            tree_model: true,
            dep_penalty: true,
            method_score: true,
            method_known: None,
            budget: 1_000_000,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.dep_factor > 0.0 && self.dep_factor <= 1.0) {
            return Err(format!(
                "dependency factor must lie in (0, 1], got {}",
                self.dep_factor
            ));
        }
        if self.top_k_methods == 0 {
            return Err("top-k must be at least 1".into());
        }
        if self.budget == 0 {
            return Err("step budget must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    /// The inputs parsed but the run cannot proceed: no failing test, no
    /// analyzable method, or an invalid configuration.
    #[error("{0}")]
    Gate(String),
}

#[derive(Debug)]
pub struct MethodAnalysis {
    pub method: String,
    pub method_score: f64,
    /// Candidate lines and occurrences. With slicing off this holds every
    /// occurrence on lines the failing tests executed.
    pub slice: Slice,
    /// Occurrences on failure-covered lines, the pool slicing prunes.
    pub failed_covered: usize,
    /// 1 - sliced/failed-covered; 0 when slicing is off or nothing covered.
    pub reduction_ratio: f64,
    pub graph_export: String,
    pub table: FeatureTable,
    pub model: Vec<Tree>,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LocalizeStats {
    pub analyzed_methods: usize,
    pub mean_reduction_ratio: f64,
    pub tree_build_seconds: f64,
}

#[derive(Debug)]
pub struct LocalizeResult {
    pub program: Program,
    pub suite: TestSuite,
    /// Full method ranking, not truncated to top-k.
    pub method_ranking: Vec<RankedMethod>,
    /// Analyzed methods in suspiciousness order.
    pub methods: Vec<MethodAnalysis>,
    pub coverage: Vec<TestTrace>,
    pub profile: Vec<TestTrace>,
    pub ranking: Vec<RankedVar>,
    pub diagnostics: Vec<String>,
    pub stats: LocalizeStats,
}

pub fn localize_sources(
    program_src: &str,
    tests_src: &str,
    cfg: &PipelineConfig,
) -> Result<LocalizeResult, PipelineError> {
    let program = transform_gsa(&parse_program(program_src)?);
    let suite = parse_suite(tests_src)?;
    localize(program, suite, cfg)
}

struct PreparedMethod {
    method: String,
    score: f64,
    graph: crate::lang::DependencyGraph,
    classes: crate::lang::EquivalenceClasses,
    slice: Slice,
    failed_covered: usize,
}

pub fn localize(
    program: Program,
    suite: TestSuite,
    cfg: &PipelineConfig,
) -> Result<LocalizeResult, PipelineError> {
    cfg.validate().map_err(PipelineError::Gate)?;
    let run_config = RunConfig {
        budget: cfg.budget,
        ..RunConfig::default()
    };

    let coverage = run_suite(&program, &suite, &ObserveMode::None, &run_config);
    let matrix =
        coverage_matrix(&program, &coverage).map_err(|e| PipelineError::Gate(e.to_string()))?;
    let method_ranking = rank_methods(&matrix, cfg.sbfl_formula);

    let selected: Vec<RankedMethod> = match &cfg.method_known {
        Some(name) => {
            if program.method(name).is_none() {
                return Err(PipelineError::Gate(format!(
                    "known method `{name}` is not defined in the program"
                )));
            }
            vec![RankedMethod {
                method: name.clone(),
                score: 1.0,
            }]
        }
        None => method_ranking
            .iter()
            .take(cfg.top_k_methods)
            .cloned()
            .collect(),
    };

    let mut diagnostics: Vec<String> = Vec::new();
    let mut prepared: Vec<PreparedMethod> = Vec::new();
    for rm in &selected {
        let covering: Vec<&TestTrace> =
            coverage.iter().filter(|t| t.covers(&rm.method)).collect();
        let fails = covering.iter().filter(|t| t.failed()).count();
        let passes = covering.len() - fails;
        if covering.len() < 3 || fails == 0 || passes == 0 {
            diagnostics.push(format!(
                "skipping {}: insufficient tests ({} covering, {} failing, {} passing; need at least 3 with both outcomes)",
                rm.method,
                covering.len(),
                fails,
                passes
            ));
            continue;
        }
        let method = program.method(&rm.method).expect("ranked methods exist");
        let analysis = analyze(method);
        let graph = build_dependence_graph(&analysis, &program);
        let classes = build_classes(&analysis);
        let baseline = failed_covered_occurrences(&graph, &coverage);
        let slice = if cfg.slicing {
            slice_for_failures(&graph, &coverage)
                .expect("gate guarantees a failing run entered the method")
        } else {
            Slice {
                method: rm.method.clone(),
                lines: baseline.iter().map(|(_, line)| *line).collect(),
                occurrences: baseline.clone(),
            }
        };
        prepared.push(PreparedMethod {
            method: rm.method.clone(),
            score: rm.score,
            graph,
            classes,
            slice,
            failed_covered: baseline.len(),
        });
    }
    if prepared.is_empty() {
        return Err(PipelineError::Gate(
            "no method passed the analysis gate; see diagnostics".into(),
        ));
    }

    let mut targets: BTreeSet<(String, String, u32)> = BTreeSet::new();
    for p in &prepared {
        for (var, line) in &p.slice.occurrences {
            targets.insert((p.method.clone(), var.clone(), *line));
        }
    }
    let profile = run_suite(&program, &suite, &ObserveMode::Only(targets), &run_config);

    let mut methods: Vec<MethodAnalysis> = Vec::new();
    let mut scored: Vec<ScoredVar> = Vec::new();
    let mut tree_build_seconds = 0.0f64;
    for p in prepared {
        let table = build_feature_table(&program, &p.classes, &p.slice.occurrences, &profile);
        let factor = if cfg.dep_penalty { cfg.dep_factor } else { 1.0 };
        let deps = dep_scores(&table, &p.graph, factor);
        let started = Instant::now();
        let model = if cfg.tree_model {
            match build_model(&table, &deps) {
                Ok(model) => model,
                Err(e) => {
                    diagnostics.push(format!("skipping {}: {}", p.method, e));
                    continue;
                }
            }
        } else {
            Vec::new()
        };
        tree_build_seconds += started.elapsed().as_secs_f64();

        let mut method_scored = dynamic_scores(&table, &model, &deps);
        if cfg.method_score {
            weight_by_method(&mut method_scored, p.score);
        }
        scored.extend(method_scored);

        let reduction_ratio = if p.failed_covered > 0 {
            1.0 - p.slice.occurrences.len() as f64 / p.failed_covered as f64
        } else {
            0.0
        };
        methods.push(MethodAnalysis {
            method: p.method,
            method_score: p.score,
            slice: p.slice,
            failed_covered: p.failed_covered,
            reduction_ratio,
            graph_export: p.graph.export(),
            table,
            model,
        });
    }
    if methods.is_empty() {
        return Err(PipelineError::Gate(
            "no method passed the analysis gate; see diagnostics".into(),
        ));
    }

    let ranking = rank_variables(scored);
    let stats = LocalizeStats {
        analyzed_methods: methods.len(),
        mean_reduction_ratio: methods.iter().map(|m| m.reduction_ratio).sum::<f64>()
            / methods.len() as f64,
        tree_build_seconds,
    };
    Ok(LocalizeResult {
        program,
        suite,
        method_ranking,
        methods,
        coverage,
        profile,
        ranking,
        diagnostics,
        stats,
    })
}

impl LocalizeResult {
    pub fn ranking_text(&self) -> String {
        render_ranking(&self.ranking)
    }

    pub fn ranking_json(&self) -> String {
        ranking_json(&self.ranking)
    }

    pub fn method_ranking_text(&self) -> String {
        render_method_ranking(&self.method_ranking)
    }

    pub fn slices_text(&self) -> String {
        let slices = self
            .methods
            .iter()
            .map(|m| (m.method.clone(), m.slice.clone()))
            .collect();
        crate::slicer::render_slices(&slices)
    }

    pub fn depgraph_text(&self) -> String {
        let mut out = String::new();
        for m in &self.methods {
            out.push_str(&format!("METHOD {}\n", m.method));
            out.push_str(&m.graph_export);
        }
        out
    }

    pub fn trees_text(&self) -> String {
        let mut out = String::new();
        for m in &self.methods {
            out.push_str(&format!("METHOD {}\n", m.method));
            out.push_str(&render_model(&m.table, &m.model));
        }
        out
    }

    pub fn profile_trace_text(&self) -> String {
        write_traces(&self.profile)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{MANTISSA, MANTISSA_TESTS};

    #[test]
    fn mantissa_defaults_rank_exp_pos_first() {
        let result = localize_sources(MANTISSA, MANTISSA_TESTS, &PipelineConfig::default())
            .unwrap();
        assert_eq!(result.ranking[0].name, "expPos");
        assert_eq!(result.ranking[0].method, "createNumber");
        assert_eq!(result.ranking[0].rank, 1.0);
        assert_eq!(result.methods.len(), 1);
        assert_eq!(result.methods[0].model.len(), 2);
        assert!(result.diagnostics.is_empty());
    }

    #[test]
    fn method_score_weights_the_final_score() {
        let result = localize_sources(MANTISSA, MANTISSA_TESTS, &PipelineConfig::default())
            .unwrap();
        let top = &result.ranking[0];
        assert!((top.method_score - 0.5).abs() < 1e-12);
        assert!((top.fs - top.ds * 0.25).abs() < 1e-12);
    }

    #[test]
    fn no_method_score_keeps_fs_equal_to_ds() {
        let cfg = PipelineConfig {
            method_score: false,
            ..PipelineConfig::default()
        };
        let result = localize_sources(MANTISSA, MANTISSA_TESTS, &cfg).unwrap();
        for v in &result.ranking {
            assert_eq!(v.fs, v.ds);
            assert_eq!(v.method_score, 1.0);
        }
    }

    #[test]
    fn no_tree_ranks_by_dependency_weight_alone() {
        let cfg = PipelineConfig {
            tree_model: false,
            ..PipelineConfig::default()
        };
        let result = localize_sources(MANTISSA, MANTISSA_TESTS, &cfg).unwrap();
        assert!(result.methods[0].model.is_empty());
        assert!(result.ranking.iter().all(|v| !v.tree_used));
        // mant and the str facets carry no dependents, so they share the top
        let top: Vec<&str> = result
            .ranking
            .iter()
            .take_while(|v| v.ds == 1.0)
            .map(|v| v.name.as_str())
            .collect();
        assert!(top.contains(&"mant"));
    }

    #[test]
    fn no_dep_neutralizes_the_penalty() {
        let cfg = PipelineConfig {
            dep_penalty: false,
            tree_model: false,
            ..PipelineConfig::default()
        };
        let result = localize_sources(MANTISSA, MANTISSA_TESTS, &cfg).unwrap();
        assert!(result.ranking.iter().all(|v| v.ds == 1.0));
    }

    #[test]
    fn no_slice_widens_the_candidate_pool() {
        let cfg = PipelineConfig {
            slicing: false,
            ..PipelineConfig::default()
        };
        let full = localize_sources(MANTISSA, MANTISSA_TESTS, &PipelineConfig::default()).unwrap();
        let wide = localize_sources(MANTISSA, MANTISSA_TESTS, &cfg).unwrap();
        assert!(
            wide.methods[0].slice.occurrences.len() > full.methods[0].slice.occurrences.len()
        );
        assert_eq!(wide.methods[0].reduction_ratio, 0.0);
        assert!(full.methods[0].reduction_ratio > 0.0);
    }

    #[test]
    fn method_known_pins_score_and_scope() {
        let cfg = PipelineConfig {
            method_known: Some("createNumber".into()),
            ..PipelineConfig::default()
        };
        let result = localize_sources(MANTISSA, MANTISSA_TESTS, &cfg).unwrap();
        assert_eq!(result.methods.len(), 1);
        assert_eq!(result.methods[0].method_score, 1.0);
        assert_eq!(result.ranking[0].method_score, 1.0);
        assert_eq!(result.ranking[0].fs, result.ranking[0].ds);

        let missing = PipelineConfig {
            method_known: Some("nope".into()),
            ..PipelineConfig::default()
        };
        assert!(matches!(
            localize_sources(MANTISSA, MANTISSA_TESTS, &missing),
            Err(PipelineError::Gate(_))
        ));
    }

    #[test]
    fn all_passing_suite_is_a_gate_failure() {
        let err = localize_sources(
            "method f(a) {\n  return a;\n}",
            "test t1 {\n  assert f(1) == 1;\n}\ntest t2 {\n  assert f(2) == 2;\n}\ntest t3 {\n  assert f(3) == 3;\n}",
            &PipelineConfig::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("nothing to localize"));
    }

    #[test]
    fn under_covered_method_is_skipped_with_a_diagnostic() {
        // two tests cover f: below the three-test gate
        let err = localize_sources(
            "method f(a) {\n  return 10 / a;\n}",
            "test t1 {\n  assert f(2) == 5;\n}\ntest t2 {\n  f(0);\n}",
            &PipelineConfig::default(),
        )
        .unwrap_err();
        let text = err.to_string();
        assert!(text.contains("no method passed the analysis gate"), "{text}");
    }

    #[test]
    fn parse_errors_are_distinguished_from_gate_failures() {
        let err = localize_sources("method f( {", "test t {}", &PipelineConfig::default())
            .unwrap_err();
        assert!(matches!(err, PipelineError::Parse(_)));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = PipelineConfig {
            dep_factor: 0.0,
            ..PipelineConfig::default()
        };
        assert!(matches!(
            localize_sources(MANTISSA, MANTISSA_TESTS, &cfg),
            Err(PipelineError::Gate(_))
        ));
    }

    #[test]
    fn repeated_runs_render_identical_artifacts() {
        let cfg = PipelineConfig::default();
        let a = localize_sources(MANTISSA, MANTISSA_TESTS, &cfg).unwrap();
        let b = localize_sources(MANTISSA, MANTISSA_TESTS, &cfg).unwrap();
        assert_eq!(a.ranking_text(), b.ranking_text());
        assert_eq!(a.ranking_json(), b.ranking_json());
        assert_eq!(a.method_ranking_text(), b.method_ranking_text());
        assert_eq!(a.slices_text(), b.slices_text());
        assert_eq!(a.depgraph_text(), b.depgraph_text());
        assert_eq!(a.trees_text(), b.trees_text());
        assert_eq!(a.profile_trace_text(), b.profile_trace_text());
    }

    #[test]
    fn second_method_beyond_the_gate_leaves_a_diagnostic_only() {
        // g is covered by one passing test only; f carries the failure
        let program = "method f(a) {\n  return 10 / a;\n}\nmethod g(x) {\n  return x + 1;\n}";
        let tests = "test t1 {\n  assert f(2) == 5;\n}\ntest t2 {\n  f(0);\n}\ntest t3 {\n  assert f(5) == 2;\n}\ntest t4 {\n  assert g(1) == 2;\n}";
        let result = localize_sources(program, tests, &PipelineConfig::default()).unwrap();
        assert_eq!(result.methods.len(), 1);
        assert_eq!(result.methods[0].method, "f");
        assert_eq!(result.diagnostics.len(), 1);
        assert!(result.diagnostics[0].contains("skipping g"));
    }
}
