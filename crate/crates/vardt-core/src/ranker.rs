//! Variable scoring and the cross-method ranking.
//!
//! A candidate's dynamic score looks at every tree node that splits on it:
//! purer subtrees, more tests, and shorter distance to a failing leaf all
//! raise the score, and the best such node counts. The dependence weight
//! is added on top, so a variable no tree used still carries its weight.
//! The final score folds ins the method's own suspiciousness, squared, and
//! the global list orders variables by it with average ranks for ties.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::dtree::stats::gini;
use crate::dtree::{FeatureTable, Tree};

#[derive(Debug, Clone)]
pub struct ScoredVar {
    pub method: String,
    pub name: String,
    /// All lines of the underlying class, for reporting and truth matching.
    pub lines: BTreeSet<u32>,
    pub ds: f64,
    pub fs: f64,
    pub method_score: f64,
    /// False when no tree in the model split on this candidate.
    pub tree_used: bool,
}

fn leaf_gini(table: &FeatureTable, tree: &Tree) -> f64 {
    fn walk(table: &FeatureTable, tree: &Tree, total: f64, acc: &mut f64) {
        match tree {
            Tree::Leaf { rows } => {
                let labels = table.node_labels(rows);
                *acc += (rows.len() as f64 / total) * gini(&labels);
            }
            Tree::Node { children, .. } => {
                for (_, child) in children {
                    walk(table, child, total, acc);
                }
            }
        }
    }
    let mut acc = 0.0;
    walk(table, tree, tree.rows().len() as f64, &mut acc);
    acc
}

/// Edge count to the nearest descendant leaf holding a failing test; None
/// when every leaf below is all-pass.
fn fail_distance(table: &FeatureTable, tree: &Tree) -> Option<usize> {
    fn nearest(table: &FeatureTable, tree: &Tree) -> Option<usize> {
        match tree {
            Tree::Leaf { rows } => {
                if rows.iter().any(|&r| table.labels[r]) {
                    Some(0)
                } else {
                    None
                }
            }
            Tree::Node { children, .. } => children
                .iter()
                .filter_map(|(_, c)| nearest(table, c).map(|d| d + 1))
                .min(),
        }
    }
    match tree {
        Tree::Leaf { .. } => None,
        Tree::Node { .. } => nearest(table, tree),
    }
}

/// Dynamic score per candidate over a grown model. The score starts from
/// the best node splitting on the candidate and adds the dependence
/// weight; candidates outside the model keep just the weight.
pub fn dynamic_scores(table: &FeatureTable, model: &[Tree], deps: &[f64]) -> Vec<ScoredVar> {
    let mut best: Vec<Option<f64>> = vec![None; table.candidates.len()];

    fn visit(table: &FeatureTable, tree: &Tree, best: &mut [Option<f64>]) {
        if let Tree::Node {
            candidate,
            children,
            rows,
            ..
        } = tree
        {
            let term = match fail_distance(table, tree) {
                Some(dist) => {
                    (1.0 - leaf_gini(table, tree)) * (rows.len() as f64).sqrt() / dist as f64
                }
                None => 0.0,
            };
            let slot = &mut best[*candidate];
            *slot = Some(slot.map_or(term, |b: f64| b.max(term)));
            for (_, child) in children {
                visit(table, child, best);
            }
        }
    }
    for tree in model {
        visit(table, tree, &mut best);
    }

    table
        .candidates
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let ds = best[i].unwrap_or(0.0) + deps[i];
            ScoredVar {
                method: c.method.clone(),
                name: c.name.clone(),
                lines: c.lines.clone(),
                ds,
                fs: ds,
                method_score: 1.0,
                tree_used: best[i].is_some(),
            }
        })
        .collect()
}

/// Folds the owning method's suspiciousness into the final score.
pub fn weight_by_method(vars: &mut [ScoredVar], method_score: f64) {
    for v in vars {
        v.method_score = method_score;
        v.fs = v.ds * method_score * method_score;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RankedVar {
    /// 1-based position; tied scores share their average position.
    pub rank: f64,
    pub fs: f64,
    pub ds: f64,
    pub method_score: f64,
    pub method: String,
    pub name: String,
    pub lines: Vec<u32>,
    pub tree_used: bool,
}

/// Global ranking across methods: final score descending, ties resolved
/// for listing order by method and name but sharing an average rank.
pub fn rank_variables(mut scored: Vec<ScoredVar>) -> Vec<RankedVar> {
    scored.sort_by(|a, b| {
        b.fs.total_cmp(&a.fs)
            .then_with(|| a.method.cmp(&b.method))
            .then_with(|| a.name.cmp(&b.name))
            .then_with(|| a.lines.iter().next().cmp(&b.lines.iter().next()))
    });
    let mut out: Vec<RankedVar> = Vec::with_capacity(scored.len());
    let mut i = 0;
    while i < scored.len() {
        let mut j = i;
        while j < scored.len() && scored[j].fs.total_cmp(&scored[i].fs).is_eq() {
            j += 1;
        }
        // positions i+1 ..= j share the average rank
        let rank = (i + 1 + j) as f64 / 2.0;
        for v in &scored[i..j] {
            out.push(RankedVar {
                rank,
                fs: v.fs,
                ds: v.ds,
                method_score: v.method_score,
                method: v.method.clone(),
                name: v.name.clone(),
                lines: v.lines.iter().copied().collect(),
                tree_used: v.tree_used,
            });
        }
        i = j;
    }
    out
}

pub fn render_ranking(ranking: &[RankedVar]) -> String {
    let mut out = String::new();
    for v in ranking {
        let lines: Vec<String> = v.lines.iter().map(|l| l.to_string()).collect();
        out.push_str(&format!(
            "{} {:.6} {:.6} {:.6} {} {}@[{}]\n",
            v.rank,
            v.fs,
            v.ds,
            v.method_score,
            v.method,
            v.name,
            lines.join(",")
        ));
    }
    out
}

pub fn ranking_json(ranking: &[RankedVar]) -> String {
    let mut text = serde_json::to_string_pretty(ranking).expect("ranking serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtree::{build_feature_table, build_model, dep_scores};
    use crate::fixtures::mantissa_run;
    use std::collections::BTreeMap;

    fn mantissa_scored() -> Vec<ScoredVar> {
        let run = mantissa_run();
        let table =
            build_feature_table(&run.program, &run.classes, &run.slice.occurrences, &run.profile);
        let deps = dep_scores(&table, &run.graph, 0.8);
        let model = build_model(&table, &deps).unwrap();
        dynamic_scores(&table, &model, &deps)
    }

    #[test]
    fn mantissa_dynamic_scores_match_hand_computation() {
        let scored = mantissa_scored();
        let by_name: BTreeMap<&str, &ScoredVar> =
            scored.iter().map(|v| (v.name.as_str(), v)).collect();
        let close = |name: &str, want: f64| {
            let got = by_name[name].ds;
            assert!((got - want).abs() < 1e-6, "{name}: {got} != {want}");
        };
        // expPos: pure split of two tests one edge above the failing leaf
        close("expPos", 2.0542135623730951);
        // length(str): pure leaves but two edges from the failure
        close("length(str)", 2.0);
        // decPos: a mixed leaf keeps a third of the impurity
        close("decPos", 1.0 + 1.0 / 3.0 + 0.512);
        close("mant", 1.0);
        close("isnull(str)", 1.0);
        close("typeof(str)", 1.0);
        close("__tcreateNumber_7", 0.8);
        close("__tcreateNumber_1", 0.64);
        close("str", 0.32768);

        assert!(by_name["expPos"].tree_used);
        assert!(by_name["decPos"].tree_used);
        assert!(!by_name["__tcreateNumber_7"].tree_used);
        assert!(!by_name["mant"].tree_used);
    }

    #[test]
    fn mantissa_ranking_puts_exp_pos_first() {
        let mut scored = mantissa_scored();
        weight_by_method(&mut scored, 0.5);
        let ranking = rank_variables(scored);
        assert_eq!(ranking[0].name, "expPos");
        assert_eq!(ranking[0].rank, 1.0);
        assert!((ranking[0].fs - 2.0542135623730951 * 0.25).abs() < 1e-9);
        assert_eq!(ranking[1].name, "length(str)");
        assert_eq!(ranking[2].name, "decPos");
        // mant and the two constant str facets tie at the bare weight
        let tied: Vec<&str> = ranking[3..6].iter().map(|v| v.name.as_str()).collect();
        assert_eq!(tied, vec!["isnull(str)", "mant", "typeof(str)"]);
        assert!(ranking[3..6].iter().all(|v| v.rank == 5.0));
        assert_eq!(ranking[6].name, "__tcreateNumber_7");
        assert_eq!(ranking[7].name, "__tcreateNumber_1");
        assert_eq!(ranking[8].name, "str");
        assert_eq!(ranking[8].rank, 9.0);
    }

    #[test]
    fn method_weighting_squares_the_method_score() {
        let mut vars = vec![ScoredVar {
            method: "m".into(),
            name: "x".into(),
            lines: BTreeSet::from([3]),
            ds: 2.0,
            fs: 2.0,
            method_score: 1.0,
            tree_used: true,
        }];
        weight_by_method(&mut vars, 0.5);
        assert_eq!(vars[0].fs, 0.5);
        assert_eq!(vars[0].method_score, 0.5);
    }

    #[test]
    fn unused_candidates_score_their_dependence_weight() {
        let run = mantissa_run();
        let table =
            build_feature_table(&run.program, &run.classes, &run.slice.occurrences, &run.profile);
        let deps = dep_scores(&table, &run.graph, 0.8);
        // an empty model leaves every candidate at its weight
        let scored = dynamic_scores(&table, &[], &deps);
        for (v, &d) in scored.iter().zip(&deps) {
            assert_eq!(v.ds, d);
            assert!(!v.tree_used);
        }
    }

    #[test]
    fn internal_node_without_failures_below_adds_nothing() {
        // hand-built tree over an all-pass table; the split contributes no
        // impurity term, only the dependence weight survives
        let table = FeatureTable {
            method: "m".into(),
            tests: vec!["t1".into(), "t2".into()],
            labels: vec![false, false],
            candidates: vec![crate::dtree::CandidateVar {
                name: "x".into(),
                method: "m".into(),
                lines: BTreeSet::from([1]),
                members: Vec::new(),
                source_vars: BTreeSet::from(["x".to_string()]),
                derived: false,
                kind: Some(crate::dtree::ColumnKind::Numeric),
                values: BTreeMap::new(),
            }],
        };
        let tree = Tree::Node {
            candidate: 0,
            predicate: crate::dtree::Predicate::Numeric { theta: 0.5 },
            rows: vec![0, 1],
            children: vec![
                (crate::dtree::Branch::Le, Tree::Leaf { rows: vec![0] }),
                (crate::dtree::Branch::Gt, Tree::Leaf { rows: vec![1] }),
            ],
        };
        let scored = dynamic_scores(&table, &[tree], &[0.9]);
        assert!((scored[0].ds - 0.9).abs() < 1e-12);
        assert!(scored[0].tree_used);
    }

    #[test]
    fn tied_scores_share_an_average_rank() {
        let mk = |name: &str, fs: f64| ScoredVar {
            method: "m".into(),
            name: name.into(),
            lines: BTreeSet::from([1]),
            ds: fs,
            fs,
            method_score: 1.0,
            tree_used: false,
        };
        let ranking = rank_variables(vec![
            mk("a", 3.0),
            mk("b", 1.0),
            mk("c", 2.0),
            mk("d", 2.0),
            mk("e", 2.0),
        ]);
        let ranks: Vec<(&str, f64)> = ranking
            .iter()
            .map(|v| (v.name.as_str(), v.rank))
            .collect();
        assert_eq!(
            ranks,
            vec![("a", 1.0), ("c", 3.0), ("d", 3.0), ("e", 3.0), ("b", 5.0)]
        );
    }

    #[test]
    fn renders_ranks_scores_and_line_sets() {
        let mut scored = mantissa_scored();
        weight_by_method(&mut scored, 0.5);
        let ranking = rank_variables(scored);
        let text = render_ranking(&ranking);
        let first = text.lines().next().unwrap();
        assert_eq!(
            first,
            "1 0.513553 2.054214 0.500000 createNumber expPos@[4,5,7,8,11,17,18]"
        );
        // the three-way tie prints its shared average rank
        assert!(text.contains("\n5 0.250000 1.000000 0.500000 createNumber isnull(str)@["));
        let json = ranking_json(&ranking);
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed[0]["name"], "expPos");
        assert_eq!(parsed[0]["rank"], 1.0);
    }
}
