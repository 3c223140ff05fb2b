//! Tree growth over a feature table.
//!
//! Each node re-ranks the remaining candidates by (gain ratio + |Pearson|)
//! weighted by the dependence score, then splits on the best one that can
//! actually partition the node's rows. Numeric splits are binary at the
//! best midpoint threshold; boolean and nominal splits are one branch per
//! value. Rows missing a value for the split variable go down a dedicated
//! branch. A forest is grown by repeatedly building a tree and retiring
//! the variables it used, together with derived candidates that carry no
//! information beyond those, until nothing separates the tests anymore.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::dtree::stats::{best_threshold, column_correlation, gain_ratio};
use crate::dtree::table::{ColumnKind, FeatureTable, FeatureValue};

#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    /// Branches `<= theta` and `> theta`.
    Numeric { theta: f64 },
    Boolean,
    Nominal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Branch {
    Le,
    Gt,
    True,
    False,
    Value(String),
    Unobserved,
}

#[derive(Debug, Clone)]
pub enum Tree {
    Leaf {
        rows: Vec<usize>,
    },
    Node {
        candidate: usize,
        predicate: Predicate,
        rows: Vec<usize>,
        children: Vec<(Branch, Tree)>,
    },
}

impl Tree {
    pub fn rows(&self) -> &[usize] {
        match self {
            Tree::Leaf { rows } => rows,
            Tree::Node { rows, .. } => rows,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Tree::Leaf { .. })
    }

    pub fn used_candidates(&self, out: &mut BTreeSet<usize>) {
        if let Tree::Node {
            candidate,
            children,
            ..
        } = self
        {
            out.insert(*candidate);
            for (_, child) in children {
                child.used_candidates(out);
            }
        }
    }
}

/// Candidates ranked for splitting at one node, best first. The score is
/// (gain ratio + |correlation|) x dependence weight; ties fall back to the
/// smallest class line, then the name.
pub fn prioritize(
    table: &FeatureTable,
    deps: &[f64],
    var_list: &[usize],
    rows: &[usize],
) -> Vec<(usize, f64)> {
    let labels = table.node_labels(rows);
    let mut scored: Vec<(usize, f64)> = var_list
        .iter()
        .map(|&c| {
            let values = table.node_column(c, rows);
            let score =
                (gain_ratio(&values, &labels) + column_correlation(&values, &labels)) * deps[c];
            (c, score)
        })
        .collect();
    let sort_key = |c: usize| {
        let cand = &table.candidates[c];
        (
            cand.lines.iter().next().copied().unwrap_or(u32::MAX),
            cand.name.clone(),
        )
    };
    scored.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| sort_key(a.0).cmp(&sort_key(b.0)))
    });
    scored
}

/// The split a candidate induces on the given rows, or None when it cannot
/// partition them (fewer than two distinct observed values).
pub fn calculate_condition(
    table: &FeatureTable,
    candidate: usize,
    rows: &[usize],
) -> Option<(Predicate, Vec<(Branch, Vec<usize>)>)> {
    let values = table.node_column(candidate, rows);
    let labels = table.node_labels(rows);
    let mut distinct: Vec<&FeatureValue> = Vec::new();
    for v in values.iter().flatten() {
        if !distinct.iter().any(|d| **d == *v) {
            distinct.push(v);
        }
    }
    if distinct.len() < 2 {
        return None;
    }

    let kind = table.candidates[candidate].kind?;
    let mut groups: Vec<(Branch, Vec<usize>)> = Vec::new();
    let push = |groups: &mut Vec<(Branch, Vec<usize>)>, branch: Branch, rows: Vec<usize>| {
        if !rows.is_empty() {
            groups.push((branch, rows));
        }
    };
    let select = |pred: &dyn Fn(&FeatureValue) -> bool| -> Vec<usize> {
        rows.iter()
            .zip(&values)
            .filter(|(_, v)| matches!(v, Some(v) if pred(v)))
            .map(|(&r, _)| r)
            .collect()
    };
    let unobserved: Vec<usize> = rows
        .iter()
        .zip(&values)
        .filter(|(_, v)| v.is_none())
        .map(|(&r, _)| r)
        .collect();

    let predicate = match kind {
        ColumnKind::Numeric => {
            let (theta, _) = best_threshold(&values, &labels)?;
            push(
                &mut groups,
                Branch::Le,
                select(&|v| matches!(v, FeatureValue::Num(x) if *x <= theta)),
            );
            push(
                &mut groups,
                Branch::Gt,
                select(&|v| matches!(v, FeatureValue::Num(x) if *x > theta)),
            );
            Predicate::Numeric { theta }
        }
        ColumnKind::Boolean => {
            push(
                &mut groups,
                Branch::True,
                select(&|v| matches!(v, FeatureValue::Bool(true))),
            );
            push(
                &mut groups,
                Branch::False,
                select(&|v| matches!(v, FeatureValue::Bool(false))),
            );
            Predicate::Boolean
        }
        ColumnKind::Nominal => {
            let mut names: Vec<String> = values
                .iter()
                .filter_map(|v| match v {
                    Some(FeatureValue::Nom(s)) => Some(s.clone()),
                    _ => None,
                })
                .collect();
            names.sort();
            names.dedup();
            for name in names {
                push(
                    &mut groups,
                    Branch::Value(name.clone()),
                    select(&|v| matches!(v, FeatureValue::Nom(s) if *s == name)),
                );
            }
            Predicate::Nominal
        }
    };
    push(&mut groups, Branch::Unobserved, unobserved);
    if groups.len() < 2 {
        return None;
    }
    Some((predicate, groups))
}

fn grow(
    table: &FeatureTable,
    deps: &[f64],
    var_list: &[usize],
    rows: &[usize],
    banned: Option<usize>,
) -> Tree {
    let labels = table.node_labels(rows);
    let mixed = labels.iter().any(|&f| f) && labels.iter().any(|&f| !f);
    if rows.len() < 2 || !mixed {
        return Tree::Leaf {
            rows: rows.to_vec(),
        };
    }
    for (cand, _) in prioritize(table, deps, var_list, rows) {
        if Some(cand) == banned {
            continue;
        }
        let Some((predicate, groups)) = calculate_condition(table, cand, rows) else {
            continue;
        };
        // a numeric variable may return deeper down, but not re-split its
        // own immediate children
        let child_ban = matches!(predicate, Predicate::Numeric { .. }).then_some(cand);
        let child_vars: Vec<usize> = if child_ban.is_some() {
            var_list.to_vec()
        } else {
            var_list.iter().copied().filter(|&v| v != cand).collect()
        };
        let children = groups
            .into_iter()
            .map(|(branch, child_rows)| {
                (
                    branch,
                    grow(table, deps, &child_vars, &child_rows, child_ban),
                )
            })
            .collect();
        return Tree::Node {
            candidate: cand,
            predicate,
            rows: rows.to_vec(),
            children,
        };
    }
    Tree::Leaf {
        rows: rows.to_vec(),
    }
}

pub fn build_tree(table: &FeatureTable, deps: &[f64], var_list: &[usize]) -> Tree {
    let rows: Vec<usize> = (0..table.tests.len()).collect();
    grow(table, deps, var_list, &rows, None)
}

#[derive(Debug, Error)]
#[error("insufficient tests: need at least three covering tests with both a failing and a passing one")]
pub struct InsufficientTests;

/// Grows trees until the remaining variables cannot separate the tests.
/// After each tree, the variables it split on retire, and so do derived
/// candidates (temporaries, facets) whose source variables are all covered
/// by what the model has used so far.
pub fn build_model(table: &FeatureTable, deps: &[f64]) -> Result<Vec<Tree>, InsufficientTests> {
    let fails = table.labels.iter().filter(|&&l| l).count();
    if table.labels.len() < 3 || fails == 0 || fails == table.labels.len() {
        return Err(InsufficientTests);
    }
    let mut var_set: Vec<usize> = (0..table.candidates.len()).collect();
    let mut model: Vec<Tree> = Vec::new();
    let mut consumed: BTreeSet<String> = BTreeSet::new();
    while !var_set.is_empty() {
        let tree = build_tree(table, deps, &var_set);
        if tree.is_leaf() {
            break;
        }
        let mut used = BTreeSet::new();
        tree.used_candidates(&mut used);
        model.push(tree);
        for &u in &used {
            consumed.extend(table.candidates[u].source_vars.iter().cloned());
        }
        var_set.retain(|&v| {
            if used.contains(&v) {
                return false;
            }
            let c = &table.candidates[v];
            !(c.derived && !c.source_vars.is_empty() && c.source_vars.is_subset(&consumed))
        });
    }
    Ok(model)
}

fn branch_tag(branch: &Branch) -> String {
    match branch {
        Branch::Le => "<=".into(),
        Branch::Gt => ">".into(),
        Branch::True => "true".into(),
        Branch::False => "false".into(),
        Branch::Value(v) => format!("={v}"),
        Branch::Unobserved => "unobs".into(),
    }
}

fn render_node(out: &mut String, table: &FeatureTable, tree: &Tree, depth: usize, branch: Option<&Branch>) {
    let rows = tree.rows();
    let fails = rows.iter().filter(|&&r| table.labels[r]).count();
    let passes = rows.len() - fails;
    let tests: Vec<&str> = rows.iter().map(|&r| table.tests[r].as_str()).collect();
    out.push_str(&depth.to_string());
    if let Some(b) = branch {
        out.push_str(&format!(" [{}]", branch_tag(b)));
    }
    let body = match tree {
        Tree::Leaf { .. } => "LEAF".to_string(),
        Tree::Node {
            candidate,
            predicate,
            ..
        } => {
            let name = &table.candidates[*candidate].name;
            match predicate {
                Predicate::Numeric { theta } => format!("{name} <= {theta}"),
                Predicate::Boolean | Predicate::Nominal => name.clone(),
            }
        }
    };
    out.push_str(&format!(
        " {} tests=[{}] labels={{P:{},F:{}}}\n",
        body,
        tests.join(","),
        passes,
        fails
    ));
    if let Tree::Node { children, .. } = tree {
        for (b, child) in children {
            render_node(out, table, child, depth + 1, Some(b));
        }
    }
}

pub fn render_tree(table: &FeatureTable, tree: &Tree) -> String {
    let mut out = String::new();
    render_node(&mut out, table, tree, 0, None);
    out
}

pub fn render_model(table: &FeatureTable, model: &[Tree]) -> String {
    let mut out = String::new();
    for (i, tree) in model.iter().enumerate() {
        out.push_str(&format!("TREE {}\n", i + 1));
        out.push_str(&render_tree(table, tree));
    }
    out
}
