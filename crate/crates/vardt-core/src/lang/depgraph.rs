//! Per-method dependence graph over variable occurrences.
//!
//! Nodes are (variable, line) pairs. Data edges run from a use to its
//! reaching definitions, from a definition to the same-line uses it reads,
//! and from a definition straight to the reaching definitions of its
//! operands (so `x=1; y=x+1;` yields the direct edge `y@2 -> x@1`). Control
//! edges run from a definition to the occurrence tested by the branch that
//! directly governs its statement.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::analysis::Analysis;
use super::ast::{Program, TempKind};
use super::transform::is_temp_name;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum OccKind {
    ProgramVariable,
    TempCondition,
    TempReturnArg,
    PredicateFeature,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct VarOccurrence {
    pub var: String,
    pub line: u32,
    pub kind: OccKind,
    pub is_def: bool,
    pub is_use: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum EdgeKind {
    Data,
    Control,
}

#[derive(Debug)]
pub struct DependencyGraph {
    pub method: String,
    pub occurrences: Vec<VarOccurrence>,
    index: BTreeMap<(String, u32), usize>,
    edges: BTreeSet<(usize, usize, EdgeKind)>,
    succs: Vec<Vec<usize>>,
    /// Governed line -> lines of the branch conditions directly governing it.
    pub line_governors: BTreeMap<u32, BTreeSet<u32>>,
    /// Branch condition line -> variable the branch tests.
    pub cond_targets: BTreeMap<u32, String>,
}

impl DependencyGraph {
    pub fn occurrence(&self, var: &str, line: u32) -> Option<usize> {
        self.index.get(&(var.to_string(), line)).copied()
    }

    pub fn occurrences_of(&self, var: &str) -> Vec<usize> {
        self.occurrences
            .iter()
            .enumerate()
            .filter(|(_, o)| o.var == var)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, EdgeKind)> + '_ {
        self.edges.iter().copied()
    }

    /// True when `from` reaches `to` over any mix of data and control edges.
    /// Every node reaches itself.
    pub fn reaches(&self, from: usize, to: usize) -> bool {
        if from == to {
            return true;
        }
        let mut seen = vec![false; self.occurrences.len()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(v) = stack.pop() {
            for &s in &self.succs[v] {
                if s == to {
                    return true;
                }
                if !seen[s] {
                    seen[s] = true;
                    stack.push(s);
                }
            }
        }
        false
    }

    /// Data/control successors of one occurrence.
    pub fn successors(&self, from: usize) -> &[usize] {
        &self.succs[from]
    }

    /// Successors over data edges only.
    pub fn data_successors(&self, from: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|&&(f, _, k)| f == from && k == EdgeKind::Data)
            .map(|&(_, t, _)| t)
            .collect()
    }

    /// Line-oriented export, one `EDGE a@l -> b@l kind` record per edge,
    /// sorted for stable golden files.
    pub fn export(&self) -> String {
        let mut lines: Vec<String> = self
            .edges
            .iter()
            .map(|&(f, t, kind)| {
                let a = &self.occurrences[f];
                let b = &self.occurrences[t];
                let tag = match kind {
                    EdgeKind::Data => "data",
                    EdgeKind::Control => "control",
                };
                format!("EDGE {}@{} -> {}@{} {}", a.var, a.line, b.var, b.line, tag)
            })
            .collect();
        lines.sort();
        let mut out = lines.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        out
    }
}

fn kind_of(var: &str, program: &Program) -> OccKind {
    if is_temp_name(var) {
        match program.source_map.get(var).map(|o| o.kind) {
            Some(TempKind::Condition) => OccKind::TempCondition,
            _ => OccKind::TempReturnArg,
        }
    } else {
        OccKind::ProgramVariable
    }
}

pub fn build_dependence_graph(analysis: &Analysis, program: &Program) -> DependencyGraph {
    let mut occs: BTreeMap<(String, u32), (bool, bool)> = BTreeMap::new();
    let mut mark = |var: &str, line: u32, def: bool| {
        let entry = occs.entry((var.to_string(), line)).or_insert((false, false));
        if def {
            entry.0 = true;
        } else {
            entry.1 = true;
        }
    };
    for p in &analysis.params {
        mark(p, analysis.method_line, true);
    }
    for stmt in &analysis.stmts {
        for def in &stmt.defs {
            mark(&def.var, stmt.line, true);
        }
        for var in &stmt.uses {
            mark(var, stmt.line, false);
        }
    }

    let occurrences: Vec<VarOccurrence> = occs
        .iter()
        .map(|((var, line), &(is_def, is_use))| VarOccurrence {
            var: var.clone(),
            line: *line,
            kind: kind_of(var, program),
            is_def,
            is_use,
        })
        .collect();
    let index: BTreeMap<(String, u32), usize> = occs
        .keys()
        .enumerate()
        .map(|(i, key)| (key.clone(), i))
        .collect();

    let mut edges: BTreeSet<(usize, usize, EdgeKind)> = BTreeSet::new();
    let add = |edges: &mut BTreeSet<(usize, usize, EdgeKind)>, f: usize, t: usize, k: EdgeKind| {
        if f != t {
            edges.insert((f, t, k));
        }
    };

    let mut cond_targets = BTreeMap::new();
    for stmt in &analysis.stmts {
        if let Some(target) = &stmt.cond_target {
            cond_targets.insert(stmt.line, target.clone());
        }
    }

    for (idx, stmt) in analysis.stmts.iter().enumerate() {
        for var in &stmt.uses {
            let from = index[&(var.clone(), stmt.line)];
            for def_line in analysis.reaching_defs(idx, var) {
                if let Some(&to) = index.get(&(var.clone(), def_line)) {
                    add(&mut edges, from, to, EdgeKind::Data);
                }
            }
        }
        for def in &stmt.defs {
            let from = index[&(def.var.clone(), stmt.line)];
            for op in &def.operands {
                if let Some(&to) = index.get(&(op.clone(), stmt.line)) {
                    add(&mut edges, from, to, EdgeKind::Data);
                }
                for def_line in analysis.reaching_defs(idx, op) {
                    if let Some(&to) = index.get(&(op.clone(), def_line)) {
                        add(&mut edges, from, to, EdgeKind::Data);
                    }
                }
            }
            for &gov in &analysis.control_deps[idx] {
                let gov_stmt = &analysis.stmts[gov];
                if let Some(target) = &gov_stmt.cond_target {
                    if let Some(&to) = index.get(&(target.clone(), gov_stmt.line)) {
                        add(&mut edges, from, to, EdgeKind::Control);
                    }
                }
            }
        }
    }

    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); occurrences.len()];
    for &(f, t, _) in &edges {
        if !succs[f].contains(&t) {
            succs[f].push(t);
        }
    }

    DependencyGraph {
        method: analysis.method.clone(),
        occurrences,
        index,
        edges,
        succs,
        line_governors: analysis.line_governors(),
        cond_targets,
    }
}
