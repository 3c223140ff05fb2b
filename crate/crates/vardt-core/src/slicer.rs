//! Dynamic backward slicing over one method's dependence graph.
//!
//! The criterion is the last line the method executed in a failing run,
//! starting from the variables used there. The walk follows data edges
//! between occurrences, restricted to lines the failing run actually
//! executed; whenever a line joins the slice, the conditions governing that
//! line join too. The slice keeps whole lines: every occurrence on a
//! retained line is retained, including a definition whose statement
//! crashed mid-evaluation.

use std::collections::{BTreeMap, BTreeSet};

use crate::lang::DependencyGraph;
use crate::runtime::TestTrace;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slice {
    pub method: String,
    pub lines: BTreeSet<u32>,
    /// Retained occurrences as (variable, line).
    pub occurrences: BTreeSet<(String, u32)>,
}

impl Slice {
    pub fn empty(method: &str) -> Slice {
        Slice {
            method: method.to_string(),
            lines: BTreeSet::new(),
            occurrences: BTreeSet::new(),
        }
    }

    pub fn merge(&mut self, other: &Slice) {
        self.lines.extend(other.lines.iter().copied());
        self.occurrences
            .extend(other.occurrences.iter().cloned());
    }
}

/// Last executed line of the method in the given run, plus the variables
/// used at that line. None when the run never entered the method.
pub fn slicing_criterion(
    graph: &DependencyGraph,
    trace: &TestTrace,
) -> Option<(u32, Vec<(String, u32)>)> {
    let line = *trace.per_method_lines.get(&graph.method)?.last()?;
    let uses: Vec<(String, u32)> = graph
        .occurrences
        .iter()
        .filter(|o| o.line == line && o.is_use)
        .map(|o| (o.var.clone(), o.line))
        .collect();
    Some((line, uses))
}

pub fn backward_slice(graph: &DependencyGraph, trace: &TestTrace) -> Option<Slice> {
    let (criterion_line, criterion_uses) = slicing_criterion(graph, trace)?;
    let executed: BTreeSet<u32> = trace.per_method_lines[&graph.method]
        .iter()
        .copied()
        .collect();

    let mut work: Vec<usize> = criterion_uses
        .iter()
        .filter_map(|(var, line)| graph.occurrence(var, *line))
        .collect();
    let mut seen_occ: BTreeSet<usize> = BTreeSet::new();
    let mut lines: BTreeSet<u32> = BTreeSet::from([criterion_line]);
    let mut line_processed: BTreeSet<u32> = BTreeSet::new();
    let mut line_queue: Vec<u32> = vec![criterion_line];

    loop {
        while let Some(idx) = work.pop() {
            if !seen_occ.insert(idx) {
                continue;
            }
            let occ = &graph.occurrences[idx];
            if lines.insert(occ.line) {
                line_queue.push(occ.line);
            }
            for succ in graph.data_successors(idx) {
                if executed.contains(&graph.occurrences[succ].line) {
                    work.push(succ);
                }
            }
        }
        let Some(line) = line_queue.pop() else { break };
        if !line_processed.insert(line) {
            continue;
        }
        if let Some(governors) = graph.line_governors.get(&line) {
            for gov in governors {
                if !executed.contains(gov) {
                    continue;
                }
                if let Some(target) = graph.cond_targets.get(gov) {
                    if let Some(idx) = graph.occurrence(target, *gov) {
                        work.push(idx);
                    }
                }
            }
        }
    }

    let occurrences: BTreeSet<(String, u32)> = graph
        .occurrences
        .iter()
        .filter(|o| lines.contains(&o.line))
        .map(|o| (o.var.clone(), o.line))
        .collect();
    Some(Slice {
        method: graph.method.clone(),
        lines,
        occurrences,
    })
}

/// Union of backward slices over every failing run that entered the method.
/// None when no failing run did.
pub fn slice_for_failures(graph: &DependencyGraph, traces: &[TestTrace]) -> Option<Slice> {
    let mut merged: Option<Slice> = None;
    for trace in traces.iter().filter(|t| t.failed()) {
        if let Some(slice) = backward_slice(graph, trace) {
            match merged.as_mut() {
                Some(m) => m.merge(&slice),
                None => merged = Some(slice),
            }
        }
    }
    merged
}

/// Occurrences on lines any failing run executed in this method. This is
/// the baseline the slice is measured against, and the candidate set when
/// slicing is disabled.
pub fn failed_covered_occurrences(
    graph: &DependencyGraph,
    traces: &[TestTrace],
) -> BTreeSet<(String, u32)> {
    let mut lines: BTreeSet<u32> = BTreeSet::new();
    for trace in traces.iter().filter(|t| t.failed()) {
        if let Some(seq) = trace.per_method_lines.get(&graph.method) {
            lines.extend(seq.iter().copied());
        }
    }
    graph
        .occurrences
        .iter()
        .filter(|o| lines.contains(&o.line))
        .map(|o| (o.var.clone(), o.line))
        .collect()
}

pub fn render_slices(slices: &BTreeMap<String, Slice>) -> String {
    let mut out = String::new();
    for slice in slices.values() {
        for line in &slice.lines {
            out.push_str(&format!("{}:{}\n", slice.method, line));
        }
    }
    for slice in slices.values() {
        for (var, line) in &slice.occurrences {
            out.push_str(&format!("OCC {} {}@{}\n", slice.method, var, line));
        }
    }
    out
}
