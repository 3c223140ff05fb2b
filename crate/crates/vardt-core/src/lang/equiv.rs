//! Occurrence equivalence classes.
//!
//! Occurrences of one variable are grouped by the value they can hold: a
//! definition forms a class seeded by its own line, and a pure use joins the
//! class keyed by the set of definition lines reaching it. A use past a
//! merge point (several reaching definitions) gets its own class, since no
//! single definition accounts for its value. A line that both defines and
//! uses a variable (`i = i + 1`) counts as the definition.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::analysis::Analysis;

#[derive(Debug, Clone, Serialize)]
pub struct VarClass {
    pub var: String,
    /// Occurrence lines grouped into this class, smallest first.
    pub lines: BTreeSet<u32>,
    /// Definition lines the class is keyed by.
    pub key: BTreeSet<u32>,
}

impl VarClass {
    pub fn representative(&self) -> u32 {
        *self.lines.iter().next().expect("class has at least one line")
    }
}

#[derive(Debug)]
pub struct EquivalenceClasses {
    pub method: String,
    /// Sorted by (variable, representative line).
    pub classes: Vec<VarClass>,
    by_occurrence: BTreeMap<(String, u32), usize>,
}

impl EquivalenceClasses {
    pub fn class_of(&self, var: &str, line: u32) -> Option<&VarClass> {
        self.by_occurrence
            .get(&(var.to_string(), line))
            .map(|&i| &self.classes[i])
    }

    pub fn class_index(&self, var: &str, line: u32) -> Option<usize> {
        self.by_occurrence.get(&(var.to_string(), line)).copied()
    }
}

pub fn build_classes(analysis: &Analysis) -> EquivalenceClasses {
    // (var, line) -> (is_def, reaching def lines of the use side)
    let mut occ: BTreeMap<(String, u32), (bool, BTreeSet<u32>)> = BTreeMap::new();
    for p in &analysis.params {
        occ.entry((p.clone(), analysis.method_line))
            .or_insert((false, BTreeSet::new()))
            .0 = true;
    }
    for (idx, stmt) in analysis.stmts.iter().enumerate() {
        for def in &stmt.defs {
            occ.entry((def.var.clone(), stmt.line))
                .or_insert((false, BTreeSet::new()))
                .0 = true;
        }
        for var in &stmt.uses {
            let entry = occ
                .entry((var.clone(), stmt.line))
                .or_insert((false, BTreeSet::new()));
            entry.1.extend(analysis.reaching_defs(idx, var));
        }
    }

    let mut grouped: BTreeMap<(String, BTreeSet<u32>), BTreeSet<u32>> = BTreeMap::new();
    for ((var, line), (is_def, reaching)) in &occ {
        let key = if *is_def {
            BTreeSet::from([*line])
        } else {
            reaching.clone()
        };
        grouped
            .entry((var.clone(), key))
            .or_default()
            .insert(*line);
    }

    let mut classes: Vec<VarClass> = grouped
        .into_iter()
        .map(|((var, key), lines)| VarClass { var, lines, key })
        .collect();
    classes.sort_by_key(|c| (c.var.clone(), c.representative()));

    let mut by_occurrence = BTreeMap::new();
    for (i, c) in classes.iter().enumerate() {
        for &line in &c.lines {
            by_occurrence.insert((c.var.clone(), line), i);
        }
    }

    EquivalenceClasses {
        method: analysis.method.clone(),
        classes,
        by_occurrence,
    }
}
