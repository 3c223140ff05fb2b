//! Per-method static analysis on transformed methods: statement flattening,
//! control-flow graph, post-dominators, direct control dependence
//! (Ferrante-Ottenstein-Warren over the CFG), and reaching definitions.
//!
//! Definitions are tracked at line granularity because variable occurrences
//! are keyed by (variable, line) everywhere downstream.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::{Expr, Method, Stmt};

/// A definition performed by one statement: the written variable plus the
/// variables its defining expression reads directly (one operand level; a
/// bound temporary stands in for its sub-expression).
#[derive(Debug, Clone)]
pub struct DefInfo {
    pub var: String,
    pub operands: BTreeSet<String>,
    /// Element assignments update the array in place and do not kill the
    /// previous definition.
    pub weak: bool,
}

#[derive(Debug, Clone)]
pub struct StmtNode {
    pub line: u32,
    pub defs: Vec<DefInfo>,
    pub uses: BTreeSet<String>,
    /// For `if`/`while`: the variable the branch tests (the condition's
    /// outermost temporary, or the bare variable). None for a literal
    /// condition or a non-branch statement.
    pub cond_target: Option<String>,
    pub is_branch: bool,
}

#[derive(Debug)]
pub struct Analysis {
    pub method: String,
    pub method_line: u32,
    pub params: Vec<String>,
    pub stmts: Vec<StmtNode>,
    pub entry: usize,
    pub exit: usize,
    pub succs: Vec<Vec<usize>>,
    /// Per CFG node: variable -> lines of definitions reaching node entry.
    pub rd_in: Vec<BTreeMap<String, BTreeSet<u32>>>,
    /// Per statement: indices of the branch statements it is directly
    /// control-dependent on (self-dependence of loop headers excluded).
    pub control_deps: Vec<BTreeSet<usize>>,
}

impl Analysis {
    /// Definition lines of `var` reaching the entry of statement `idx`.
    pub fn reaching_defs(&self, idx: usize, var: &str) -> BTreeSet<u32> {
        self.rd_in[idx].get(var).cloned().unwrap_or_default()
    }

    /// Lines of statements directly governed by branch condition lines,
    /// per governed line.
    pub fn line_governors(&self) -> BTreeMap<u32, BTreeSet<u32>> {
        let mut out: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
        for (idx, deps) in self.control_deps.iter().enumerate() {
            for &g in deps {
                if self.stmts[g].line != self.stmts[idx].line {
                    out.entry(self.stmts[idx].line).or_default().insert(self.stmts[g].line);
                }
            }
        }
        out
    }
}

/// Operand variables of `expr` as seen by its parent, while recording binds
/// as definitions and every read variable as a use.
fn scan_expr(
    expr: &Expr,
    defs: &mut Vec<DefInfo>,
    uses: &mut BTreeSet<String>,
) -> BTreeSet<String> {
    match expr {
        Expr::Var(name) => {
            uses.insert(name.clone());
            BTreeSet::from([name.clone()])
        }
        Expr::Int(_) | Expr::Str(_) | Expr::Bool(_) | Expr::Null => BTreeSet::new(),
        Expr::Bind { temp, value } => {
            let operands = scan_expr(value, defs, uses);
            defs.push(DefInfo { var: temp.clone(), operands, weak: false });
            uses.insert(temp.clone());
            BTreeSet::from([temp.clone()])
        }
        Expr::Unary(_, inner) => scan_expr(inner, defs, uses),
        Expr::Binary(_, lhs, rhs) => {
            let mut ops = scan_expr(lhs, defs, uses);
            ops.extend(scan_expr(rhs, defs, uses));
            ops
        }
        Expr::Index(base, idx) => {
            let mut ops = scan_expr(base, defs, uses);
            ops.extend(scan_expr(idx, defs, uses));
            ops
        }
        Expr::Array(items) => {
            let mut ops = BTreeSet::new();
            for item in items {
                ops.extend(scan_expr(item, defs, uses));
            }
            ops
        }
        Expr::Call { args, .. } => {
            let mut ops = BTreeSet::new();
            for arg in args {
                ops.extend(scan_expr(arg, defs, uses));
            }
            ops
        }
    }
}

fn stmt_node(stmt: &Stmt) -> StmtNode {
    let mut defs = Vec::new();
    let mut uses = BTreeSet::new();
    let mut cond_target = None;
    let mut is_branch = false;
    match stmt {
        Stmt::Assign { target, value, .. } => {
            let operands = scan_expr(value, &mut defs, &mut uses);
            defs.push(DefInfo { var: target.clone(), operands, weak: false });
        }
        Stmt::AssignIndex { target, index, value, .. } => {
            let mut operands = scan_expr(index, &mut defs, &mut uses);
            operands.extend(scan_expr(value, &mut defs, &mut uses));
            operands.insert(target.clone());
            uses.insert(target.clone());
            defs.push(DefInfo { var: target.clone(), operands, weak: true });
        }
        Stmt::If { cond, .. } | Stmt::While { cond, .. } => {
            scan_expr(cond, &mut defs, &mut uses);
            is_branch = true;
            cond_target = match cond {
                Expr::Bind { temp, .. } => Some(temp.clone()),
                Expr::Var(name) => Some(name.clone()),
                _ => None,
            };
        }
        Stmt::Return { value: Some(v), .. } => {
            scan_expr(v, &mut defs, &mut uses);
        }
        Stmt::Return { value: None, .. } | Stmt::Throw { .. } => {}
        Stmt::Assert { cond, .. } => {
            scan_expr(cond, &mut defs, &mut uses);
        }
        Stmt::Expr { expr, .. } => {
            scan_expr(expr, &mut defs, &mut uses);
        }
    }
    StmtNode { line: stmt.line(), defs, uses, cond_target, is_branch }
}

/// Flattened statement layout: pre-order, with each statement's subtree
/// occupying a contiguous index range right after it.
struct Layout {
    nodes: Vec<StmtNode>,
    shapes: Vec<Shape>,
    subtree: Vec<usize>,
}

enum Shape {
    Straight,
    Exits,
    If { then: (usize, usize), els: (usize, usize) },
    While { body: (usize, usize) },
}

fn flatten(stmts: &[Stmt], layout: &mut Layout) {
    for stmt in stmts {
        let idx = layout.nodes.len();
        layout.nodes.push(stmt_node(stmt));
        layout.shapes.push(Shape::Straight);
        layout.subtree.push(1);
        match stmt {
            Stmt::If { then_body, else_body, .. } => {
                let t0 = layout.nodes.len();
                flatten(then_body, layout);
                let e0 = layout.nodes.len();
                flatten(else_body, layout);
                let end = layout.nodes.len();
                layout.shapes[idx] = Shape::If { then: (t0, e0), els: (e0, end) };
                layout.subtree[idx] = end - idx;
            }
            Stmt::While { body, .. } => {
                let b0 = layout.nodes.len();
                flatten(body, layout);
                let end = layout.nodes.len();
                layout.shapes[idx] = Shape::While { body: (b0, end) };
                layout.subtree[idx] = end - idx;
            }
            Stmt::Return { .. } | Stmt::Throw { .. } => {
                layout.shapes[idx] = Shape::Exits;
            }
            _ => {}
        }
    }
}

fn wire_block(layout: &Layout, range: (usize, usize), follow: usize, succs: &mut Vec<Vec<usize>>) {
    let (start, end) = range;
    let mut idx = start;
    while idx < end {
        let next_top = idx + layout.subtree[idx];
        let after = if next_top < end { next_top } else { follow };
        wire_stmt(layout, idx, after, succs);
        idx = next_top;
    }
}

fn push_succ(succs: &mut [Vec<usize>], from: usize, to: usize) {
    if !succs[from].contains(&to) {
        succs[from].push(to);
    }
}

fn wire_stmt(layout: &Layout, idx: usize, follow: usize, succs: &mut Vec<Vec<usize>>) {
    let exit = succs.len() - 1;
    match &layout.shapes[idx] {
        Shape::Straight => push_succ(succs, idx, follow),
        Shape::Exits => push_succ(succs, idx, exit),
        Shape::If { then, els } => {
            for branch in [then, els] {
                if branch.0 < branch.1 {
                    push_succ(succs, idx, branch.0);
                    wire_block(layout, *branch, follow, succs);
                } else {
                    push_succ(succs, idx, follow);
                }
            }
        }
        Shape::While { body } => {
            if body.0 < body.1 {
                push_succ(succs, idx, body.0);
                wire_block(layout, *body, idx, succs);
            } else {
                push_succ(succs, idx, idx);
            }
            push_succ(succs, idx, follow);
        }
    }
}

fn post_dominators(succs: &[Vec<usize>], exit: usize) -> Vec<Option<usize>> {
    let n = succs.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (from, tos) in succs.iter().enumerate() {
        for &to in tos {
            preds[to].push(from);
        }
    }
    // Iterative dataflow on full post-dominator sets; graphs are desk-scale.
    let full: BTreeSet<usize> = (0..n).collect();
    let mut pdom: Vec<BTreeSet<usize>> = vec![full; n];
    pdom[exit] = BTreeSet::from([exit]);
    let mut changed = true;
    while changed {
        changed = false;
        for v in (0..n).rev() {
            if v == exit {
                continue;
            }
            let mut new: Option<BTreeSet<usize>> = None;
            for &s in &succs[v] {
                new = Some(match new {
                    None => pdom[s].clone(),
                    Some(acc) => acc.intersection(&pdom[s]).copied().collect(),
                });
            }
            let mut new = new.unwrap_or_default();
            new.insert(v);
            if new != pdom[v] {
                pdom[v] = new;
                changed = true;
            }
        }
    }
    // Immediate post-dominator: the strict post-dominator dominated by all
    // other strict post-dominators.
    (0..n)
        .map(|v| {
            if v == exit {
                return None;
            }
            let strict: Vec<usize> = pdom[v].iter().copied().filter(|&d| d != v).collect();
            strict
                .iter()
                .copied()
                .find(|&c| strict.iter().all(|&other| pdom[c].contains(&other)))
        })
        .collect()
}

fn control_dependence(
    succs: &[Vec<usize>],
    ipdom: &[Option<usize>],
    n_stmts: usize,
) -> Vec<BTreeSet<usize>> {
    let mut deps: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n_stmts];
    for (a, tos) in succs.iter().enumerate().take(n_stmts) {
        for &b in tos {
            // Walk b up the post-dominator tree until a's immediate
            // post-dominator; every node passed is control-dependent on a.
            let stop = ipdom[a];
            let mut cur = Some(b);
            while let Some(u) = cur {
                if Some(u) == stop {
                    break;
                }
                if u < n_stmts && u != a {
                    deps[u].insert(a);
                }
                cur = ipdom[u];
            }
        }
    }
    deps
}

pub fn analyze(m: &Method) -> Analysis {
    let mut layout = Layout { nodes: Vec::new(), shapes: Vec::new(), subtree: Vec::new() };
    flatten(&m.body, &mut layout);
    let n = layout.nodes.len();
    let entry = n;
    let exit = n + 1;
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n + 2];
    wire_block(&layout, (0, n), exit, &mut succs);
    push_succ(&mut succs, entry, if n > 0 { 0 } else { exit });

    let ipdom = post_dominators(&succs, exit);
    let control_deps = control_dependence(&succs, &ipdom, n);

    // Reaching definitions, forward over the CFG. The entry node generates
    // the parameter bindings at the method's header line.
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n + 2];
    for (from, tos) in succs.iter().enumerate() {
        for &to in tos {
            preds[to].push(from);
        }
    }
    let empty = BTreeMap::new();
    let mut rd_in: Vec<BTreeMap<String, BTreeSet<u32>>> = vec![empty.clone(); n + 2];
    let mut rd_out: Vec<BTreeMap<String, BTreeSet<u32>>> = vec![empty; n + 2];
    for p in &m.params {
        rd_out[entry].entry(p.clone()).or_default().insert(m.line);
    }
    let mut changed = true;
    while changed {
        changed = false;
        for v in 0..n + 2 {
            let mut inn: BTreeMap<String, BTreeSet<u32>> = BTreeMap::new();
            for &p in &preds[v] {
                for (var, lines) in &rd_out[p] {
                    inn.entry(var.clone()).or_default().extend(lines.iter().copied());
                }
            }
            let mut out = inn.clone();
            if v < n {
                for def in &layout.nodes[v].defs {
                    let slot = out.entry(def.var.clone()).or_default();
                    if !def.weak {
                        slot.clear();
                    }
                    slot.insert(layout.nodes[v].line);
                }
            } else if v == entry {
                for p in &m.params {
                    out.entry(p.clone()).or_default().insert(m.line);
                }
            }
            if inn != rd_in[v] || out != rd_out[v] {
                rd_in[v] = inn;
                rd_out[v] = out;
                changed = true;
            }
        }
    }

    Analysis {
        method: m.name.clone(),
        method_line: m.line,
        params: m.params.clone(),
        stmts: layout.nodes,
        entry,
        exit,
        succs,
        rd_in,
        control_deps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::parse_program;
    use crate::lang::transform::transform_gsa;

    fn analyzed(src: &str) -> Analysis {
        let p = transform_gsa(&parse_program(src).unwrap());
        analyze(&p.methods[0])
    }

    #[test]
    fn straight_line_reaching_defs() {
        let a = analyzed("method f() {\n  x = 1;\n  y = x + 1;\n  return y;\n}");
        assert_eq!(a.reaching_defs(1, "x"), BTreeSet::from([2]));
        assert_eq!(a.reaching_defs(2, "y"), BTreeSet::from([3]));
    }

    #[test]
    fn redefinition_kills_earlier_def() {
        let a = analyzed("method f() {\n  x = 1;\n  x = 2;\n  return x;\n}");
        assert_eq!(a.reaching_defs(2, "x"), BTreeSet::from([3]));
    }

    #[test]
    fn branch_defs_merge_at_join() {
        let src = "method f(c) {\n  if (c) {\n    x = 1;\n  } else {\n    x = 2;\n  }\n  return x;\n}";
        let a = analyzed(src);
        let ret = a.stmts.iter().position(|s| s.uses.contains("x")).unwrap();
        assert_eq!(a.reaching_defs(ret, "x"), BTreeSet::from([3, 5]));
    }

    #[test]
    fn loop_body_def_reaches_loop_condition() {
        let src = "method f(n) {\n  i = 0;\n  while (i < n) {\n    i = i + 1;\n  }\n  return i;\n}";
        let a = analyzed(src);
        assert_eq!(a.reaching_defs(1, "i"), BTreeSet::from([2, 4]));
    }

    #[test]
    fn element_assignment_is_a_weak_def() {
        let src = "method f() {\n  a = [1, 2];\n  a[0] = 9;\n  return a;\n}";
        let a = analyzed(src);
        assert_eq!(a.reaching_defs(2, "a"), BTreeSet::from([2, 3]));
    }

    #[test]
    fn params_reach_first_use_from_header_line() {
        let a = analyzed("method f(s) {\n  x = s;\n  return x;\n}");
        assert_eq!(a.reaching_defs(0, "s"), BTreeSet::from([1]));
    }

    #[test]
    fn then_branch_is_control_dependent_on_its_if_only() {
        let src = "method f(a, b) {\n  if (a > 0) {\n    if (b > 0) {\n      x = 1;\n    }\n  }\n  return 0;\n}";
        let a = analyzed(src);
        let inner_if = 1;
        let assign = 2;
        assert_eq!(a.control_deps[assign], BTreeSet::from([inner_if]));
        assert_eq!(a.control_deps[inner_if], BTreeSet::from([0]));
    }

    #[test]
    fn else_branch_is_control_dependent_on_the_if() {
        let src = "method f(c) {\n  if (c) {\n    x = 1;\n  } else {\n    x = 2;\n  }\n  return x;\n}";
        let a = analyzed(src);
        assert_eq!(a.control_deps[1], BTreeSet::from([0]));
        assert_eq!(a.control_deps[2], BTreeSet::from([0]));
        assert!(a.control_deps[3].is_empty());
    }

    #[test]
    fn loop_body_is_control_dependent_on_the_while() {
        let src = "method f(n) {\n  i = 0;\n  while (i < n) {\n    i = i + 1;\n  }\n  return i;\n}";
        let a = analyzed(src);
        assert_eq!(a.control_deps[2], BTreeSet::from([1]));
    }

    #[test]
    fn code_after_a_conditional_throw_depends_on_the_condition() {
        let src = "method f(x) {\n  if (x < 0) {\n    throw \"neg\";\n  }\n  y = x;\n  return y;\n}";
        let a = analyzed(src);
        assert_eq!(a.control_deps[2], BTreeSet::from([0]));
    }

    #[test]
    fn every_statement_is_reachable_from_entry() {
        let src = "method f(n) {\n  i = 0;\n  while (i < n) {\n    if (i > 2) {\n      i = i + 2;\n    } else {\n      i = i + 1;\n    }\n  }\n  return i;\n}";
        let a = analyzed(src);
        let mut seen = vec![false; a.succs.len()];
        let mut stack = vec![a.entry];
        while let Some(v) = stack.pop() {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            stack.extend(a.succs[v].iter().copied());
        }
        assert!(seen.iter().all(|&s| s), "unreachable CFG node");
    }

    #[test]
    fn cond_target_is_the_temp_or_bare_variable() {
        let src = "method f(a, flag) {\n  if (a > 1) {\n    x = 1;\n  }\n  while (flag) {\n    flag = false;\n  }\n  return 0;\n}";
        let a = analyzed(src);
        assert_eq!(a.stmts[0].cond_target.as_deref(), Some("__tf_1"));
        assert_eq!(a.stmts[2].cond_target.as_deref(), Some("flag"));
    }

    #[test]
    fn line_governors_map_uses_condition_lines() {
        let src = "method f(c) {\n  if (c > 0) {\n    x = 1;\n  }\n  return 0;\n}";
        let a = analyzed(src);
        let gov = a.line_governors();
        assert_eq!(gov.get(&3), Some(&BTreeSet::from([2])));
        assert_eq!(gov.get(&5), None);
    }
}
