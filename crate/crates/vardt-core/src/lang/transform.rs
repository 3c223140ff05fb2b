//! Rewrites methods so that every compound sub-expression in a condition, a
//! return expression, or a call argument is bound to a fresh temporary.
//!
//! Binds are expression-level (`Expr::Bind`), so the statement structure and
//! line numbers are untouched and short-circuit operands that are never
//! evaluated never define their temporary. `a > b && c > d` becomes
//! `(t1 := ((t2 := a > b) && (t3 := c > d)))` with temporaries numbered in
//! pre-order. Plain assignment right-hand sides stay as written: the assigned
//! variable itself is the observable there.

use std::collections::BTreeSet;

use super::ast::{Expr, Method, Program, Stmt, TempKind, TempOrigin};

struct Binder<'a> {
    method: String,
    counter: u32,
    origins: &'a mut Vec<(String, TempOrigin)>,
}

impl Binder<'_> {
    fn fresh(&mut self, value: &Expr, line: u32, kind: TempKind) -> String {
        self.counter += 1;
        let name = format!("__t{}_{}", self.method, self.counter);
        let mut source_vars = BTreeSet::new();
        collect_program_vars(value, &mut source_vars);
        self.origins.push((
            name.clone(),
            TempOrigin {
                method: self.method.clone(),
                line,
                kind,
                source_text: value.to_string(),
                source_vars: source_vars.into_iter().collect(),
            },
        ));
        name
    }

    /// Binds `expr` (and, recursively, its compound sub-expressions) to
    /// temporaries. Atomic expressions are returned unchanged.
    fn bind(&mut self, expr: Expr, line: u32, kind: TempKind) -> Expr {
        if expr.is_atomic() {
            return expr;
        }
        let temp = self.fresh(&expr, line, kind);
        let inner = self.descend(expr, line, kind);
        Expr::Bind { temp, value: Box::new(inner) }
    }

    fn descend(&mut self, expr: Expr, line: u32, kind: TempKind) -> Expr {
        match expr {
            Expr::Unary(op, inner) => Expr::Unary(op, Box::new(self.bind(*inner, line, kind))),
            Expr::Binary(op, lhs, rhs) => Expr::Binary(
                op,
                Box::new(self.bind(*lhs, line, kind)),
                Box::new(self.bind(*rhs, line, kind)),
            ),
            Expr::Index(base, idx) => Expr::Index(
                Box::new(self.bind(*base, line, kind)),
                Box::new(self.bind(*idx, line, kind)),
            ),
            Expr::Array(items) => {
                Expr::Array(items.into_iter().map(|e| self.bind(e, line, kind)).collect())
            }
            Expr::Call { callee, args } => Expr::Call {
                callee,
                args: args
                    .into_iter()
                    .map(|a| self.bind(a, line, TempKind::ReturnOrArg))
                    .collect(),
            },
            atomic => atomic,
        }
    }

    /// Walks an expression in a plain (non-binding) position. Only call
    /// arguments found inside are bound.
    fn walk_plain(&mut self, expr: Expr, line: u32) -> Expr {
        match expr {
            Expr::Unary(op, inner) => Expr::Unary(op, Box::new(self.walk_plain(*inner, line))),
            Expr::Binary(op, lhs, rhs) => Expr::Binary(
                op,
                Box::new(self.walk_plain(*lhs, line)),
                Box::new(self.walk_plain(*rhs, line)),
            ),
            Expr::Index(base, idx) => Expr::Index(
                Box::new(self.walk_plain(*base, line)),
                Box::new(self.walk_plain(*idx, line)),
            ),
            Expr::Array(items) => {
                Expr::Array(items.into_iter().map(|e| self.walk_plain(e, line)).collect())
            }
            Expr::Call { callee, args } => Expr::Call {
                callee,
                args: args
                    .into_iter()
                    .map(|a| self.bind(a, line, TempKind::ReturnOrArg))
                    .collect(),
            },
            atomic => atomic,
        }
    }

    fn stmt(&mut self, stmt: Stmt) -> Stmt {
        match stmt {
            Stmt::Assign { target, value, line } => {
                Stmt::Assign { target, value: self.walk_plain(value, line), line }
            }
            Stmt::AssignIndex { target, index, value, line } => Stmt::AssignIndex {
                target,
                index: self.walk_plain(index, line),
                value: self.walk_plain(value, line),
                line,
            },
            Stmt::If { cond, then_body, else_body, line } => Stmt::If {
                cond: self.bind(cond, line, TempKind::Condition),
                then_body: then_body.into_iter().map(|s| self.stmt(s)).collect(),
                else_body: else_body.into_iter().map(|s| self.stmt(s)).collect(),
                line,
            },
            Stmt::While { cond, body, line } => Stmt::While {
                cond: self.bind(cond, line, TempKind::Condition),
                body: body.into_iter().map(|s| self.stmt(s)).collect(),
                line,
            },
            Stmt::Return { value, line } => Stmt::Return {
                value: value.map(|v| self.bind(v, line, TempKind::ReturnOrArg)),
                line,
            },
            Stmt::Assert { cond, line } => {
                Stmt::Assert { cond: self.bind(cond, line, TempKind::Condition), line }
            }
            Stmt::Expr { expr, line } => Stmt::Expr { expr: self.walk_plain(expr, line), line },
            done @ Stmt::Throw { .. } => done,
        }
    }
}

fn collect_program_vars(expr: &Expr, out: &mut BTreeSet<String>) {
    match expr {
        Expr::Var(name) => {
            out.insert(name.clone());
        }
        Expr::Unary(_, inner) => collect_program_vars(inner, out),
        Expr::Binary(_, lhs, rhs) => {
            collect_program_vars(lhs, out);
            collect_program_vars(rhs, out);
        }
        Expr::Index(base, idx) => {
            collect_program_vars(base, out);
            collect_program_vars(idx, out);
        }
        Expr::Array(items) => {
            for item in items {
                collect_program_vars(item, out);
            }
        }
        Expr::Call { args, .. } => {
            for arg in args {
                collect_program_vars(arg, out);
            }
        }
        Expr::Bind { value, .. } => collect_program_vars(value, out),
        Expr::Int(_) | Expr::Str(_) | Expr::Bool(_) | Expr::Null => {}
    }
}

/// Returns a fresh program with all method bodies rewritten into bound form.
/// The input program must not already contain temporaries.
pub fn transform_gsa(p: &Program) -> Program {
    let mut origins = Vec::new();
    let methods = p
        .methods
        .iter()
        .map(|m| {
            let mut binder =
                Binder { method: m.name.clone(), counter: 0, origins: &mut origins };
            Method {
                name: m.name.clone(),
                params: m.params.clone(),
                body: m.body.iter().cloned().map(|s| binder.stmt(s)).collect(),
                line: m.line,
            }
        })
        .collect();
    Program { methods, source_map: origins.into_iter().collect() }
}

/// True for names produced by [`transform_gsa`].
pub fn is_temp_name(name: &str) -> bool {
    name.starts_with("__t")
}
