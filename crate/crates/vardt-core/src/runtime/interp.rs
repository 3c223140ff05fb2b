//! Tree-walking interpreter with line coverage and value observation.
//!
//! Any runtime error fails the test and records the innermost frame as the
//! failure site. A step budget and a call-depth cap turn runaway loops and
//! recursion into ordinary failures instead of hanging the process.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::lang::{BinOp, Expr, Method, OccKind, Program, Stmt, TempKind, TestCase, TestSuite, UnOp};
use crate::runtime::trace::{ElemValue, ObsValue, TestLabel, TestTrace, VariableObservation};
use crate::runtime::value::Value;

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Combined statement and expression evaluation budget per test.
    pub budget: u64,
    pub max_call_depth: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            budget: 1_000_000,
            max_call_depth: 64,
        }
    }
}

/// Which occurrences the run records values for. Coverage runs use `None`,
/// profiling runs restrict to the slice with `Only`, and trace dumps use
/// `All`. Keys are (method, variable, line).
#[derive(Debug, Clone)]
pub enum ObserveMode {
    None,
    All,
    Only(BTreeSet<(String, String, u32)>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FailureKind {
    #[error("index out of bounds")]
    IndexOutOfBounds,
    #[error("division by zero")]
    DivisionByZero,
    #[error("type error: {0}")]
    TypeError(String),
    #[error("undefined variable {0}")]
    UndefinedVariable(String),
    #[error("undefined method {0}")]
    UndefinedMethod(String),
    #[error("{method} expects {expected} arguments, got {got}")]
    ArityMismatch {
        method: String,
        expected: usize,
        got: usize,
    },
    #[error("throw: {0}")]
    UserThrow(String),
    #[error("assertion failed")]
    AssertionFailed,
    #[error("step budget exhausted")]
    BudgetExhausted,
    #[error("call depth exceeded")]
    CallDepthExceeded,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at {}:{}", site.0, site.1)]
pub struct RunFailure {
    pub kind: FailureKind,
    /// Innermost frame name (method, or test id for test-body failures) and
    /// the line being executed when the failure arose.
    pub site: (String, u32),
}

enum Flow {
    Normal,
    Return(Value),
}

struct Frame {
    name: String,
    in_program: bool,
    vars: BTreeMap<String, Value>,
    line: u32,
    depth: usize,
}

impl Frame {
    fn fail(&self, kind: FailureKind) -> RunFailure {
        RunFailure {
            kind,
            site: (self.name.clone(), self.line),
        }
    }
}

struct Interp<'p> {
    program: &'p Program,
    config: &'p RunConfig,
    mode: &'p ObserveMode,
    steps: u64,
    seq: u64,
    lines: BTreeMap<String, Vec<u32>>,
    observations: Vec<VariableObservation>,
}

impl<'p> Interp<'p> {
    fn step(&mut self, frame: &Frame) -> Result<(), RunFailure> {
        self.steps += 1;
        if self.steps > self.config.budget {
            return Err(frame.fail(FailureKind::BudgetExhausted));
        }
        Ok(())
    }

    fn record_line(&mut self, frame: &Frame, line: u32) {
        if frame.in_program {
            self.lines.entry(frame.name.clone()).or_default().push(line);
        }
    }

    fn occ_kind(&self, var: &str) -> OccKind {
        match self.program.source_map.get(var).map(|o| o.kind) {
            Some(TempKind::Condition) => OccKind::TempCondition,
            Some(TempKind::ReturnOrArg) => OccKind::TempReturnArg,
            None => OccKind::ProgramVariable,
        }
    }

    fn observe(&mut self, frame: &Frame, var: &str, value: &Value) {
        if !frame.in_program {
            return;
        }
        match self.mode {
            ObserveMode::None => return,
            ObserveMode::All => {}
            ObserveMode::Only(allowed) => {
                let key = (frame.name.clone(), var.to_string(), frame.line);
                if !allowed.contains(&key) {
                    return;
                }
            }
        }
        let occ_kind = self.occ_kind(var);
        let push = |interp: &mut Self, value: ObsValue| {
            interp.seq += 1;
            interp.observations.push(VariableObservation {
                method: frame.name.clone(),
                var: var.to_string(),
                line: frame.line,
                occ_kind,
                seq: interp.seq,
                value,
            });
        };
        // auxiliary projections first, the type's primary projection last
        match value {
            Value::Int(n) => {
                push(self, ObsValue::Nominal(value.render()));
                push(self, ObsValue::Numeric(*n));
            }
            Value::Bool(b) => {
                push(self, ObsValue::Nominal(value.render()));
                push(self, ObsValue::Boolean(*b));
            }
            Value::Str(s) => {
                push(self, ObsValue::TypeTag("string".into()));
                push(self, ObsValue::NullCheck(false));
                push(self, ObsValue::Size(s.chars().count() as i64));
                push(self, ObsValue::Nominal(s.clone()));
            }
            Value::Array(items) => {
                push(self, ObsValue::TypeTag("array".into()));
                push(self, ObsValue::NullCheck(false));
                for (i, item) in items.iter().enumerate() {
                    match item {
                        Value::Int(n) => push(self, ObsValue::Element(i, ElemValue::Num(*n))),
                        Value::Bool(b) => push(self, ObsValue::Element(i, ElemValue::Bool(*b))),
                        _ => {}
                    }
                }
                push(self, ObsValue::Size(items.len() as i64));
                push(self, ObsValue::Nominal(value.render()));
            }
            Value::Null => {
                push(self, ObsValue::TypeTag("null".into()));
                push(self, ObsValue::NullCheck(true));
                push(self, ObsValue::Nominal("null".into()));
            }
        }
    }

    fn exec_block(&mut self, frame: &mut Frame, stmts: &[Stmt]) -> Result<Flow, RunFailure> {
        for stmt in stmts {
            match self.exec_stmt(frame, stmt)? {
                Flow::Normal => {}
                ret => return Ok(ret),
            }
        }
        Ok(Flow::Normal)
    }

    fn exec_stmt(&mut self, frame: &mut Frame, stmt: &Stmt) -> Result<Flow, RunFailure> {
        frame.line = stmt.line();
        self.record_line(frame, stmt.line());
        self.step(frame)?;
        match stmt {
            Stmt::Assign { target, value, .. } => {
                let v = self.eval(frame, value)?;
                frame.vars.insert(target.clone(), v.clone());
                self.observe(frame, target, &v);
                Ok(Flow::Normal)
            }
            Stmt::AssignIndex {
                target,
                index,
                value,
                ..
            } => {
                let current = match frame.vars.get(target) {
                    Some(v) => v.clone(),
                    None => {
                        return Err(frame.fail(FailureKind::UndefinedVariable(target.clone())))
                    }
                };
                self.observe(frame, target, &current);
                let idx = self.eval(frame, index)?;
                let val = self.eval(frame, value)?;
                let mut items = match current {
                    Value::Array(items) => items,
                    other => {
                        return Err(frame.fail(FailureKind::TypeError(format!(
                            "cannot index into {}",
                            other.type_tag()
                        ))))
                    }
                };
                let i = match idx {
                    Value::Int(i) => i,
                    other => {
                        return Err(frame.fail(FailureKind::TypeError(format!(
                            "array index must be int, got {}",
                            other.type_tag()
                        ))))
                    }
                };
                if i < 0 || i as usize >= items.len() {
                    return Err(frame.fail(FailureKind::IndexOutOfBounds));
                }
                items[i as usize] = val;
                let updated = Value::Array(items);
                frame.vars.insert(target.clone(), updated.clone());
                self.observe(frame, target, &updated);
                Ok(Flow::Normal)
            }
            Stmt::If {
                cond,
                then_body,
                else_body,
                ..
            } => {
                let c = self.eval_bool(frame, cond, "if condition")?;
                if c {
                    self.exec_block(frame, then_body)
                } else {
                    self.exec_block(frame, else_body)
                }
            }
            Stmt::While { cond, body, line } => {
                loop {
                    frame.line = *line;
                    if !self.eval_bool(frame, cond, "while condition")? {
                        break;
                    }
                    match self.exec_block(frame, body)? {
                        Flow::Normal => {}
                        ret => return Ok(ret),
                    }
                    frame.line = *line;
                    self.record_line(frame, *line);
                    self.step(frame)?;
                }
                Ok(Flow::Normal)
            }
            Stmt::Return { value, .. } => {
                let v = match value {
                    Some(e) => self.eval(frame, e)?,
                    None => Value::Null,
                };
                Ok(Flow::Return(v))
            }
            Stmt::Throw { message, .. } => {
                Err(frame.fail(FailureKind::UserThrow(message.clone())))
            }
            Stmt::Assert { cond, .. } => {
                if self.eval_bool(frame, cond, "assert condition")? {
                    Ok(Flow::Normal)
                } else {
                    Err(frame.fail(FailureKind::AssertionFailed))
                }
            }
            Stmt::Expr { expr, .. } => {
                self.eval(frame, expr)?;
                Ok(Flow::Normal)
            }
        }
    }

    fn eval_bool(&mut self, frame: &mut Frame, expr: &Expr, what: &str) -> Result<bool, RunFailure> {
        match self.eval(frame, expr)? {
            Value::Bool(b) => Ok(b),
            other => Err(frame.fail(FailureKind::TypeError(format!(
                "{what} must be bool, got {}",
                other.type_tag()
            )))),
        }
    }

    fn eval(&mut self, frame: &mut Frame, expr: &Expr) -> Result<Value, RunFailure> {
        self.step(frame)?;
        match expr {
            Expr::Int(n) => Ok(Value::Int(*n)),
            Expr::Str(s) => Ok(Value::Str(s.clone())),
            Expr::Bool(b) => Ok(Value::Bool(*b)),
            Expr::Null => Ok(Value::Null),
            Expr::Var(name) => {
                let v = match frame.vars.get(name) {
                    Some(v) => v.clone(),
                    None => {
                        return Err(frame.fail(FailureKind::UndefinedVariable(name.clone())))
                    }
                };
                self.observe(frame, name, &v);
                Ok(v)
            }
            Expr::Array(items) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    out.push(self.eval(frame, item)?);
                }
                Ok(Value::Array(out))
            }
            Expr::Index(base, index) => {
                let b = self.eval(frame, base)?;
                let i = self.eval(frame, index)?;
                let items = match b {
                    Value::Array(items) => items,
                    other => {
                        return Err(frame.fail(FailureKind::TypeError(format!(
                            "cannot index into {}",
                            other.type_tag()
                        ))))
                    }
                };
                match i {
                    Value::Int(i) if i >= 0 && (i as usize) < items.len() => {
                        Ok(items[i as usize].clone())
                    }
                    Value::Int(_) => Err(frame.fail(FailureKind::IndexOutOfBounds)),
                    other => Err(frame.fail(FailureKind::TypeError(format!(
                        "array index must be int, got {}",
                        other.type_tag()
                    )))),
                }
            }
            Expr::Unary(UnOp::Neg, e) => match self.eval(frame, e)? {
                Value::Int(n) => Ok(Value::Int(n.wrapping_neg())),
                other => Err(frame.fail(FailureKind::TypeError(format!(
                    "cannot negate {}",
                    other.type_tag()
                )))),
            },
            Expr::Unary(UnOp::Not, e) => match self.eval(frame, e)? {
                Value::Bool(b) => Ok(Value::Bool(!b)),
                other => Err(frame.fail(FailureKind::TypeError(format!(
                    "cannot apply ! to {}",
                    other.type_tag()
                )))),
            },
            Expr::Binary(op, a, b) => self.eval_binary(frame, *op, a, b),
            Expr::Call { callee, args } => {
                let mut values = Vec::with_capacity(args.len());
                for arg in args {
                    values.push(self.eval(frame, arg)?);
                }
                self.call(frame, callee, values)
            }
            Expr::Bind { temp, value } => {
                let v = self.eval(frame, value)?;
                frame.vars.insert(temp.clone(), v.clone());
                self.observe(frame, temp, &v);
                Ok(v)
            }
        }
    }

    fn eval_binary(
        &mut self,
        frame: &mut Frame,
        op: BinOp,
        a: &Expr,
        b: &Expr,
    ) -> Result<Value, RunFailure> {
        if op == BinOp::Or || op == BinOp::And {
            let left = self.eval_bool(frame, a, "logical operand")?;
            let short = if op == BinOp::Or { left } else { !left };
            if short {
                return Ok(Value::Bool(left));
            }
            let right = self.eval_bool(frame, b, "logical operand")?;
            return Ok(Value::Bool(right));
        }
        let va = self.eval(frame, a)?;
        let vb = self.eval(frame, b)?;
        match op {
            BinOp::Eq => Ok(Value::Bool(va == vb)),
            BinOp::Ne => Ok(Value::Bool(va != vb)),
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                let (x, y) = match (&va, &vb) {
                    (Value::Int(x), Value::Int(y)) => (*x, *y),
                    _ => {
                        return Err(frame.fail(FailureKind::TypeError(format!(
                            "cannot compare {} and {}",
                            va.type_tag(),
                            vb.type_tag()
                        ))))
                    }
                };
                let r = match op {
                    BinOp::Lt => x < y,
                    BinOp::Le => x <= y,
                    BinOp::Gt => x > y,
                    _ => x >= y,
                };
                Ok(Value::Bool(r))
            }
            BinOp::Add => match (&va, &vb) {
                (Value::Int(x), Value::Int(y)) => Ok(Value::Int(x.wrapping_add(*y))),
                (Value::Str(x), Value::Str(y)) => Ok(Value::Str(format!("{x}{y}"))),
                _ => Err(frame.fail(FailureKind::TypeError(format!(
                    "cannot add {} and {}",
                    va.type_tag(),
                    vb.type_tag()
                )))),
            },
            BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem => {
                let (x, y) = match (&va, &vb) {
                    (Value::Int(x), Value::Int(y)) => (*x, *y),
                    _ => {
                        return Err(frame.fail(FailureKind::TypeError(format!(
                            "arithmetic needs ints, got {} and {}",
                            va.type_tag(),
                            vb.type_tag()
                        ))))
                    }
                };
                let r = match op {
                    BinOp::Sub => x.wrapping_sub(y),
                    BinOp::Mul => x.wrapping_mul(y),
                    BinOp::Div | BinOp::Rem => {
                        if y == 0 {
                            return Err(frame.fail(FailureKind::DivisionByZero));
                        }
                        if op == BinOp::Div {
                            x.wrapping_div(y)
                        } else {
                            x.wrapping_rem(y)
                        }
                    }
                    _ => unreachable!(),
                };
                Ok(Value::Int(r))
            }
            BinOp::Or | BinOp::And => unreachable!("handled above"),
        }
    }

    fn call(&mut self, frame: &Frame, callee: &str, args: Vec<Value>) -> Result<Value, RunFailure> {
        if let Some(result) = self.builtin(frame, callee, &args) {
            return result;
        }
        let method = match self.program.method(callee) {
            Some(m) => m,
            None => return Err(frame.fail(FailureKind::UndefinedMethod(callee.to_string()))),
        };
        if method.params.len() != args.len() {
            return Err(frame.fail(FailureKind::ArityMismatch {
                method: callee.to_string(),
                expected: method.params.len(),
                got: args.len(),
            }));
        }
        if frame.depth + 1 > self.config.max_call_depth {
            return Err(frame.fail(FailureKind::CallDepthExceeded));
        }
        self.invoke_method(method, args, frame.depth + 1)
    }

    fn invoke_method(
        &mut self,
        method: &Method,
        args: Vec<Value>,
        depth: usize,
    ) -> Result<Value, RunFailure> {
        let mut callee = Frame {
            name: method.name.clone(),
            in_program: true,
            vars: BTreeMap::new(),
            line: method.line,
            depth,
        };
        self.record_line(&callee, method.line);
        self.step(&callee)?;
        for (param, value) in method.params.iter().zip(args) {
            callee.vars.insert(param.clone(), value.clone());
            self.observe(&callee, param, &value);
        }
        match self.exec_block(&mut callee, &method.body)? {
            Flow::Return(v) => Ok(v),
            Flow::Normal => Ok(Value::Null),
        }
    }

    fn builtin(
        &mut self,
        frame: &Frame,
        callee: &str,
        args: &[Value],
    ) -> Option<Result<Value, RunFailure>> {
        let arity = |expected: usize| -> Option<RunFailure> {
            if args.len() != expected {
                Some(frame.fail(FailureKind::ArityMismatch {
                    method: callee.to_string(),
                    expected,
                    got: args.len(),
                }))
            } else {
                None
            }
        };
        let type_err = |msg: String| frame.fail(FailureKind::TypeError(msg));
        match callee {
            "length" => Some((|| {
                if let Some(e) = arity(1) {
                    return Err(e);
                }
                match &args[0] {
                    Value::Str(s) => Ok(Value::Int(s.chars().count() as i64)),
                    Value::Array(items) => Ok(Value::Int(items.len() as i64)),
                    other => Err(type_err(format!("length of {}", other.type_tag()))),
                }
            })()),
            "charAt" => Some((|| {
                if let Some(e) = arity(2) {
                    return Err(e);
                }
                let (s, i) = match (&args[0], &args[1]) {
                    (Value::Str(s), Value::Int(i)) => (s, *i),
                    _ => return Err(type_err("charAt needs (string, int)".into())),
                };
                let chars: Vec<char> = s.chars().collect();
                if i < 0 || i as usize >= chars.len() {
                    return Err(frame.fail(FailureKind::IndexOutOfBounds));
                }
                Ok(Value::Int(chars[i as usize] as i64))
            })()),
            "indexOf" => Some((|| {
                if let Some(e) = arity(2) {
                    return Err(e);
                }
                let (s, needle) = match (&args[0], &args[1]) {
                    (Value::Str(s), Value::Str(n)) => (s, n),
                    _ => return Err(type_err("indexOf needs (string, string)".into())),
                };
                let hay: Vec<char> = s.chars().collect();
                let pat: Vec<char> = needle.chars().collect();
                if pat.is_empty() {
                    return Ok(Value::Int(0));
                }
                if pat.len() > hay.len() {
                    return Ok(Value::Int(-1));
                }
                for i in 0..=hay.len() - pat.len() {
                    if hay[i..i + pat.len()] == pat[..] {
                        return Ok(Value::Int(i as i64));
                    }
                }
                Ok(Value::Int(-1))
            })()),
            "substring" => Some((|| {
                if let Some(e) = arity(3) {
                    return Err(e);
                }
                let (s, a, b) = match (&args[0], &args[1], &args[2]) {
                    (Value::Str(s), Value::Int(a), Value::Int(b)) => (s, *a, *b),
                    _ => return Err(type_err("substring needs (string, int, int)".into())),
                };
                let chars: Vec<char> = s.chars().collect();
                if a < 0 || b < a || b as usize > chars.len() {
                    return Err(frame.fail(FailureKind::IndexOutOfBounds));
                }
                Ok(Value::Str(chars[a as usize..b as usize].iter().collect()))
            })()),
            _ => None,
        }
    }
}

/// Run one test body against the program. Failures of any kind mark the
/// test FAIL; the trace carries coverage, the failure site, and whatever
/// observations the mode allows.
pub fn run_test(
    program: &Program,
    test: &TestCase,
    mode: &ObserveMode,
    config: &RunConfig,
) -> TestTrace {
    let mut interp = Interp {
        program,
        config,
        mode,
        steps: 0,
        seq: 0,
        lines: BTreeMap::new(),
        observations: Vec::new(),
    };
    let mut frame = Frame {
        name: test.id.clone(),
        in_program: false,
        vars: BTreeMap::new(),
        line: test.line,
        depth: 0,
    };
    let result = interp.exec_block(&mut frame, &test.body);
    let (label, failure_site, budget_exhausted) = match result {
        Ok(_) => (TestLabel::Pass, None, false),
        Err(f) => {
            let budget = f.kind == FailureKind::BudgetExhausted;
            (TestLabel::Fail, Some(f.site), budget)
        }
    };
    TestTrace {
        test_id: test.id.clone(),
        label,
        budget_exhausted,
        per_method_lines: interp.lines,
        failure_site,
        observations: interp.observations,
    }
}

/// Run the whole suite. Tests execute in parallel; the returned traces are
/// in suite order regardless of scheduling.
pub fn run_suite(
    program: &Program,
    suite: &TestSuite,
    mode: &ObserveMode,
    config: &RunConfig,
) -> Vec<TestTrace> {
    suite
        .tests
        .par_iter()
        .map(|t| run_test(program, t, mode, config))
        .collect()
}

/// Call a single method directly, observing nothing. Used by differential
/// and corpus checks.
pub fn invoke(
    program: &Program,
    method: &str,
    args: Vec<Value>,
    config: &RunConfig,
) -> Result<Value, RunFailure> {
    let mode = ObserveMode::None;
    let mut interp = Interp {
        program,
        config,
        mode: &mode,
        steps: 0,
        seq: 0,
        lines: BTreeMap::new(),
        observations: Vec::new(),
    };
    let driver = Frame {
        name: "<driver>".into(),
        in_program: false,
        vars: BTreeMap::new(),
        line: 0,
        depth: 0,
    };
    interp.call(&driver, method, args)
}
