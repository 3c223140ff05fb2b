//! Abstract syntax for MiniLang programs.
//!
//! Statements keep the 1-based source line they start on; every occurrence
//! of a variable is attributed to that line, which is what the dependence
//! graph, the slicer and the profiler key on.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub methods: Vec<Method>,
    /// Origin of every temporary introduced by the GSA transform, keyed by
    /// temporary name. Empty for untransformed programs.
    pub source_map: BTreeMap<String, TempOrigin>,
}

impl Program {
    pub fn method(&self, name: &str) -> Option<&Method> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn method_mut(&mut self, name: &str) -> Option<&mut Method> {
        self.methods.iter_mut().find(|m| m.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Method {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
    /// Line of the method header; parameters count as defined here.
    pub line: u32,
}

/// Where a GSA temporary came from: the original line and the source text of
/// the expression it now names, plus the program variables it is computed
/// from (transitively, through other temporaries).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TempOrigin {
    pub method: String,
    pub line: u32,
    pub kind: TempKind,
    pub source_text: String,
    pub source_vars: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TempKind {
    Condition,
    ReturnOrArg,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Assign { target: String, value: Expr, line: u32 },
    AssignIndex { target: String, index: Expr, value: Expr, line: u32 },
    If { cond: Expr, then_body: Vec<Stmt>, else_body: Vec<Stmt>, line: u32 },
    While { cond: Expr, body: Vec<Stmt>, line: u32 },
    Return { value: Option<Expr>, line: u32 },
    Throw { message: String, line: u32 },
    Assert { cond: Expr, line: u32 },
    /// Expression evaluated for effect, e.g. a bare call.
    Expr { expr: Expr, line: u32 },
}

impl Stmt {
    pub fn line(&self) -> u32 {
        match self {
            Stmt::Assign { line, .. }
            | Stmt::AssignIndex { line, .. }
            | Stmt::If { line, .. }
            | Stmt::While { line, .. }
            | Stmt::Return { line, .. }
            | Stmt::Throw { line, .. }
            | Stmt::Assert { line, .. }
            | Stmt::Expr { line, .. } => *line,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(i64),
    Str(String),
    Bool(bool),
    Null,
    Var(String),
    Array(Vec<Expr>),
    Index(Box<Expr>, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call { callee: String, args: Vec<Expr> },
    /// `temp = value` evaluated in expression position; inserted by the GSA
    /// transform. The temporary is only defined when the sub-expression is
    /// actually evaluated, which preserves short-circuit semantics.
    Bind { temp: String, value: Box<Expr> },
}

impl Expr {
    /// Atomic expressions (a single variable or literal) are never wrapped
    /// in a temporary by the transform.
    pub fn is_atomic(&self) -> bool {
        matches!(
            self,
            Expr::Int(_) | Expr::Str(_) | Expr::Bool(_) | Expr::Null | Expr::Var(_)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl fmt::Display for UnOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnOp::Neg => "-",
            UnOp::Not => "!",
        })
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Str(s) => write!(f, "{s:?}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Null => f.write_str("null"),
            Expr::Var(v) => f.write_str(v),
            Expr::Array(items) => {
                f.write_str("[")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("]")
            }
            Expr::Index(base, idx) => write!(f, "{base}[{idx}]"),
            Expr::Unary(op, e) => write!(f, "{op}{e}"),
            Expr::Binary(op, l, r) => write!(f, "({l} {op} {r})"),
            Expr::Call { callee, args } => {
                write!(f, "{callee}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Expr::Bind { temp, value } => write!(f, "({temp} := {value})"),
        }
    }
}

/// Test suite: named test bodies that call into the program under test and
/// check results with `assert`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSuite {
    pub tests: Vec<TestCase>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestCase {
    pub id: String,
    pub body: Vec<Stmt>,
    pub line: u32,
}
