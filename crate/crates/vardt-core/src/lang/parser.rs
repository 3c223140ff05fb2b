//! Hand-written lexer and recursive-descent parser for MiniLang.
//!
//! ```text
//! program   := method+
//! method    := "method" IDENT "(" [IDENT ("," IDENT)*] ")" block
//! block     := "{" stmt* "}"
//! stmt      := IDENT "=" expr ";"
//!            | IDENT "[" expr "]" "=" expr ";"
//!            | "if" "(" expr ")" block ["else" (block | if-stmt)]
//!            | "while" "(" expr ")" block
//!            | "return" [expr] ";"
//!            | "throw" STRING ";"
//!            | "assert" expr ";"
//!            | expr ";"
//! ```
//! Expressions use C-style precedence: `||`, `&&`, equality, relational,
//! additive, multiplicative, unary, indexing. `//` starts a line comment.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use thiserror::Error;

use super::ast::{BinOp, Expr, Method, Program, Stmt, TestCase, TestSuite, UnOp};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, col {col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("empty program: no methods defined")]
    EmptyProgram,
    #[error("duplicate method name `{0}`")]
    DuplicateMethod(String),
    #[error("duplicate test id `{0}`")]
    DuplicateTest(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    Kw(&'static str),
    Punct(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::Kw(k) => format!("keyword `{k}`"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

const KEYWORDS: &[&str] = &[
    "method", "if", "else", "while", "return", "throw", "assert", "true", "false", "null", "test",
];

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn bump(&mut self) -> Option<u8> {
        let b = *self.src.get(self.pos)?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: self.line, col: self.col, msg: msg.into() }
    }

    fn tokenize(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        loop {
            while let Some(b) = self.peek() {
                if b.is_ascii_whitespace() {
                    self.bump();
                } else if b == b'/' && self.peek2() == Some(b'/') {
                    while let Some(b) = self.peek() {
                        if b == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                } else {
                    break;
                }
            }
            let (line, col) = (self.line, self.col);
            let Some(b) = self.peek() else {
                out.push(Spanned { tok: Tok::Eof, line, col });
                return Ok(out);
            };
            let tok = match b {
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    let start = self.pos;
                    while matches!(self.peek(), Some(b'a'..=b'z' | b'A'..=b'Z' | b'0'..=b'9' | b'_'))
                    {
                        self.bump();
                    }
                    let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    match KEYWORDS.iter().find(|k| **k == word) {
                        Some(k) => Tok::Kw(k),
                        None => Tok::Ident(word.to_string()),
                    }
                }
                b'0'..=b'9' => {
                    let start = self.pos;
                    while matches!(self.peek(), Some(b'0'..=b'9')) {
                        self.bump();
                    }
                    let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    let n: i64 = digits
                        .parse()
                        .map_err(|_| self.err(format!("integer literal `{digits}` out of range")))?;
                    Tok::Int(n)
                }
                b'"' => {
                    self.bump();
                    let mut s = String::new();
                    loop {
                        match self.bump() {
                            None => return Err(self.err("unterminated string literal")),
                            Some(b'"') => break,
                            Some(b'\\') => match self.bump() {
                                Some(b'n') => s.push('\n'),
                                Some(b't') => s.push('\t'),
                                Some(b'\\') => s.push('\\'),
                                Some(b'"') => s.push('"'),
                                other => {
                                    return Err(self.err(format!(
                                        "unknown escape `\\{}`",
                                        other.map(|c| c as char).unwrap_or(' ')
                                    )))
                                }
                            },
                            Some(b'\n') => return Err(self.err("newline in string literal")),
                            Some(c) => s.push(c as char),
                        }
                    }
                    Tok::Str(s)
                }
                _ => {
                    self.bump();
                    let two = |second: u8| self.peek() == Some(second);
                    match b {
                        b'=' if two(b'=') => {
                            self.bump();
                            Tok::Punct("==")
                        }
                        b'!' if two(b'=') => {
                            self.bump();
                            Tok::Punct("!=")
                        }
                        b'<' if two(b'=') => {
                            self.bump();
                            Tok::Punct("<=")
                        }
                        b'>' if two(b'=') => {
                            self.bump();
                            Tok::Punct(">=")
                        }
                        b'&' if two(b'&') => {
                            self.bump();
                            Tok::Punct("&&")
                        }
                        b'|' if two(b'|') => {
                            self.bump();
                            Tok::Punct("||")
                        }
                        b'=' => Tok::Punct("="),
                        b'!' => Tok::Punct("!"),
                        b'<' => Tok::Punct("<"),
                        b'>' => Tok::Punct(">"),
                        b'+' => Tok::Punct("+"),
                        b'-' => Tok::Punct("-"),
                        b'*' => Tok::Punct("*"),
                        b'/' => Tok::Punct("/"),
                        b'%' => Tok::Punct("%"),
                        b'(' => Tok::Punct("("),
                        b')' => Tok::Punct(")"),
                        b'{' => Tok::Punct("{"),
                        b'}' => Tok::Punct("}"),
                        b'[' => Tok::Punct("["),
                        b']' => Tok::Punct("]"),
                        b',' => Tok::Punct(","),
                        b';' => Tok::Punct(";"),
                        other => {
                            return Err(ParseError::Syntax {
                                line,
                                col,
                                msg: format!("unexpected character `{}`", other as char),
                            })
                        }
                    }
                }
            };
            out.push(Spanned { tok, line, col });
        }
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn cur(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn advance(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, msg: impl Into<String>) -> ParseError {
        let c = self.cur();
        ParseError::Syntax { line: c.line, col: c.col, msg: msg.into() }
    }

    fn expect_punct(&mut self, p: &'static str) -> Result<(), ParseError> {
        if self.cur().tok == Tok::Punct(p) {
            self.advance();
            Ok(())
        } else {
            Err(self.err_here(format!("expected `{p}`, found {}", self.cur().tok.describe())))
        }
    }

    fn expect_kw(&mut self, k: &'static str) -> Result<(), ParseError> {
        if self.cur().tok == Tok::Kw(k) {
            self.advance();
            Ok(())
        } else {
            Err(self.err_here(format!("expected `{k}`, found {}", self.cur().tok.describe())))
        }
    }

    fn expect_ident(&mut self) -> Result<String, ParseError> {
        match &self.cur().tok {
            Tok::Ident(name) => {
                let name = name.clone();
                self.advance();
                Ok(name)
            }
            other => Err(self.err_here(format!("expected identifier, found {}", other.describe()))),
        }
    }

    fn at_punct(&self, p: &str) -> bool {
        matches!(&self.cur().tok, Tok::Punct(q) if *q == p)
    }

    fn at_kw(&self, k: &str) -> bool {
        matches!(&self.cur().tok, Tok::Kw(q) if *q == k)
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut methods = Vec::new();
        let mut seen = BTreeSet::new();
        while !matches!(self.cur().tok, Tok::Eof) {
            let m = self.method()?;
            if !seen.insert(m.name.clone()) {
                return Err(ParseError::DuplicateMethod(m.name));
            }
            methods.push(m);
        }
        if methods.is_empty() {
            return Err(ParseError::EmptyProgram);
        }
        Ok(Program { methods, source_map: BTreeMap::new() })
    }

    fn method(&mut self) -> Result<Method, ParseError> {
        let line = self.cur().line;
        self.expect_kw("method")?;
        let name = self.expect_ident()?;
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.at_punct(")") {
            loop {
                params.push(self.expect_ident()?);
                if self.at_punct(",") {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        let body = self.block()?;
        Ok(Method { name, params, body, line })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.expect_punct("{")?;
        let mut body = Vec::new();
        while !self.at_punct("}") {
            if matches!(self.cur().tok, Tok::Eof) {
                return Err(self.err_here("unexpected end of input inside block"));
            }
            body.push(self.stmt()?);
        }
        self.advance();
        Ok(body)
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let line = self.cur().line;
        if self.at_kw("if") {
            return self.if_stmt();
        }
        if self.at_kw("while") {
            self.advance();
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let body = self.block()?;
            return Ok(Stmt::While { cond, body, line });
        }
        if self.at_kw("return") {
            self.advance();
            let value = if self.at_punct(";") { None } else { Some(self.expr()?) };
            self.expect_punct(";")?;
            return Ok(Stmt::Return { value, line });
        }
        if self.at_kw("throw") {
            self.advance();
            let message = match &self.cur().tok {
                Tok::Str(s) => {
                    let s = s.clone();
                    self.advance();
                    s
                }
                other => {
                    return Err(self.err_here(format!(
                        "expected string literal after `throw`, found {}",
                        other.describe()
                    )))
                }
            };
            self.expect_punct(";")?;
            return Ok(Stmt::Throw { message, line });
        }
        if self.at_kw("assert") {
            self.advance();
            let cond = self.expr()?;
            self.expect_punct(";")?;
            return Ok(Stmt::Assert { cond, line });
        }
        // Assignment, indexed assignment, or expression statement.
        if let Tok::Ident(name) = self.cur().tok.clone() {
            match self.toks.get(self.pos + 1).map(|s| &s.tok) {
                Some(Tok::Punct("=")) => {
                    self.advance();
                    self.advance();
                    let value = self.expr()?;
                    self.expect_punct(";")?;
                    return Ok(Stmt::Assign { target: name, value, line });
                }
                Some(Tok::Punct("[")) => {
                    // Lookahead for `x[expr] = ...` vs an expression like `x[i] == y;`.
                    let save = self.pos;
                    self.advance();
                    self.advance();
                    let index = self.expr()?;
                    if self.at_punct("]") {
                        self.advance();
                        if self.at_punct("=") {
                            self.advance();
                            let value = self.expr()?;
                            self.expect_punct(";")?;
                            return Ok(Stmt::AssignIndex { target: name, index, value, line });
                        }
                    }
                    self.pos = save;
                }
                _ => {}
            }
        }
        let expr = self.expr()?;
        self.expect_punct(";")?;
        Ok(Stmt::Expr { expr, line })
    }

    fn if_stmt(&mut self) -> Result<Stmt, ParseError> {
        let line = self.cur().line;
        self.expect_kw("if")?;
        self.expect_punct("(")?;
        let cond = self.expr()?;
        self.expect_punct(")")?;
        let then_body = self.block()?;
        let else_body = if self.at_kw("else") {
            self.advance();
            if self.at_kw("if") {
                vec![self.if_stmt()?]
            } else {
                self.block()?
            }
        } else {
            Vec::new()
        };
        Ok(Stmt::If { cond, then_body, else_body, line })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and_expr()?;
        while self.at_punct("||") {
            self.advance();
            let rhs = self.and_expr()?;
            lhs = Expr::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.eq_expr()?;
        while self.at_punct("&&") {
            self.advance();
            let rhs = self.eq_expr()?;
            lhs = Expr::Binary(BinOp::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn eq_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.rel_expr()?;
        loop {
            let op = if self.at_punct("==") {
                BinOp::Eq
            } else if self.at_punct("!=") {
                BinOp::Ne
            } else {
                break;
            };
            self.advance();
            let rhs = self.rel_expr()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn rel_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.add_expr()?;
        loop {
            let op = if self.at_punct("<=") {
                BinOp::Le
            } else if self.at_punct(">=") {
                BinOp::Ge
            } else if self.at_punct("<") {
                BinOp::Lt
            } else if self.at_punct(">") {
                BinOp::Gt
            } else {
                break;
            };
            self.advance();
            let rhs = self.add_expr()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn add_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = if self.at_punct("+") {
                BinOp::Add
            } else if self.at_punct("-") {
                BinOp::Sub
            } else {
                break;
            };
            self.advance();
            let rhs = self.mul_expr()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn mul_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary_expr()?;
        loop {
            let op = if self.at_punct("*") {
                BinOp::Mul
            } else if self.at_punct("/") {
                BinOp::Div
            } else if self.at_punct("%") {
                BinOp::Rem
            } else {
                break;
            };
            self.advance();
            let rhs = self.unary_expr()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self) -> Result<Expr, ParseError> {
        if self.at_punct("-") {
            self.advance();
            let inner = self.unary_expr()?;
            // Fold a negated literal so `-1` is atomic for the transform.
            if let Expr::Int(n) = inner {
                return Ok(Expr::Int(-n));
            }
            return Ok(Expr::Unary(UnOp::Neg, Box::new(inner)));
        }
        if self.at_punct("!") {
            self.advance();
            let inner = self.unary_expr()?;
            return Ok(Expr::Unary(UnOp::Not, Box::new(inner)));
        }
        self.postfix_expr()
    }

    fn postfix_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary_expr()?;
        while self.at_punct("[") {
            self.advance();
            let idx = self.expr()?;
            self.expect_punct("]")?;
            e = Expr::Index(Box::new(e), Box::new(idx));
        }
        Ok(e)
    }

    fn primary_expr(&mut self) -> Result<Expr, ParseError> {
        match self.cur().tok.clone() {
            Tok::Int(n) => {
                self.advance();
                Ok(Expr::Int(n))
            }
            Tok::Str(s) => {
                self.advance();
                Ok(Expr::Str(s))
            }
            Tok::Kw("true") => {
                self.advance();
                Ok(Expr::Bool(true))
            }
            Tok::Kw("false") => {
                self.advance();
                Ok(Expr::Bool(false))
            }
            Tok::Kw("null") => {
                self.advance();
                Ok(Expr::Null)
            }
            Tok::Punct("(") => {
                self.advance();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Punct("[") => {
                self.advance();
                let mut items = Vec::new();
                if !self.at_punct("]") {
                    loop {
                        items.push(self.expr()?);
                        if self.at_punct(",") {
                            self.advance();
                        } else {
                            break;
                        }
                    }
                }
                self.expect_punct("]")?;
                Ok(Expr::Array(items))
            }
            Tok::Ident(name) => {
                self.advance();
                if self.at_punct("(") {
                    self.advance();
                    let mut args = Vec::new();
                    if !self.at_punct(")") {
                        loop {
                            args.push(self.expr()?);
                            if self.at_punct(",") {
                                self.advance();
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect_punct(")")?;
                    Ok(Expr::Call { callee: name, args })
                } else {
                    Ok(Expr::Var(name))
                }
            }
            other => Err(self.err_here(format!("expected expression, found {}", other.describe()))),
        }
    }

    fn suite(&mut self) -> Result<TestSuite, ParseError> {
        let mut tests = Vec::new();
        let mut seen = BTreeSet::new();
        while !matches!(self.cur().tok, Tok::Eof) {
            let line = self.cur().line;
            self.expect_kw("test")?;
            let id = self.expect_ident()?;
            if !seen.insert(id.clone()) {
                return Err(ParseError::DuplicateTest(id));
            }
            let body = self.block()?;
            tests.push(TestCase { id, body, line });
        }
        Ok(TestSuite { tests })
    }
}

pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let toks = Lexer::new(src).tokenize()?;
    let mut p = Parser { toks, pos: 0 };
    p.program()
}

/// Parses a test suite file: a sequence of `test <id> { ... }` entries.
pub fn parse_suite(src: &str) -> Result<TestSuite, ParseError> {
    let toks = Lexer::new(src).tokenize()?;
    let mut p = Parser { toks, pos: 0 };
    p.suite()
}
