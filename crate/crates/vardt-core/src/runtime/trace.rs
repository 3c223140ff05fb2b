//! Execution traces and their line-oriented text form.
//!
//! One block per test: a `TEST id PASS|FAIL` header, the executed line list
//! per method, the failure site if the test failed, and the recorded value
//! observations in emission order. The format round-trips exactly:
//! writing, reading, and writing again yields identical bytes.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::lang::OccKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestLabel {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElemValue {
    Num(i64),
    Bool(bool),
}

/// One projection of a runtime value. A single visit of an occurrence emits
/// several of these (type tag, null check, size, the value itself), with the
/// most informative projection for the value's type emitted last.
#[derive(Debug, Clone, PartialEq)]
pub enum ObsValue {
    Numeric(i64),
    Boolean(bool),
    NullCheck(bool),
    TypeTag(String),
    Size(i64),
    Element(usize, ElemValue),
    Nominal(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableObservation {
    pub method: String,
    pub var: String,
    pub line: u32,
    pub occ_kind: OccKind,
    /// Per-test counter, strictly increasing across all observations.
    pub seq: u64,
    pub value: ObsValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestTrace {
    pub test_id: String,
    pub label: TestLabel,
    pub budget_exhausted: bool,
    /// Executed lines per program method, in execution order with repeats.
    pub per_method_lines: BTreeMap<String, Vec<u32>>,
    /// Innermost frame at the point of failure. The frame name is a method
    /// name, or the test id when the test body itself failed.
    pub failure_site: Option<(String, u32)>,
    pub observations: Vec<VariableObservation>,
}

impl TestTrace {
    pub fn covers(&self, method: &str) -> bool {
        self.per_method_lines.contains_key(method)
    }

    pub fn failed(&self) -> bool {
        self.label == TestLabel::Fail
    }
}

/// Final observed value per occurrence and test for one method: the
/// observation with the greatest sequence number wins, so a loop that
/// writes a variable three times reports the last write.
pub fn last_value_table(
    traces: &[TestTrace],
    method: &str,
) -> BTreeMap<(String, u32), BTreeMap<String, ObsValue>> {
    let mut table: BTreeMap<(String, u32), BTreeMap<String, ObsValue>> = BTreeMap::new();
    for trace in traces {
        for obs in &trace.observations {
            if obs.method == method {
                table
                    .entry((obs.var.clone(), obs.line))
                    .or_default()
                    .insert(trace.test_id.clone(), obs.value.clone());
            }
        }
    }
    table
}

fn occ_kind_token(kind: OccKind) -> &'static str {
    match kind {
        OccKind::ProgramVariable => "prog",
        OccKind::TempCondition => "cond",
        OccKind::TempReturnArg => "retarg",
        OccKind::PredicateFeature => "feature",
    }
}

fn occ_kind_from(token: &str) -> Option<OccKind> {
    match token {
        "prog" => Some(OccKind::ProgramVariable),
        "cond" => Some(OccKind::TempCondition),
        "retarg" => Some(OccKind::TempReturnArg),
        "feature" => Some(OccKind::PredicateFeature),
        _ => None,
    }
}

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Inverse of `escape`. The quoted string must span the whole input.
pub fn unescape(s: &str) -> Option<String> {
    let inner = s.strip_prefix('"')?.strip_suffix('"')?;
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '"' {
            return None;
        }
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next()? {
            '"' => out.push('"'),
            '\\' => out.push('\\'),
            'n' => out.push('\n'),
            't' => out.push('\t'),
            'r' => out.push('\r'),
            _ => return None,
        }
    }
    Some(out)
}

fn value_tokens(value: &ObsValue) -> String {
    match value {
        ObsValue::Numeric(n) => format!("num {n}"),
        ObsValue::Boolean(b) => format!("bool {b}"),
        ObsValue::NullCheck(b) => format!("nullcheck {b}"),
        ObsValue::TypeTag(t) => format!("typetag {t}"),
        ObsValue::Size(n) => format!("size {n}"),
        ObsValue::Element(i, ElemValue::Num(n)) => format!("elem {i} num {n}"),
        ObsValue::Element(i, ElemValue::Bool(b)) => format!("elem {i} bool {b}"),
        ObsValue::Nominal(s) => format!("nominal {}", escape(s)),
    }
}

pub fn write_traces(traces: &[TestTrace]) -> String {
    let mut out = String::new();
    for trace in traces {
        let label = match trace.label {
            TestLabel::Pass => "PASS",
            TestLabel::Fail => "FAIL",
        };
        out.push_str(&format!("TEST {} {}\n", trace.test_id, label));
        if trace.budget_exhausted {
            out.push_str("BUDGET exhausted\n");
        }
        for (method, lines) in &trace.per_method_lines {
            let joined: Vec<String> = lines.iter().map(|l| l.to_string()).collect();
            out.push_str(&format!("LINES {} {}\n", method, joined.join(",")));
        }
        if let Some((site, line)) = &trace.failure_site {
            out.push_str(&format!("FAILSITE {} {}\n", site, line));
        }
        for obs in &trace.observations {
            out.push_str(&format!(
                "OBS {} {}@{} {} {} {}\n",
                obs.method,
                obs.var,
                obs.line,
                occ_kind_token(obs.occ_kind),
                obs.seq,
                value_tokens(&obs.value)
            ));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Error)]
#[error("trace line {line}: {msg}")]
pub struct TraceParseError {
    pub line: usize,
    pub msg: String,
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, TraceParseError> {
    Err(TraceParseError {
        line,
        msg: msg.into(),
    })
}

fn parse_obs_value(tokens: &[&str], rest: &str, n: usize) -> Result<ObsValue, TraceParseError> {
    let kind = tokens[0];
    let arg = |i: usize| -> Result<&str, TraceParseError> {
        tokens
            .get(i)
            .copied()
            .ok_or(TraceParseError {
                line: n,
                msg: format!("missing argument for {kind}"),
            })
    };
    match kind {
        "num" => Ok(ObsValue::Numeric(
            arg(1)?.parse().map_err(|_| TraceParseError {
                line: n,
                msg: "bad numeric value".into(),
            })?,
        )),
        "bool" => match arg(1)? {
            "true" => Ok(ObsValue::Boolean(true)),
            "false" => Ok(ObsValue::Boolean(false)),
            other => err(n, format!("bad boolean value {other}")),
        },
        "nullcheck" => match arg(1)? {
            "true" => Ok(ObsValue::NullCheck(true)),
            "false" => Ok(ObsValue::NullCheck(false)),
            other => err(n, format!("bad nullcheck value {other}")),
        },
        "typetag" => Ok(ObsValue::TypeTag(arg(1)?.to_string())),
        "size" => Ok(ObsValue::Size(arg(1)?.parse().map_err(|_| {
            TraceParseError {
                line: n,
                msg: "bad size value".into(),
            }
        })?)),
        "elem" => {
            let idx: usize = arg(1)?.parse().map_err(|_| TraceParseError {
                line: n,
                msg: "bad element index".into(),
            })?;
            match arg(2)? {
                "num" => Ok(ObsValue::Element(
                    idx,
                    ElemValue::Num(arg(3)?.parse().map_err(|_| TraceParseError {
                        line: n,
                        msg: "bad element value".into(),
                    })?),
                )),
                "bool" => match arg(3)? {
                    "true" => Ok(ObsValue::Element(idx, ElemValue::Bool(true))),
                    "false" => Ok(ObsValue::Element(idx, ElemValue::Bool(false))),
                    other => err(n, format!("bad element value {other}")),
                },
                other => err(n, format!("bad element kind {other}")),
            }
        }
        "nominal" => {
            // the quoted payload may contain spaces, so take the raw rest
            let quoted = rest.trim_start();
            match unescape(quoted) {
                Some(s) => Ok(ObsValue::Nominal(s)),
                None => err(n, "bad nominal string"),
            }
        }
        other => err(n, format!("unknown observation kind {other}")),
    }
}

pub fn read_traces(text: &str) -> Result<Vec<TestTrace>, TraceParseError> {
    let mut traces: Vec<TestTrace> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let (tag, rest) = line.split_once(' ').unwrap_or((line, ""));
        match tag {
            "TEST" => {
                let mut parts = rest.split_whitespace();
                let id = match parts.next() {
                    Some(id) => id.to_string(),
                    None => return err(n, "missing test id"),
                };
                let label = match parts.next() {
                    Some("PASS") => TestLabel::Pass,
                    Some("FAIL") => TestLabel::Fail,
                    other => return err(n, format!("bad label {other:?}")),
                };
                traces.push(TestTrace {
                    test_id: id,
                    label,
                    budget_exhausted: false,
                    per_method_lines: BTreeMap::new(),
                    failure_site: None,
                    observations: Vec::new(),
                });
            }
            "BUDGET" => match traces.last_mut() {
                Some(t) => t.budget_exhausted = true,
                None => return err(n, "BUDGET before TEST"),
            },
            "LINES" => {
                let trace = match traces.last_mut() {
                    Some(t) => t,
                    None => return err(n, "LINES before TEST"),
                };
                let (method, list) = match rest.split_once(' ') {
                    Some(p) => p,
                    None => return err(n, "malformed LINES record"),
                };
                let mut lines = Vec::new();
                for tok in list.split(',') {
                    match tok.parse::<u32>() {
                        Ok(l) => lines.push(l),
                        Err(_) => return err(n, format!("bad line number {tok}")),
                    }
                }
                trace.per_method_lines.insert(method.to_string(), lines);
            }
            "FAILSITE" => {
                let trace = match traces.last_mut() {
                    Some(t) => t,
                    None => return err(n, "FAILSITE before TEST"),
                };
                let (site, line_tok) = match rest.split_once(' ') {
                    Some(p) => p,
                    None => return err(n, "malformed FAILSITE record"),
                };
                match line_tok.parse::<u32>() {
                    Ok(l) => trace.failure_site = Some((site.to_string(), l)),
                    Err(_) => return err(n, format!("bad line number {line_tok}")),
                }
            }
            "OBS" => {
                let trace = match traces.last_mut() {
                    Some(t) => t,
                    None => return err(n, "OBS before TEST"),
                };
                let tokens: Vec<&str> = rest.split_whitespace().collect();
                if tokens.len() < 5 {
                    return err(n, "malformed OBS record");
                }
                let method = tokens[0].to_string();
                let (var, occ_line) = match tokens[1].rsplit_once('@') {
                    Some((v, l)) => match l.parse::<u32>() {
                        Ok(l) => (v.to_string(), l),
                        Err(_) => return err(n, format!("bad occurrence line {l}")),
                    },
                    None => return err(n, "malformed occurrence"),
                };
                let occ_kind = match occ_kind_from(tokens[2]) {
                    Some(k) => k,
                    None => return err(n, format!("bad occurrence kind {}", tokens[2])),
                };
                let seq: u64 = match tokens[3].parse() {
                    Ok(s) => s,
                    Err(_) => return err(n, "bad sequence number"),
                };
                // locate the value portion in the raw rest for quoted payloads
                let value_start = {
                    let mut idx = 0;
                    let mut seen = 0;
                    let bytes = rest.as_bytes();
                    while seen < 4 && idx < bytes.len() {
                        while idx < bytes.len() && bytes[idx] != b' ' {
                            idx += 1;
                        }
                        while idx < bytes.len() && bytes[idx] == b' ' {
                            idx += 1;
                        }
                        seen += 1;
                    }
                    idx
                };
                let value_rest = &rest[value_start..];
                let value_after_kind = value_rest
                    .split_once(' ')
                    .map(|(_, r)| r)
                    .unwrap_or("");
                let value = parse_obs_value(&tokens[4..], value_after_kind, n)?;
                trace.observations.push(VariableObservation {
                    method,
                    var,
                    line: occ_line,
                    occ_kind,
                    seq,
                    value,
                });
            }
            other => return err(n, format!("unknown record {other}")),
        }
    }
    Ok(traces)
}
