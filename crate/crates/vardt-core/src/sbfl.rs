//! Method-level suspiciousness from coverage spectra.
//!
//! A test covers a method when any of its lines executed; the matrix also
//! keeps per-line spectra for finer-grained baselines. Ochiai stays within
//! [0,1] by construction; DStar can exceed 1 or divide by zero, so its
//! scores get a sentinel for the zero-denominator case and are scaled down
//! by the maximum when that maximum exceeds 1. Downstream weighting squares
//! the method score, which only damps when the score is at most 1.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::lang::{Method, Program, Stmt};
use crate::runtime::TestTrace;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Spectrum {
    pub ef: u32,
    pub ep: u32,
    pub nf: u32,
    pub np: u32,
}

impl Spectrum {
    fn count(&mut self, covers: bool, failed: bool) {
        match (covers, failed) {
            (true, true) => self.ef += 1,
            (true, false) => self.ep += 1,
            (false, true) => self.nf += 1,
            (false, false) => self.np += 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CoverageMatrix {
    pub spectra: BTreeMap<String, Spectrum>,
    /// Per-line spectra keyed by (method, line), covering every statement
    /// line of the program whether executed or not.
    pub line_spectra: BTreeMap<(String, u32), Spectrum>,
}

#[derive(Debug, Error)]
#[error("nothing to localize: no test fails")]
pub struct NothingToLocalize;

fn statement_lines(method: &Method) -> BTreeSet<u32> {
    fn walk(stmts: &[Stmt], out: &mut BTreeSet<u32>) {
        for s in stmts {
            out.insert(s.line());
            match s {
                Stmt::If {
                    then_body,
                    else_body,
                    ..
                } => {
                    walk(then_body, out);
                    walk(else_body, out);
                }
                Stmt::While { body, .. } => walk(body, out),
                _ => {}
            }
        }
    }
    let mut out = BTreeSet::from([method.line]);
    walk(&method.body, &mut out);
    out
}

pub fn coverage_matrix(
    program: &Program,
    traces: &[TestTrace],
) -> Result<CoverageMatrix, NothingToLocalize> {
    if !traces.iter().any(|t| t.failed()) {
        return Err(NothingToLocalize);
    }
    let mut spectra: BTreeMap<String, Spectrum> = program
        .methods
        .iter()
        .map(|m| (m.name.clone(), Spectrum::default()))
        .collect();
    let mut line_spectra: BTreeMap<(String, u32), Spectrum> = program
        .methods
        .iter()
        .flat_map(|m| {
            statement_lines(m)
                .into_iter()
                .map(|l| ((m.name.clone(), l), Spectrum::default()))
        })
        .collect();
    for trace in traces {
        for (name, s) in spectra.iter_mut() {
            s.count(trace.covers(name), trace.failed());
        }
        for ((method, line), s) in line_spectra.iter_mut() {
            let covers = trace
                .per_method_lines
                .get(method)
                .is_some_and(|lines| lines.contains(line));
            s.count(covers, trace.failed());
        }
    }
    Ok(CoverageMatrix {
        spectra,
        line_spectra,
    })
}

pub fn ochiai(ef: u32, ep: u32, nf: u32, _np: u32) -> f64 {
    let denom = ((ef + nf) as f64 * (ef + ep) as f64).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        ef as f64 / denom
    }
}

/// Raw DStar. A zero denominator with failing coverage yields infinity;
/// `rank_methods` replaces it with the largest finite score in context.
pub fn dstar(ef: u32, ep: u32, nf: u32, _np: u32, star: u32) -> f64 {
    let denom = (ep + nf) as f64;
    let numer = (ef as f64).powi(star as i32);
    if denom == 0.0 {
        if ef > 0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        numer / denom
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SbflFormula {
    Ochiai,
    DStar,
}

impl SbflFormula {
    pub fn name(&self) -> &'static str {
        match self {
            SbflFormula::Ochiai => "ochiai",
            SbflFormula::DStar => "dstar",
        }
    }
}

impl std::str::FromStr for SbflFormula {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ochiai" => Ok(SbflFormula::Ochiai),
            "dstar" => Ok(SbflFormula::DStar),
            other => Err(format!("unknown sbfl formula {other} (ochiai|dstar)")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RankedMethod {
    pub method: String,
    pub score: f64,
}

/// All methods sorted by suspiciousness, ties broken by name. Emitted
/// scores always land in [0,1].
pub fn rank_methods(matrix: &CoverageMatrix, formula: SbflFormula) -> Vec<RankedMethod> {
    let mut raw: Vec<(String, f64)> = matrix
        .spectra
        .iter()
        .map(|(name, s)| {
            let score = match formula {
                SbflFormula::Ochiai => ochiai(s.ef, s.ep, s.nf, s.np),
                SbflFormula::DStar => dstar(s.ef, s.ep, s.nf, s.np, 2),
            };
            (name.clone(), score)
        })
        .collect();
    let max_finite = raw
        .iter()
        .map(|(_, s)| *s)
        .filter(|s| s.is_finite())
        .fold(0.0f64, f64::max);
    let sentinel = if max_finite > 0.0 { max_finite } else { 1.0 };
    for (_, score) in raw.iter_mut() {
        if score.is_infinite() {
            *score = sentinel;
        }
    }
    let max = raw.iter().map(|(_, s)| *s).fold(0.0f64, f64::max);
    if max > 1.0 {
        for (_, score) in raw.iter_mut() {
            *score /= max;
        }
    }
    raw.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    raw.into_iter()
        .map(|(method, score)| RankedMethod { method, score })
        .collect()
}

pub fn render_method_ranking(ranking: &[RankedMethod]) -> String {
    let mut out = String::new();
    for (i, r) in ranking.iter().enumerate() {
        out.push_str(&format!("{} {} {:.6}\n", i + 1, r.method, r.score));
    }
    out
}
