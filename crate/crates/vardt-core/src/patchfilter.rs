//! Rank-aware patch filtering. A candidate patch that touches none of the
//! top-ranked fault variables is unlikely to be a real repair, so it gets
//! filtered out before validation. Patches arrive in a small diff format:
//!
//! ```text
//! PATCH <id> LABEL <correct|incorrect>
//! METHOD <name>
//! - <line#> <original statement>
//! + <replacement statement>
//! ```
//!
//! A patch may carry several METHOD blocks (hunks); removals cite line
//! numbers of the original program, insertions are bare text.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::lang::is_temp_name;
use crate::ranker::RankedVar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PatchLabel {
    Correct,
    Incorrect,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hunk {
    pub method: String,
    pub removed: Vec<(u32, String)>,
    pub inserted: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchDiff {
    pub id: String,
    pub label: PatchLabel,
    pub hunks: Vec<Hunk>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatchError {
    #[error("patch line {0}: {1}")]
    Malformed(usize, String),
    #[error("no patches in input")]
    Empty,
    #[error("cannot filter against an empty variable list")]
    NoVariables,
}

pub fn parse_patches(text: &str) -> Result<Vec<PatchDiff>, PatchError> {
    let mut patches: Vec<PatchDiff> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        let lineno = idx + 1;
        let err = |msg: &str| PatchError::Malformed(lineno, msg.to_string());
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("PATCH ") {
            let (id, label) = rest
                .split_once(" LABEL ")
                .ok_or_else(|| err("expected `PATCH <id> LABEL <correct|incorrect>`"))?;
            let label = match label.trim() {
                "correct" => PatchLabel::Correct,
                "incorrect" => PatchLabel::Incorrect,
                other => return Err(err(&format!("unknown label `{other}`"))),
            };
            patches.push(PatchDiff {
                id: id.trim().to_string(),
                label,
                hunks: Vec::new(),
            });
            continue;
        }
        let patch = patches
            .last_mut()
            .ok_or_else(|| err("content before the first PATCH header"))?;
        if let Some(name) = line.strip_prefix("METHOD ") {
            patch.hunks.push(Hunk {
                method: name.trim().to_string(),
                removed: Vec::new(),
                inserted: Vec::new(),
            });
            continue;
        }
        let hunk = patch
            .hunks
            .last_mut()
            .ok_or_else(|| err("diff line before any METHOD header"))?;
        if let Some(rest) = line.strip_prefix("- ") {
            let (num, stmt) = rest
                .trim_start()
                .split_once(' ')
                .ok_or_else(|| err("removal needs `- <line#> <statement>`"))?;
            let num: u32 = num
                .parse()
                .map_err(|_| err(&format!("bad line number `{num}`")))?;
            hunk.removed.push((num, stmt.trim().to_string()));
        } else if let Some(rest) = line.strip_prefix("+ ") {
            hunk.inserted.push(rest.trim().to_string());
        } else {
            return Err(err(&format!("unrecognized line `{line}`")));
        }
    }
    if patches.is_empty() {
        return Err(PatchError::Empty);
    }
    Ok(patches)
}

const KEYWORDS: [&str; 11] = [
    "method", "if", "else", "while", "return", "throw", "assert", "true", "false", "null", "test",
];
const BUILTINS: [&str; 4] = ["length", "charAt", "indexOf", "substring"];

/// Identifier tokens in a diff line, with keywords and builtin names dropped.
fn identifiers(text: &str, into: &mut BTreeSet<String>) {
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    word.push(c);
                    chars.next();
                } else {
                    break;
                }
            }
            if !KEYWORDS.contains(&word.as_str()) && !BUILTINS.contains(&word.as_str()) {
                into.insert(word);
            }
        } else {
            chars.next();
        }
    }
}

/// `length(v)`, `isnull(v)`, `typeof(v)`, and `v[i]` all track the program
/// variable `v`; plain names track themselves.
fn base_name(name: &str) -> &str {
    if let Some(open) = name.find('(') {
        if let Some(close) = name.rfind(')') {
            if close > open {
                return &name[open + 1..close];
            }
        }
    }
    if let Some(bracket) = name.find('[') {
        return &name[..bracket];
    }
    name
}

/// Does the patch touch this ranked variable? Program variables match when a
/// hunk for their method mentions the name; synthetic temporaries match when
/// a removal cites one of the lines their class covers.
pub fn patch_involves(patch: &PatchDiff, var: &RankedVar) -> bool {
    for hunk in &patch.hunks {
        if hunk.method != var.method {
            continue;
        }
        if is_temp_name(&var.name) {
            if hunk.removed.iter().any(|(l, _)| var.lines.contains(l)) {
                return true;
            }
            continue;
        }
        let mut ids = BTreeSet::new();
        for (_, text) in &hunk.removed {
            identifiers(text, &mut ids);
        }
        for text in &hunk.inserted {
            identifiers(text, &mut ids);
        }
        if ids.contains(base_name(&var.name)) {
            return true;
        }
    }
    false
}

/// Ranked variables at or above the cutoff; a tie group straddling the
/// cutoff stays in only when its shared rank fits.
pub fn top_vars(ranking: &[RankedVar], n: f64) -> Vec<RankedVar> {
    ranking.iter().filter(|v| v.rank <= n).cloned().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterReport {
    /// Filtered incorrect patches: the ones we wanted gone.
    pub n_fi: usize,
    /// Filtered correct patches: collateral damage.
    pub n_fc: usize,
    /// Kept incorrect patches.
    pub n_ni: usize,
    /// Kept correct patches.
    pub n_nc: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

impl FilterReport {
    pub fn from_counts(n_fi: usize, n_fc: usize, n_ni: usize, n_nc: usize) -> Self {
        let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
        FilterReport {
            n_fi,
            n_fc,
            n_ni,
            n_nc,
            precision: ratio(n_fi, n_fi + n_fc),
            recall: ratio(n_fi, n_fi + n_ni),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FilterOutcome {
    pub kept: Vec<String>,
    pub filtered: Vec<String>,
    pub report: FilterReport,
}

/// Partition patches by whether they involve any of the given variables.
/// Patches touching none are filtered out.
pub fn filter_patches(
    patches: &[PatchDiff],
    vars: &[RankedVar],
) -> Result<FilterOutcome, PatchError> {
    if vars.is_empty() {
        return Err(PatchError::NoVariables);
    }
    let mut kept = Vec::new();
    let mut filtered = Vec::new();
    let mut counts = [0usize; 4];
    for patch in patches {
        let involved = vars.iter().any(|v| patch_involves(patch, v));
        let correct = patch.label == PatchLabel::Correct;
        match (involved, correct) {
            (false, false) => counts[0] += 1,
            (false, true) => counts[1] += 1,
            (true, false) => counts[2] += 1,
            (true, true) => counts[3] += 1,
        }
        if involved {
            kept.push(patch.id.clone());
        } else {
            filtered.push(patch.id.clone());
        }
    }
    Ok(FilterOutcome {
        kept,
        filtered,
        report: FilterReport::from_counts(counts[0], counts[1], counts[2], counts[3]),
    })
}

pub fn render_filter(outcome: &FilterOutcome) -> String {
    let mut out = String::new();
    let r = &outcome.report;
    let _ = writeln!(
        out,
        "FILTERED {} (incorrect {}, correct {})",
        r.n_fi + r.n_fc,
        r.n_fi,
        r.n_fc
    );
    let _ = writeln!(
        out,
        "KEPT {} (incorrect {}, correct {})",
        r.n_ni + r.n_nc,
        r.n_ni,
        r.n_nc
    );
    let pct = |v: Option<f64>| match v {
        Some(x) => format!("{:.1}%", x * 100.0),
        None => "undefined".into(),
    };
    let _ = writeln!(out, "PRECISION {}", pct(r.precision));
    let _ = writeln!(out, "RECALL {}", pct(r.recall));
    for id in &outcome.filtered {
        let _ = writeln!(out, "DROP {id}");
    }
    for id in &outcome.kept {
        let _ = writeln!(out, "KEEP {id}");
    }
    out
}

pub fn filter_json(outcome: &FilterOutcome) -> String {
    serde_json::to_string_pretty(outcome).expect("filter outcome serializes")
}
