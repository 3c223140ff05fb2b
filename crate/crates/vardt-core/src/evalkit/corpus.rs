//! Seeded-bug corpus handling. Each bug lives in its own directory:
//!
//! ```text
//! <bug-id>/
//!   buggy.mini     program under localization
//!   fixed.mini     reference repair
//!   tests.mini     shared test suite
//!   truth.txt      fault-relevant variables, one per line
//!   notes.txt      prose description of the defect
//!   patches.txt    optional candidate-patch set for filtering
//! ```
//!
//! `truth.txt` lines read `VAR <name> LINES <l1,l2,...> RULE <1-4>`, citing
//! lines of the buggy program.

use std::fs;
use std::path::Path;

use crate::evalkit::metrics::{GroundTruth, TruthVar};
use crate::lang::{parse_program, parse_suite, transform_gsa};
use crate::runtime::{run_suite, ObserveMode, RunConfig};

#[derive(Debug, Clone)]
pub struct CorpusBug {
    pub id: String,
    pub buggy: String,
    pub fixed: String,
    pub tests: String,
    pub truth: GroundTruth,
    pub notes: String,
    pub patches: Option<String>,
}

pub fn parse_truth(bug: &str, text: &str) -> Result<GroundTruth, String> {
    let mut vars = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |what: &str| format!("{bug} truth line {}: {what}", idx + 1);
        let rest = line
            .strip_prefix("VAR ")
            .ok_or_else(|| err("expected `VAR <name> LINES <l,..> RULE <n>`"))?;
        let (name, rest) = rest
            .split_once(" LINES ")
            .ok_or_else(|| err("missing LINES"))?;
        let (lines_part, rule_part) = rest
            .split_once(" RULE ")
            .ok_or_else(|| err("missing RULE"))?;
        let lines = lines_part
            .split(',')
            .map(|l| l.trim().parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|e| err(&format!("bad line number: {e}")))?;
        let rule: u8 = rule_part
            .trim()
            .parse()
            .map_err(|e| err(&format!("bad rule: {e}")))?;
        if !(1..=4).contains(&rule) {
            return Err(err("rule must be 1..=4"));
        }
        let name = name.trim();
        if name.is_empty() {
            return Err(err("empty variable name"));
        }
        vars.push(TruthVar {
            name: name.to_string(),
            lines,
            rule,
        });
    }
    if vars.is_empty() {
        return Err(format!("{bug}: truth file lists no variables"));
    }
    Ok(GroundTruth {
        bug: bug.to_string(),
        vars,
    })
}

pub fn render_truth(truth: &GroundTruth) -> String {
    let mut out = String::new();
    for v in &truth.vars {
        let lines: Vec<String> = v.lines.iter().map(u32::to_string).collect();
        out.push_str(&format!(
            "VAR {} LINES {} RULE {}\n",
            v.name,
            lines.join(","),
            v.rule
        ));
    }
    out
}

/// Check the bug is well-formed: the buggy program fails at least one test
/// and the fixed program passes all of them.
pub fn validate_bug(bug: &CorpusBug) -> Result<(), String> {
    let config = RunConfig::default();
    let suite = parse_suite(&bug.tests).map_err(|e| format!("{} tests: {e}", bug.id))?;
    let run = |source: &str, label: &str| {
        let program = parse_program(source).map_err(|e| format!("{} {label}: {e}", bug.id))?;
        let program = transform_gsa(&program);
        Ok::<_, String>(run_suite(&program, &suite, &ObserveMode::None, &config))
    };
    let buggy = run(&bug.buggy, "buggy")?;
    if !buggy.iter().any(|t| t.failed()) {
        return Err(format!("{}: buggy program passes every test", bug.id));
    }
    let fixed = run(&bug.fixed, "fixed")?;
    if let Some(t) = fixed.iter().find(|t| t.failed()) {
        return Err(format!(
            "{}: fixed program still fails {} at {:?}",
            bug.id, t.test_id, t.failure_site
        ));
    }
    Ok(())
}

pub fn write_corpus(dir: &Path, bugs: &[CorpusBug]) -> std::io::Result<()> {
    for bug in bugs {
        let d = dir.join(&bug.id);
        fs::create_dir_all(&d)?;
        fs::write(d.join("buggy.mini"), &bug.buggy)?;
        fs::write(d.join("fixed.mini"), &bug.fixed)?;
        fs::write(d.join("tests.mini"), &bug.tests)?;
        fs::write(d.join("truth.txt"), render_truth(&bug.truth))?;
        fs::write(d.join("notes.txt"), &bug.notes)?;
        if let Some(p) = &bug.patches {
            fs::write(d.join("patches.txt"), p)?;
        }
    }
    Ok(())
}

pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusBug>, String> {
    let mut bugs = Vec::new();
    let entries = fs::read_dir(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let mut dirs: Vec<_> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    for d in dirs {
        let id = d
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| format!("unreadable bug directory name under {}", dir.display()))?
            .to_string();
        let read = |f: &str| {
            fs::read_to_string(d.join(f)).map_err(|e| format!("{id}/{f}: {e}"))
        };
        let truth = parse_truth(&id, &read("truth.txt")?)?;
        let patches = d.join("patches.txt");
        bugs.push(CorpusBug {
            buggy: read("buggy.mini")?,
            fixed: read("fixed.mini")?,
            tests: read("tests.mini")?,
            notes: read("notes.txt")?,
            patches: patches
                .exists()
                .then(|| fs::read_to_string(&patches))
                .transpose()
                .map_err(|e| format!("{id}/patches.txt: {e}"))?,
            id,
            truth,
        });
    }
    if bugs.is_empty() {
        return Err(format!("no bug directories under {}", dir.display()));
    }
    Ok(bugs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truth_lines_round_trip() {
        let text = "VAR expPos LINES 4,17,18 RULE 1\nVAR length(str) LINES 18 RULE 1\n";
        let truth = parse_truth("b", text).unwrap();
        assert_eq!(truth.vars.len(), 2);
        assert_eq!(truth.vars[0].name, "expPos");
        assert_eq!(truth.vars[0].lines, [4, 17, 18].into());
        assert_eq!(truth.vars[1].name, "length(str)");
        assert_eq!(render_truth(&truth), text);
    }

    #[test]
    fn truth_parser_rejects_malformed_lines() {
        assert!(parse_truth("b", "VAR x LINES RULE 1").is_err());
        assert!(parse_truth("b", "VAR x LINES 1,2 RULE 9").is_err());
        assert!(parse_truth("b", "x LINES 1 RULE 1").is_err());
        assert!(parse_truth("b", "# only a comment\n").is_err());
    }

    #[test]
    fn comments_and_blanks_are_skipped() {
        let truth = parse_truth("b", "# header\n\nVAR x LINES 3 RULE 2\n").unwrap();
        assert_eq!(truth.vars.len(), 1);
        assert_eq!(truth.vars[0].rule, 2);
    }

    #[test]
    fn corpus_round_trips_through_disk() {
        let bug = CorpusBug {
            id: "bug99-sample".into(),
            buggy: "method f(x) {\n    return x;\n}\n".into(),
            fixed: "method f(x) {\n    return x + 1;\n}\n".into(),
            tests: "test t1 {\n    assert f(1) == 2;\n}\n".into(),
            truth: parse_truth("bug99-sample", "VAR x LINES 1 RULE 1").unwrap(),
            notes: "returns the input unchanged\n".into(),
            patches: Some("PATCH p1 LABEL correct\nMETHOD f\n- 2 return x;\n+ return x + 1;\n".into()),
        };
        let dir = tempfile::tempdir().unwrap();
        write_corpus(dir.path(), std::slice::from_ref(&bug)).unwrap();
        let loaded = load_corpus(dir.path()).unwrap();
        assert_eq!(loaded.len(), 1);
        assert_eq!(loaded[0].id, bug.id);
        assert_eq!(loaded[0].buggy, bug.buggy);
        assert_eq!(loaded[0].truth, bug.truth);
        assert_eq!(loaded[0].patches, bug.patches);
        validate_bug(&loaded[0]).unwrap();
    }

    #[test]
    fn validation_flags_green_buggy_and_red_fixed() {
        let ok = "method f(x) {\n    return x + 1;\n}\n";
        let bad = "method f(x) {\n    return x;\n}\n";
        let tests = "test t1 {\n    assert f(1) == 2;\n}\n";
        let truth = parse_truth("b", "VAR x LINES 1 RULE 1").unwrap();
        let mut bug = CorpusBug {
            id: "b".into(),
            buggy: bad.into(),
            fixed: ok.into(),
            tests: tests.into(),
            truth,
            notes: String::new(),
            patches: None,
        };
        validate_bug(&bug).unwrap();
        bug.buggy = ok.into();
        assert!(validate_bug(&bug).unwrap_err().contains("passes every test"));
        bug.buggy = bad.into();
        bug.fixed = bad.into();
        assert!(validate_bug(&bug).unwrap_err().contains("still fails"));
    }
}
