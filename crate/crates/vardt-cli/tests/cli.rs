//! End-to-end checks of the vardt binary: artifact layout, exit codes,
//! environment-variable precedence, and byte-level determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

const ENV_VARS: &[&str] = &[
    "VARDT_DEP_FACTOR",
    "VARDT_TOP_K",
    "VARDT_SBFL",
    "VARDT_NO_SLICE",
    "VARDT_NO_TREE",
    "VARDT_NO_DEP",
    "VARDT_NO_METHOD_SCORE",
    "VARDT_METHOD_KNOWN",
    "VARDT_BUDGET",
    "VARDT_JOBS",
];

fn vardt() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_vardt"));
    for var in ENV_VARS {
        cmd.env_remove(var);
    }
    cmd
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("vardt binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

struct Seeded {
    _dir: TempDir,
    corpus: PathBuf,
}

impl Seeded {
    fn new() -> Self {
        let dir = TempDir::new().expect("tempdir");
        let corpus = dir.path().join("corpus");
        let out = run(vardt().arg("seed").arg(&corpus));
        assert!(out.status.success(), "seed failed: {}", stderr(&out));
        Seeded { _dir: dir, corpus }
    }

    fn bug(&self, id: &str) -> PathBuf {
        self.corpus.join(id)
    }
}

fn mantissa_args(seeded: &Seeded) -> (PathBuf, PathBuf) {
    let bug = seeded.bug("bug01-mantissa-exp-bound");
    (bug.join("buggy.mini"), bug.join("tests.mini"))
}

#[test]
fn seed_writes_the_full_corpus_layout() {
    let seeded = Seeded::new();
    let entries: Vec<_> = std::fs::read_dir(&seeded.corpus)
        .expect("corpus dir")
        .filter_map(Result::ok)
        .collect();
    assert_eq!(entries.len(), 22);
    let bug = seeded.bug("bug01-mantissa-exp-bound");
    for file in ["buggy.mini", "fixed.mini", "tests.mini", "truth.txt", "notes.txt"] {
        assert!(bug.join(file).is_file(), "missing {file}");
    }
    assert!(bug.join("patches.txt").is_file());
}

#[test]
fn localize_ranks_the_exponent_cursor_first_and_writes_artifacts() {
    let seeded = Seeded::new();
    let (program, tests) = mantissa_args(&seeded);
    let out_dir = seeded.corpus.join("artifacts");
    let out = run(vardt()
        .arg("localize")
        .arg(&program)
        .arg(&tests)
        .arg("--out")
        .arg(&out_dir));
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let first = stdout(&out).lines().next().expect("ranking line").to_string();
    assert!(first.starts_with("1 "), "first line: {first}");
    assert!(first.contains("expPos"), "first line: {first}");
    for file in [
        "ranking.txt",
        "ranking.json",
        "methods.txt",
        "slices.txt",
        "depgraph.txt",
        "trees.txt",
        "trace.txt",
        "stats.json",
    ] {
        assert!(out_dir.join(file).is_file(), "missing {file}");
    }
    let json = std::fs::read_to_string(out_dir.join("ranking.json")).expect("json");
    assert!(json.trim_start().starts_with('['));
}

#[test]
fn localize_output_is_byte_identical_across_runs() {
    let seeded = Seeded::new();
    let (program, tests) = mantissa_args(&seeded);
    let mut bytes = Vec::new();
    for pass in 0..2 {
        let out_dir = seeded.corpus.join(format!("det{pass}"));
        let out = run(vardt()
            .arg("localize")
            .arg(&program)
            .arg(&tests)
            .arg("--jobs")
            .arg("4")
            .arg("--out")
            .arg(&out_dir));
        assert!(out.status.success());
        bytes.push(std::fs::read(out_dir.join("ranking.json")).expect("json"));
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn unparsable_program_exits_one() {
    let seeded = Seeded::new();
    let (_, tests) = mantissa_args(&seeded);
    let bad = seeded.corpus.join("bad.mini");
    std::fs::write(&bad, "method broken( {").expect("write");
    let out = run(vardt().arg("localize").arg(&bad).arg(&tests));
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error:"));
}

#[test]
fn missing_program_file_exits_one() {
    let seeded = Seeded::new();
    let (_, tests) = mantissa_args(&seeded);
    let out = run(vardt()
        .arg("localize")
        .arg(seeded.corpus.join("nope.mini"))
        .arg(&tests));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn all_passing_suite_exits_two_with_a_gate_message() {
    let seeded = Seeded::new();
    let bug = seeded.bug("bug01-mantissa-exp-bound");
    let out = run(vardt()
        .arg("localize")
        .arg(bug.join("fixed.mini"))
        .arg(bug.join("tests.mini")));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("nothing to localize"));
}

#[test]
fn invalid_sbfl_name_exits_one() {
    let seeded = Seeded::new();
    let (program, tests) = mantissa_args(&seeded);
    let out = run(vardt()
        .arg("localize")
        .arg(&program)
        .arg(&tests)
        .arg("--sbfl")
        .arg("tarantula"));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn out_of_range_dep_factor_exits_one() {
    let seeded = Seeded::new();
    let (program, tests) = mantissa_args(&seeded);
    let out = run(vardt()
        .arg("localize")
        .arg(&program)
        .arg(&tests)
        .arg("--dep-factor")
        .arg("0"));
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("dependency factor"));
}

#[test]
fn environment_sets_defaults_and_flags_override_it() {
    let seeded = Seeded::new();
    let (program, tests) = mantissa_args(&seeded);
    let baseline = stdout(&run(vardt().arg("localize").arg(&program).arg(&tests)));
    let via_env = stdout(&run(vardt()
        .env("VARDT_DEP_FACTOR", "0.3")
        .arg("localize")
        .arg(&program)
        .arg(&tests)));
    assert_ne!(baseline, via_env, "env var should change the ranking");
    let flag_wins = stdout(&run(vardt()
        .env("VARDT_DEP_FACTOR", "0.3")
        .arg("localize")
        .arg(&program)
        .arg(&tests)
        .arg("--dep-factor")
        .arg("0.8")));
    assert_eq!(baseline, flag_wins, "explicit flag should beat the env var");
}

#[test]
fn eval_reports_hit_counts_and_writes_metrics() {
    let seeded = Seeded::new();
    let out_dir = seeded.corpus.join("eval");
    let out = run(vardt()
        .arg("eval")
        .arg("--corpus")
        .arg(&seeded.corpus)
        .arg("--out")
        .arg(&out_dir));
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("BUGS 22"));
    for line in ["TOP-1 ", "TOP-3 ", "TOP-5 ", "TOP-10 ", "MFR ", "MAR ", "REDUCTION "] {
        assert!(text.contains(line), "missing {line} in:\n{text}");
    }
    assert!(out_dir.join("metrics.txt").is_file());
    assert!(out_dir.join("metrics.json").is_file());
}

#[test]
fn filter_reports_precision_and_drops_the_variable_free_patch() {
    let seeded = Seeded::new();
    let bug = seeded.bug("bug01-mantissa-exp-bound");
    let out = run(vardt()
        .arg("filter")
        .arg(bug.join("buggy.mini"))
        .arg(bug.join("tests.mini"))
        .arg(bug.join("patches.txt"))
        .arg("--top-n")
        .arg("3"));
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("PRECISION "));
    assert!(text.contains("RECALL "));
    assert!(text.contains("DROP p4"), "p4 touches no variable:\n{text}");
    assert!(text.contains("KEEP p1"), "the correct patch survives:\n{text}");
}

#[test]
fn trace_slice_and_tree_print_their_stage_views() {
    let seeded = Seeded::new();
    let (program, tests) = mantissa_args(&seeded);
    let trace = stdout(&run(vardt().arg("trace").arg(&program).arg(&tests)));
    assert!(trace.contains("TEST t1"));
    assert!(trace.contains("OBS createNumber"));
    let slice = stdout(&run(vardt().arg("slice").arg(&program).arg(&tests)));
    assert!(slice.contains("createNumber:"));
    let tree = stdout(&run(vardt().arg("tree").arg(&program).arg(&tests)));
    assert!(tree.contains("TREE 1"));
    assert!(tree.contains("length(str)"));
}

#[test]
fn loading_a_seeded_corpus_round_trips() {
    // The TREE-BUILD line reports wall-clock time and is the one part of
    // the report allowed to differ between runs.
    fn stable(report: &str) -> String {
        report
            .lines()
            .filter(|l| !l.starts_with("TREE-BUILD"))
            .collect::<Vec<_>>()
            .join("\n")
    }
    let seeded = Seeded::new();
    let first = stdout(&run(vardt().arg("eval").arg("--corpus").arg(&seeded.corpus)));
    let builtin = stdout(&run(vardt().arg("eval")));
    assert_eq!(
        stable(&first),
        stable(&builtin),
        "seeded corpus should match the built-in one"
    );
}
