//! Shared test fixture: a string-to-mantissa conversion method with a
//! missing bounds check. Three passing tests and one that crashes inside
//! `substring` at line 18. Several test modules drive the whole analysis
//! front end over it, so the plumbing lives here once.

use std::collections::BTreeSet;

use crate::lang::{
    analyze, build_classes, build_dependence_graph, parse_program, parse_suite, transform_gsa,
    DependencyGraph, EquivalenceClasses, Program, TestSuite,
};
use crate::runtime::{run_suite, ObserveMode, RunConfig, TestTrace};
use crate::slicer::{slice_for_failures, Slice};

pub const MANTISSA: &str = "\
// converts a numeric string to its mantissa form
method createNumber(str) {
    decPos = indexOf(str, \".\");
    expPos = indexOf(str, \"e\") + indexOf(str, \"E\") + 1;
    hasExp = expPos > 0;
    if (decPos > -1) {
        if (expPos > -1) {
            if (expPos < decPos) {
                throw \"not a valid number\";
            }
            dec = substring(str, decPos + 1, expPos);
        } else {
            dec = substring(str, decPos + 1, length(str));
        }
        mant = substring(str, 0, decPos);
    } else {
        if (expPos > -1) {
            mant = substring(str, 0, expPos);
        } else {
            mant = str;
        }
    }
    return mant;
}
";

pub const MANTISSA_TESTS: &str = "\
test t1 {
    assert createNumber(\"1l\") == \"1l\";
}
test t2 {
    assert createNumber(\"1111 \") == \"1111 \";
}
test t3 {
    assert createNumber(\"-1.1E200\") == \"-1\";
}
test t4 {
    assert createNumber(\"1eE\") == \"invalid\";
}
";

pub struct MantissaRun {
    pub program: Program,
    pub suite: TestSuite,
    pub graph: DependencyGraph,
    pub classes: EquivalenceClasses,
    pub slice: Slice,
    pub profile: Vec<TestTrace>,
}

/// Runs the analysis front end over the mantissa method: coverage run,
/// dependence graph, equivalence classes, failure slice, and a profiling
/// run restricted to the slice.
pub fn mantissa_run() -> MantissaRun {
    let program = transform_gsa(&parse_program(MANTISSA).unwrap());
    let suite = parse_suite(MANTISSA_TESTS).unwrap();
    let config = RunConfig::default();
    let coverage = run_suite(&program, &suite, &ObserveMode::None, &config);
    let analysis = analyze(program.method("createNumber").unwrap());
    let graph = build_dependence_graph(&analysis, &program);
    let classes = build_classes(&analysis);
    let slice = slice_for_failures(&graph, &coverage).expect("one test fails in the method");
    let targets: BTreeSet<(String, String, u32)> = slice
        .occurrences
        .iter()
        .map(|(var, line)| ("createNumber".to_string(), var.clone(), *line))
        .collect();
    let profile = run_suite(&program, &suite, &ObserveMode::Only(targets), &config);
    MantissaRun {
        program,
        suite,
        graph,
        classes,
        slice,
        profile,
    }
}
