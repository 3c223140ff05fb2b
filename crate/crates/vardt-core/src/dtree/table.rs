//! Per-method feature table: one row per covering test, one candidate per
//! sliced equivalence class plus the facet columns its values expose.
//!
//! Primitive values become columns directly: numeric for integers, boolean
//! for booleans. Strings, arrays, and null never appear as raw columns;
//! they surface through facets instead: `length(v)`, `isnull(v)`,
//! `typeof(v)`, and `v[i]` for array elements. A class observed with more
//! than one value type falls back to a nominal column of printed forms.
//! Facets only materialize where a run actually recorded the projection, so
//! a class never observed at all (say, a definition that always crashed
//! mid-statement) stays a candidate without any column.

use std::collections::{BTreeMap, BTreeSet};

use crate::lang::{is_temp_name, DependencyGraph, EquivalenceClasses, Program};
use crate::runtime::{ElemValue, ObsValue, TestTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Numeric,
    Boolean,
    Nominal,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureValue {
    Num(f64),
    Bool(bool),
    Nom(String),
}

#[derive(Debug, Clone)]
pub struct CandidateVar {
    /// Display name: the variable itself, or a facet like `length(str)`.
    pub name: String,
    pub method: String,
    /// All lines of the underlying equivalence class, sliced or not.
    pub lines: BTreeSet<u32>,
    /// Dependence-graph occurrences backing the candidate; facets have none.
    pub members: Vec<(String, u32)>,
    /// Program variables the candidate's value is computed from.
    pub source_vars: BTreeSet<String>,
    /// True for temporaries and facets: views of other values that step
    /// aside once every source variable has been consumed by the model.
    pub derived: bool,
    pub kind: Option<ColumnKind>,
    /// Feature value per test id; an absent test means unobserved there.
    pub values: BTreeMap<String, FeatureValue>,
}

#[derive(Debug)]
pub struct FeatureTable {
    pub method: String,
    pub tests: Vec<String>,
    /// Aligned with `tests`; true marks a failing test.
    pub labels: Vec<bool>,
    pub candidates: Vec<CandidateVar>,
}

impl FeatureTable {
    /// Column values for the given rows, missing entries preserved.
    pub fn node_column(&self, candidate: usize, rows: &[usize]) -> Vec<Option<FeatureValue>> {
        let c = &self.candidates[candidate];
        rows.iter()
            .map(|&r| c.values.get(&self.tests[r]).cloned())
            .collect()
    }

    pub fn node_labels(&self, rows: &[usize]) -> Vec<bool> {
        rows.iter().map(|&r| self.labels[r]).collect()
    }

    pub fn candidate_named(&self, name: &str) -> Option<&CandidateVar> {
        self.candidates.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum ProjKey {
    Num,
    Bool,
    Null,
    Type,
    Size,
    Elem(usize),
    Nom,
}

fn proj_key(value: &ObsValue) -> ProjKey {
    match value {
        ObsValue::Numeric(_) => ProjKey::Num,
        ObsValue::Boolean(_) => ProjKey::Bool,
        ObsValue::NullCheck(_) => ProjKey::Null,
        ObsValue::TypeTag(_) => ProjKey::Type,
        ObsValue::Size(_) => ProjKey::Size,
        ObsValue::Element(i, _) => ProjKey::Elem(*i),
        ObsValue::Nominal(_) => ProjKey::Nom,
    }
}

type PerTest = BTreeMap<String, BTreeMap<ProjKey, (u64, ObsValue)>>;

fn collect_column<F>(per_test: &PerTest, key: ProjKey, mut convert: F) -> BTreeMap<String, FeatureValue>
where
    F: FnMut(&ObsValue) -> Option<FeatureValue>,
{
    let mut out = BTreeMap::new();
    for (test, kinds) in per_test {
        if let Some((_, value)) = kinds.get(&key) {
            if let Some(fv) = convert(value) {
                out.insert(test.clone(), fv);
            }
        }
    }
    out
}

pub fn build_feature_table(
    program: &Program,
    classes: &EquivalenceClasses,
    candidate_occs: &BTreeSet<(String, u32)>,
    traces: &[TestTrace],
) -> FeatureTable {
    let method = classes.method.clone();
    let covering: Vec<&TestTrace> = traces.iter().filter(|t| t.covers(&method)).collect();
    let tests: Vec<String> = covering.iter().map(|t| t.test_id.clone()).collect();
    let labels: Vec<bool> = covering.iter().map(|t| t.failed()).collect();

    let mut candidates: Vec<CandidateVar> = Vec::new();
    for class in &classes.classes {
        let in_candidates = class
            .lines
            .iter()
            .any(|&l| candidate_occs.contains(&(class.var.clone(), l)));
        if !in_candidates {
            continue;
        }

        // latest observation per test and projection kind, over the class
        // occurrences that are actually part of the candidate set
        let mut per_test: PerTest = BTreeMap::new();
        for trace in &covering {
            for obs in &trace.observations {
                if obs.method != method
                    || obs.var != class.var
                    || !class.lines.contains(&obs.line)
                    || !candidate_occs.contains(&(obs.var.clone(), obs.line))
                {
                    continue;
                }
                let kinds = per_test.entry(trace.test_id.clone()).or_default();
                let key = proj_key(&obs.value);
                match kinds.get(&key) {
                    Some((seq, _)) if *seq > obs.seq => {}
                    _ => {
                        kinds.insert(key, (obs.seq, obs.value.clone()));
                    }
                }
            }
        }

        let mut types: BTreeSet<String> = BTreeSet::new();
        for kinds in per_test.values() {
            for (_, value) in kinds.values() {
                match value {
                    ObsValue::Numeric(_) => {
                        types.insert("int".into());
                    }
                    ObsValue::Boolean(_) => {
                        types.insert("bool".into());
                    }
                    ObsValue::TypeTag(tag) => {
                        types.insert(tag.clone());
                    }
                    _ => {}
                }
            }
        }

        let source_vars: BTreeSet<String> = if is_temp_name(&class.var) {
            program
                .source_map
                .get(&class.var)
                .map(|o| o.source_vars.iter().cloned().collect())
                .unwrap_or_default()
        } else {
            BTreeSet::from([class.var.clone()])
        };
        let members: Vec<(String, u32)> =
            class.lines.iter().map(|&l| (class.var.clone(), l)).collect();

        let only_objects = !types.is_empty()
            && types
                .iter()
                .all(|t| matches!(t.as_str(), "string" | "array" | "null"));
        let (kind, values) = if types.is_empty() || only_objects {
            (None, BTreeMap::new())
        } else if types.len() == 1 && types.contains("int") {
            let vals = collect_column(&per_test, ProjKey::Num, |v| match v {
                ObsValue::Numeric(n) => Some(FeatureValue::Num(*n as f64)),
                _ => None,
            });
            (Some(ColumnKind::Numeric), vals)
        } else if types.len() == 1 && types.contains("bool") {
            let vals = collect_column(&per_test, ProjKey::Bool, |v| match v {
                ObsValue::Boolean(b) => Some(FeatureValue::Bool(*b)),
                _ => None,
            });
            (Some(ColumnKind::Boolean), vals)
        } else {
            // several value types in one class: compare printed forms
            let vals = collect_column(&per_test, ProjKey::Nom, |v| match v {
                ObsValue::Nominal(s) => Some(FeatureValue::Nom(s.clone())),
                _ => None,
            });
            (Some(ColumnKind::Nominal), vals)
        };

        candidates.push(CandidateVar {
            name: class.var.clone(),
            method: method.clone(),
            lines: class.lines.clone(),
            members,
            source_vars: source_vars.clone(),
            derived: is_temp_name(&class.var),
            kind,
            values,
        });

        let mut push_facet =
            |name: String, kind: ColumnKind, values: BTreeMap<String, FeatureValue>| {
                if values.is_empty() {
                    return;
                }
                candidates.push(CandidateVar {
                    name,
                    method: method.clone(),
                    lines: class.lines.clone(),
                    members: Vec::new(),
                    source_vars: source_vars.clone(),
                    derived: true,
                    kind: Some(kind),
                    values,
                });
            };

        let sizes = collect_column(&per_test, ProjKey::Size, |v| match v {
            ObsValue::Size(n) => Some(FeatureValue::Num(*n as f64)),
            _ => None,
        });
        push_facet(format!("length({})", class.var), ColumnKind::Numeric, sizes);

        let nulls = collect_column(&per_test, ProjKey::Null, |v| match v {
            ObsValue::NullCheck(b) => Some(FeatureValue::Bool(*b)),
            _ => None,
        });
        push_facet(format!("isnull({})", class.var), ColumnKind::Boolean, nulls);

        let tags = collect_column(&per_test, ProjKey::Type, |v| match v {
            ObsValue::TypeTag(t) => Some(FeatureValue::Nom(t.clone())),
            _ => None,
        });
        push_facet(format!("typeof({})", class.var), ColumnKind::Nominal, tags);

        let elem_indices: BTreeSet<usize> = per_test
            .values()
            .flat_map(|kinds| kinds.keys())
            .filter_map(|k| match k {
                ProjKey::Elem(i) => Some(*i),
                _ => None,
            })
            .collect();
        for i in elem_indices {
            let raw: BTreeMap<String, &ElemValue> = per_test
                .iter()
                .filter_map(|(test, kinds)| match kinds.get(&ProjKey::Elem(i)) {
                    Some((_, ObsValue::Element(_, e))) => Some((test.clone(), e)),
                    _ => None,
                })
                .collect();
            let all_num = raw.values().all(|e| matches!(e, ElemValue::Num(_)));
            let all_bool = raw.values().all(|e| matches!(e, ElemValue::Bool(_)));
            let (kind, vals): (ColumnKind, BTreeMap<String, FeatureValue>) = if all_num {
                (
                    ColumnKind::Numeric,
                    raw.iter()
                        .map(|(t, e)| match e {
                            ElemValue::Num(n) => (t.clone(), FeatureValue::Num(*n as f64)),
                            ElemValue::Bool(_) => unreachable!(),
                        })
                        .collect(),
                )
            } else if all_bool {
                (
                    ColumnKind::Boolean,
                    raw.iter()
                        .map(|(t, e)| match e {
                            ElemValue::Bool(b) => (t.clone(), FeatureValue::Bool(*b)),
                            ElemValue::Num(_) => unreachable!(),
                        })
                        .collect(),
                )
            } else {
                (
                    ColumnKind::Nominal,
                    raw.iter()
                        .map(|(t, e)| {
                            let s = match e {
                                ElemValue::Num(n) => n.to_string(),
                                ElemValue::Bool(b) => b.to_string(),
                            };
                            (t.clone(), FeatureValue::Nom(s))
                        })
                        .collect(),
                )
            };
            push_facet(format!("{}[{}]", class.var, i), kind, vals);
        }
    }

    FeatureTable {
        method,
        tests,
        labels,
        candidates,
    }
}

/// Dependence weight per candidate: `factor` raised to the number of other
/// candidates whose occurrences depend on this one through the graph. A
/// value many later computations build on is discounted, since a wrong
/// value there would likely surface closer to the failure. Facets carry no
/// graph nodes and keep weight 1.
pub fn dep_scores(table: &FeatureTable, graph: &DependencyGraph, factor: f64) -> Vec<f64> {
    let nodes: Vec<Vec<usize>> = table
        .candidates
        .iter()
        .map(|c| {
            c.members
                .iter()
                .filter_map(|(var, line)| graph.occurrence(var, *line))
                .collect()
        })
        .collect();
    (0..table.candidates.len())
        .map(|vi| {
            if nodes[vi].is_empty() {
                return 1.0;
            }
            let mut dependents = 0;
            for (ui, u_nodes) in nodes.iter().enumerate() {
                if ui == vi || u_nodes.is_empty() {
                    continue;
                }
                let depends = u_nodes
                    .iter()
                    .any(|&un| nodes[vi].iter().any(|&vn| graph.reaches(un, vn)));
                if depends {
                    dependents += 1;
                }
            }
            factor.powi(dependents)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::mantissa_run;
    use crate::lang::{analyze, build_classes, build_dependence_graph, parse_program, parse_suite, transform_gsa};
    use crate::runtime::{run_suite, ObserveMode, RunConfig};
    use crate::slicer::slice_for_failures;

    fn col(table: &FeatureTable, name: &str) -> Vec<Option<FeatureValue>> {
        let idx = table
            .candidates
            .iter()
            .position(|c| c.name == name)
            .unwrap_or_else(|| panic!("no candidate {name}"));
        let rows: Vec<usize> = (0..table.tests.len()).collect();
        table.node_column(idx, &rows)
    }

    fn num(x: f64) -> Option<FeatureValue> {
        Some(FeatureValue::Num(x))
    }

    fn b(v: bool) -> Option<FeatureValue> {
        Some(FeatureValue::Bool(v))
    }

    fn small_table(src: &str, tests: &str) -> (FeatureTable, DependencyGraph) {
        let program = transform_gsa(&parse_program(src).unwrap());
        let suite = parse_suite(tests).unwrap();
        let config = RunConfig::default();
        let coverage = run_suite(&program, &suite, &ObserveMode::None, &config);
        let analysis = analyze(&program.methods[0]);
        let graph = build_dependence_graph(&analysis, &program);
        let classes = build_classes(&analysis);
        let slice = slice_for_failures(&graph, &coverage).expect("a test fails");
        let targets: BTreeSet<(String, String, u32)> = slice
            .occurrences
            .iter()
            .map(|(v, l)| (program.methods[0].name.clone(), v.clone(), *l))
            .collect();
        let profile = run_suite(&program, &suite, &ObserveMode::Only(targets), &config);
        (
            build_feature_table(&program, &classes, &slice.occurrences, &profile),
            graph,
        )
    }

    #[test]
    fn mantissa_candidate_roster_and_row_labels() {
        let run = mantissa_run();
        let table =
            build_feature_table(&run.program, &run.classes, &run.slice.occurrences, &run.profile);
        assert_eq!(table.tests, vec!["t1", "t2", "t3", "t4"]);
        assert_eq!(table.labels, vec![false, false, false, true]);
        let names: Vec<&str> = table.candidates.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(
            names,
            vec![
                "__tcreateNumber_1",
                "__tcreateNumber_7",
                "decPos",
                "expPos",
                "mant",
                "str",
                "length(str)",
                "isnull(str)",
                "typeof(str)",
            ]
        );
    }

    #[test]
    fn mantissa_columns_carry_the_profiled_values() {
        let run = mantissa_run();
        let table =
            build_feature_table(&run.program, &run.classes, &run.slice.occurrences, &run.profile);
        assert_eq!(col(&table, "expPos"), vec![num(-1.0), num(-1.0), num(4.0), num(4.0)]);
        assert_eq!(col(&table, "decPos"), vec![num(-1.0), num(-1.0), num(2.0), num(-1.0)]);
        assert_eq!(col(&table, "length(str)"), vec![num(2.0), num(5.0), num(8.0), num(3.0)]);
        assert_eq!(
            col(&table, "__tcreateNumber_1"),
            vec![b(false), b(false), b(true), b(false)]
        );
        // t3 takes the decimal branch and never reaches line 17
        assert_eq!(
            col(&table, "__tcreateNumber_7"),
            vec![b(false), b(false), None, b(true)]
        );
        assert_eq!(col(&table, "isnull(str)"), vec![b(false); 4]);
        assert_eq!(
            col(&table, "typeof(str)"),
            vec![Some(FeatureValue::Nom("string".into())); 4]
        );
    }

    #[test]
    fn object_valued_and_unobserved_candidates_have_no_raw_column() {
        let run = mantissa_run();
        let table =
            build_feature_table(&run.program, &run.classes, &run.slice.occurrences, &run.profile);
        // str is a string: facets only
        let str_cand = table.candidate_named("str").unwrap();
        assert_eq!(str_cand.kind, None);
        assert!(str_cand.values.is_empty());
        // the line-18 definition of mant always crashed mid-statement
        let mant = table.candidate_named("mant").unwrap();
        assert_eq!(mant.kind, None);
        assert!(mant.values.is_empty());
        assert_eq!(mant.lines, BTreeSet::from([18]));
    }

    #[test]
    fn candidate_lines_cover_the_whole_class_beyond_the_slice() {
        let run = mantissa_run();
        let table =
            build_feature_table(&run.program, &run.classes, &run.slice.occurrences, &run.profile);
        let str_cand = table.candidate_named("str").unwrap();
        assert_eq!(str_cand.lines, BTreeSet::from([2, 3, 4, 11, 13, 15, 18, 20]));
        let exp = table.candidate_named("expPos").unwrap();
        assert_eq!(exp.lines, BTreeSet::from([4, 5, 7, 8, 11, 17, 18]));
        // facet lines mirror the base class
        let len = table.candidate_named("length(str)").unwrap();
        assert_eq!(len.lines, str_cand.lines);
        assert!(len.members.is_empty());
    }

    #[test]
    fn source_variables_follow_temp_origins() {
        let run = mantissa_run();
        let table =
            build_feature_table(&run.program, &run.classes, &run.slice.occurrences, &run.profile);
        let t6 = table.candidate_named("__tcreateNumber_1").unwrap();
        assert!(t6.derived);
        assert_eq!(t6.source_vars, BTreeSet::from(["decPos".to_string()]));
        let t17 = table.candidate_named("__tcreateNumber_7").unwrap();
        assert_eq!(t17.source_vars, BTreeSet::from(["expPos".to_string()]));
        let s = table.candidate_named("str").unwrap();
        assert!(!s.derived);
        assert_eq!(s.source_vars, BTreeSet::from(["str".to_string()]));
        let len = table.candidate_named("length(str)").unwrap();
        assert!(len.derived);
        assert_eq!(len.source_vars, BTreeSet::from(["str".to_string()]));
    }

    #[test]
    fn mantissa_dependence_weights() {
        let run = mantissa_run();
        let table =
            build_feature_table(&run.program, &run.classes, &run.slice.occurrences, &run.profile);
        let deps = dep_scores(&table, &run.graph, 0.8);
        let by_name: BTreeMap<&str, f64> = table
            .candidates
            .iter()
            .zip(&deps)
            .map(|(c, &d)| (c.name.as_str(), d))
            .collect();
        let close = |name: &str, want: f64| {
            let got = by_name[name];
            assert!((got - want).abs() < 1e-12, "{name}: {got} != {want}");
        };
        // five candidates build on str, two on expPos, one on the line-17
        // condition, none on the crashing definition itself
        close("str", 0.32768);
        close("decPos", 0.512);
        close("expPos", 0.64);
        close("__tcreateNumber_1", 0.64);
        close("__tcreateNumber_7", 0.8);
        close("mant", 1.0);
        close("length(str)", 1.0);
        close("isnull(str)", 1.0);
        close("typeof(str)", 1.0);
    }

    #[test]
    fn unfiltered_traces_produce_the_same_columns() {
        let run = mantissa_run();
        let config = RunConfig::default();
        let all = run_suite(&run.program, &run.suite, &ObserveMode::All, &config);
        let from_profile =
            build_feature_table(&run.program, &run.classes, &run.slice.occurrences, &run.profile);
        let from_all =
            build_feature_table(&run.program, &run.classes, &run.slice.occurrences, &all);
        for (a, b) in from_profile.candidates.iter().zip(&from_all.candidates) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.values, b.values, "column {} differs", a.name);
        }
    }

    #[test]
    fn mixed_type_class_falls_back_to_printed_forms() {
        let src = "method f(y) {\n  x = y;\n  assert x == 0;\n  return x;\n}";
        let tests = "test t1 {\n  f(1);\n}\ntest t2 {\n  f(\"a\");\n}";
        let (table, _) = small_table(src, tests);
        let x = table.candidate_named("x").unwrap();
        assert_eq!(x.kind, Some(ColumnKind::Nominal));
        assert_eq!(
            x.values.get("t1"),
            Some(&FeatureValue::Nom("1".into()))
        );
        assert_eq!(
            x.values.get("t2"),
            Some(&FeatureValue::Nom("a".into()))
        );
        // the string run still contributes its facet observations
        let len = table.candidate_named("length(x)").unwrap();
        assert_eq!(len.values.get("t2"), Some(&FeatureValue::Num(1.0)));
        assert_eq!(len.values.get("t1"), None);
    }

    #[test]
    fn array_class_exposes_length_and_element_facets() {
        let src = "method f(a) {\n  s = a[0] + a[1];\n  assert s == 99;\n  return s;\n}";
        let tests = "test t1 {\n  f([1, 2]);\n}";
        let (table, _) = small_table(src, tests);
        let a = table.candidate_named("a").unwrap();
        assert_eq!(a.kind, None);
        assert_eq!(
            table.candidate_named("length(a)").unwrap().values.get("t1"),
            Some(&FeatureValue::Num(2.0))
        );
        assert_eq!(
            table.candidate_named("a[0]").unwrap().values.get("t1"),
            Some(&FeatureValue::Num(1.0))
        );
        assert_eq!(
            table.candidate_named("a[1]").unwrap().values.get("t1"),
            Some(&FeatureValue::Num(2.0))
        );
    }

    #[test]
    fn null_argument_shows_up_in_null_and_type_facets() {
        let src = "method f(x) {\n  assert x == 1;\n  return 0;\n}";
        let tests = "test t1 {\n  f(null);\n}";
        let (table, _) = small_table(src, tests);
        let x = table.candidate_named("x").unwrap();
        assert_eq!(x.kind, None);
        assert_eq!(
            table.candidate_named("isnull(x)").unwrap().values.get("t1"),
            Some(&FeatureValue::Bool(true))
        );
        assert_eq!(
            table.candidate_named("typeof(x)").unwrap().values.get("t1"),
            Some(&FeatureValue::Nom("null".into()))
        );
        assert!(table.candidate_named("length(x)").is_none());
    }

    #[test]
    fn rows_are_limited_to_tests_covering_the_method() {
        let src = "method f(n) {\n  assert n > 0;\n  return n;\n}\nmethod g() {\n  return 1;\n}";
        let program = transform_gsa(&parse_program(src).unwrap());
        let suite = parse_suite("test t1 {\n  f(0);\n}\ntest t2 {\n  g();\n}").unwrap();
        let config = RunConfig::default();
        let coverage = run_suite(&program, &suite, &ObserveMode::None, &config);
        let analysis = analyze(program.method("f").unwrap());
        let graph = build_dependence_graph(&analysis, &program);
        let classes = build_classes(&analysis);
        let slice = slice_for_failures(&graph, &coverage).unwrap();
        let table = build_feature_table(&program, &classes, &slice.occurrences, &coverage);
        assert_eq!(table.tests, vec!["t1"]);
        assert_eq!(table.labels, vec![true]);
    }
}
