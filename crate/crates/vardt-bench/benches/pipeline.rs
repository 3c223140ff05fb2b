//! Throughput of the localization stages on the seeded bug corpus: parsing
//! plus the assignment-splitting transform, plain suite execution, a full
//! single-bug localization, and whole-corpus evaluation.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use vardt_core::evalkit::{evaluate_corpus, seed_corpus};
use vardt_core::lang::{parse_program, parse_suite, transform_gsa};
use vardt_core::pipeline::{localize_sources, PipelineConfig};
use vardt_core::runtime::{run_suite, ObserveMode, RunConfig};

fn mantissa_sources() -> (String, String) {
    let corpus = seed_corpus();
    let bug = corpus
        .iter()
        .find(|b| b.id.starts_with("bug01"))
        .expect("corpus carries the mantissa bug");
    (bug.buggy.clone(), bug.tests.clone())
}

fn bench_parse_and_transform(c: &mut Criterion) {
    let (program, _) = mantissa_sources();
    c.bench_function("parse_and_transform_mantissa", |b| {
        b.iter(|| {
            let parsed = parse_program(&program).expect("parses");
            transform_gsa(&parsed)
        });
    });
}

fn bench_run_suite(c: &mut Criterion) {
    let (program, tests) = mantissa_sources();
    let transformed = transform_gsa(&parse_program(&program).expect("parses"));
    let suite = parse_suite(&tests).expect("parses");
    let config = RunConfig::default();
    c.bench_function("run_suite_mantissa", |b| {
        b.iter(|| run_suite(&transformed, &suite, &ObserveMode::None, &config));
    });
    c.bench_function("run_suite_mantissa_observe_all", |b| {
        b.iter(|| run_suite(&transformed, &suite, &ObserveMode::All, &config));
    });
}

fn bench_localize(c: &mut Criterion) {
    let (program, tests) = mantissa_sources();
    let config = PipelineConfig::default();
    c.bench_function("localize_mantissa", |b| {
        b.iter(|| localize_sources(&program, &tests, &config).expect("localizes"));
    });
    let no_slice = PipelineConfig {
        slicing: false,
        ..PipelineConfig::default()
    };
    c.bench_function("localize_mantissa_no_slice", |b| {
        b.iter(|| localize_sources(&program, &tests, &no_slice).expect("localizes"));
    });
}

fn bench_evaluate_corpus(c: &mut Criterion) {
    let corpus = seed_corpus();
    let config = PipelineConfig::default();
    let mut group = c.benchmark_group("corpus");
    group.sample_size(10);
    group.bench_function("evaluate_22_bugs", |b| {
        b.iter_batched(
            || corpus.clone(),
            |bugs| evaluate_corpus(&bugs, &config),
            BatchSize::LargeInput,
        );
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_parse_and_transform,
    bench_run_suite,
    bench_localize,
    bench_evaluate_corpus
);
criterion_main!(benches);
