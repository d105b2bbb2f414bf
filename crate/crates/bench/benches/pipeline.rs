use std::time::Duration;

use criterion::{criterion_group, criterion_main, Criterion};
use railnet_bench::fixture;
use railnet_core::pipeline::{prepare_model, run_pipeline};
use railnet_core::preprocess::build_relevant_sets;
use railnet_core::solve::SolveLimits;

fn preprocessing(c: &mut Criterion) {
    let (spec, family, config) = fixture(11, 5, 3, 2);
    c.bench_function("preprocess/relevant-sets", |b| {
        b.iter(|| build_relevant_sets(&spec, &family, &config).unwrap())
    });
}

fn model_build(c: &mut Criterion) {
    let (spec, family, config) = fixture(11, 5, 3, 2);
    c.bench_function("model/build", |b| {
        b.iter(|| prepare_model(&spec, &family, &config).unwrap())
    });
}

fn end_to_end(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10).measurement_time(Duration::from_secs(20));
    for (label, seed, nodes, trains, scenarios) in [
        ("single-train", 3, 4, 1, 1),
        ("two-scenarios", 7, 4, 2, 2),
        ("three-trains", 11, 5, 3, 2),
    ] {
        let (spec, family, config) = fixture(seed, nodes, trains, scenarios);
        group.bench_function(label, |b| {
            b.iter(|| {
                let result =
                    run_pipeline(&spec, &family, &config, &SolveLimits::default()).unwrap();
                assert_eq!(result.report.status, "optimal");
                result
            })
        });
    }
    group.finish();
}

criterion_group!(benches, preprocessing, model_build, end_to_end);
criterion_main!(benches);
