use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ethkb_bench::bundle;
use ethkb_core::pipeline::{group_label, run_pipeline, MergeConfig};
use ethkb_core::report::{format_table, ReportFormat};
use ethkb_core::MappingLabel;

fn pipeline(c: &mut Criterion) {
    let config = MergeConfig::default();
    for name in ["census", "encore"] {
        let b = bundle(name);
        c.bench_function(&format!("run_pipeline/{name}"), |bench| {
            bench.iter(|| run_pipeline(black_box(&b), &config).unwrap())
        });
    }
    let tables: Vec<_> = ["census", "encore"]
        .iter()
        .map(|n| run_pipeline(&bundle(n), &config).unwrap())
        .collect();
    c.bench_function("format_table/text", |bench| {
        bench.iter(|| format_table(black_box(&tables), ReportFormat::Text))
    });
}

fn labels(c: &mut Criterion) {
    use MappingLabel::*;
    let mixed = [Unique, Shared, OutOfScope, Shared, Unique];
    let large: Vec<MappingLabel> = (0..1000).map(|i| MappingLabel::ALL[2 + i % 2]).collect();
    c.bench_function("group_label/5", |b| {
        b.iter(|| group_label(black_box(&mixed)))
    });
    c.bench_function("group_label/1000", |b| {
        b.iter(|| group_label(black_box(&large)))
    });
}

criterion_group!(benches, pipeline, labels);
criterion_main!(benches);
