use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use grasp_core::testbed::{generate_suite, run_testbed, SuiteConfig};

fn suite(c: &mut Criterion) {
    let standard = SuiteConfig::standard();
    c.bench_function("generate_standard_suite", |b| b.iter(|| generate_suite(black_box(&standard), 7).unwrap()));
    let mut group = c.benchmark_group("testbed");
    group.sample_size(10);
    group.bench_function("standard_suite", |b| b.iter(|| run_testbed(black_box(&standard), 7).unwrap()));
    group.finish();
}

criterion_group!(benches, suite);
criterion_main!(benches);
