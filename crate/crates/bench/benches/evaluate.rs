use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use pcf_bench::CASES;
use pcf_core::api::{evaluate, evaluate_pair, EvalRequest};

fn single(c: &mut Criterion) {
    let mut group = c.benchmark_group("evaluate");
    for case in CASES {
        let req = EvalRequest {
            want_scaled: true,
            ..EvalRequest::new(case.func, case.a, case.x)
        };
        group.bench_with_input(BenchmarkId::from_parameter(case.name), &req, |b, req| {
            b.iter(|| evaluate(black_box(req)).unwrap())
        });
    }
    group.finish();
}

fn pair(c: &mut Criterion) {
    let mut group = c.benchmark_group("evaluate_pair");
    for case in CASES.iter().filter(|c| c.name != "series") {
        group.bench_function(case.name, |b| {
            b.iter(|| evaluate_pair(case.func, black_box(case.a), black_box(case.x)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, single, pair);
criterion_main!(benches);
