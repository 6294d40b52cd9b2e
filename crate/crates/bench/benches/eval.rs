//! Single mean evaluations across families and precisions.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use meaniter_bench::{qa_log, reals};
use meaniter_core::{eval_mean, MeanSpec};

fn bench_eval(c: &mut Criterion) {
    let cases = [
        ("arithmetic", MeanSpec::arithmetic()),
        ("geometric", MeanSpec::geometric()),
        ("gini(2,1)", MeanSpec::gini(2.0, 1.0).unwrap()),
        ("power(-2)", MeanSpec::power(-2.0).unwrap()),
        ("qa(log)", qa_log()),
    ];
    let mut group = c.benchmark_group("eval_mean");
    for bits in [256u32, 4096] {
        let x = reals(&[1.0, 2.0, 3.0], bits);
        for (name, spec) in &cases {
            group.bench_with_input(BenchmarkId::new(*name, bits), &x, |b, x| {
                b.iter(|| eval_mean(black_box(spec), black_box(x)).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_eval);
criterion_main!(benches);
