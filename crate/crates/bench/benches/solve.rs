use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use umaf::bnp::{solve, SolverConfig};
use umaf::gen::{generate_pair, GenSpec};
use umaf::reduce::reduce;

fn branch_and_price(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    for k in [5, 10, 15] {
        let (t1, t2) = generate_pair(&GenSpec { t: 50, s: 70, k, seed: 3 }).unwrap();
        g.bench_with_input(BenchmarkId::new("t50", k), &k, |b, _| {
            b.iter(|| solve(black_box(&t1), black_box(&t2), &SolverConfig::default()).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("reduce_t50", k), &k, |b, _| b.iter(|| reduce(black_box(&t1), black_box(&t2)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, branch_and_price);
criterion_main!(benches);
