//! Exact vs heuristic traversal cost as the focal term count grows.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use ctd_bench::closed_random_matrix;
use ctd_core::traversal::{solve_exact, solve_heuristic, HeuristicConfig, HELD_KARP_CAP};

fn bench_solvers(c: &mut Criterion) {
    let mut group = c.benchmark_group("solvers");
    for n in [8, 12, 16, 20] {
        let m = closed_random_matrix(n as u64, n);
        if n <= HELD_KARP_CAP {
            group.bench_with_input(BenchmarkId::new("held_karp", n), &m, |b, m| {
                b.iter(|| solve_exact(black_box(m), HELD_KARP_CAP).unwrap())
            });
        }
        group.bench_with_input(BenchmarkId::new("heuristic", n), &m, |b, m| {
            b.iter(|| solve_heuristic(black_box(m), &HeuristicConfig::default()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_solvers);
criterion_main!(benches);
