use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use finsler_cone::boundary::{boundary_grid, classify_boundary_convexity_with, ConvexityKind};
use finsler_cone::models::minkowski::{make_minkowski, Region};
use finsler_cone::parallel::Execution;
use finsler_cone::suite::{run_group, SuiteOptions};

fn convexity(c: &mut Criterion) {
    let m = make_minkowski(2, Region::Cassini { a: 1.0, c: 1.1 });
    let pts = boundary_grid(&m, &[0.0, 0.5, 1.0], 64).unwrap();
    let mut group = c.benchmark_group("classify_boundary");
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| classify_boundary_convexity_with(&m, ConvexityKind::Light, &pts, 4, exec).unwrap())
        });
    }
    group.finish();
}

fn probes(c: &mut Criterion) {
    let mut group = c.benchmark_group("theorem1_probes");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        let opts = SuiteOptions { exec, ..Default::default() };
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &opts, |b, opts| {
            b.iter(|| run_group("theorem1", opts))
        });
    }
    group.finish();
}

criterion_group!(benches, convexity, probes);
criterion_main!(benches);
