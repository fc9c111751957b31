use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use tunnelgate::analysis::threshold_curve_with;
use tunnelgate::grid::{linspace, Execution};
use tunnelgate::verify::{oracle_agreement, oracle_grid, VerifyOptions};
use tunnelgate::SolutionBranch;

fn oracle_grid_bench(c: &mut Criterion) {
    let grid = oracle_grid();
    let mut group = c.benchmark_group("oracle-grid");
    group.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        let opts = VerifyOptions {
            exec,
            ..Default::default()
        };
        group.bench_function(name, |b| b.iter(|| black_box(oracle_agreement(&grid, opts))));
    }
    group.finish();
}

fn curve_bench(c: &mut Criterion) {
    let betas = linspace(0.5, 0.999, 20_000);
    let mut group = c.benchmark_group("threshold-curve");
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_function(name, |b| {
            b.iter(|| black_box(threshold_curve_with(SolutionBranch::B, &betas, exec).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, oracle_grid_bench, curve_bench);
criterion_main!(benches);
