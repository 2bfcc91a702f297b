use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use sinhlog::integrate::{global_error_experiment, ExperimentConfig, Grid, Method};
use sinhlog::par::Exec;

fn config(paths: usize) -> ExperimentConfig {
    ExperimentConfig {
        matrices: vec![
            vec![vec![0.105, -7.43], vec![0.03, 0.345]],
            vec![vec![-0.065, -9.44], vec![-0.005, 0.265]],
        ],
        y0: vec![19.198, 28.972],
        methods: vec![Method::SinhLog, Method::Taylor, Method::Lie],
        order: 2,
        eps: 0.0,
        t_final: 2e-4,
        h: vec![2.5e-5],
        grid: Grid::Time,
        paths,
        fine_steps: 256,
        seed: 1,
        corrections: true,
        output: None,
    }
}

fn paths(c: &mut Criterion) {
    let mut group = c.benchmark_group("global_error");
    group.sample_size(10);
    for n in [256, 1024] {
        let cfg = config(n);
        for exec in [Exec::Sequential, Exec::Parallel] {
            group.bench_with_input(BenchmarkId::new(exec.to_string(), n), &cfg, |b, cfg| {
                b.iter(|| global_error_experiment(black_box(cfg), exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, paths);
criterion_main!(benches);
