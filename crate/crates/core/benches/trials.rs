use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use quatlearn::harness::{run_learning_curve_with, Execution, ExperimentConfig};

fn config() -> ExperimentConfig {
    ExperimentConfig {
        m: 4,
        trials: 8,
        iterations: 200,
        samples: 16,
        mu: ExperimentConfig::default_mu(4),
        z: 16,
        ..ExperimentConfig::learning_curve()
    }
}

fn trials(c: &mut Criterion) {
    let cfg = config();
    let mut group = c.benchmark_group("learning_curve_m4_8x200");
    group.sample_size(10);
    for (name, execution) in [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ] {
        group.bench_function(name, |b| {
            b.iter(|| run_learning_curve_with(black_box(&cfg), execution).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, trials);
criterion_main!(benches);
