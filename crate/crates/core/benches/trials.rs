use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use leafmatch::bench::{soundness_experiment, Execution, ExperimentConfig, Family, StrategyKind};

fn trial_core(c: &mut Criterion) {
    let mut group = c.benchmark_group("mixed-trials");
    group.sample_size(10);
    for (name, execution) in [
        ("parallel", Execution::Parallel),
        ("sequential", Execution::Sequential),
    ] {
        let mut cfg = ExperimentConfig::new("bench", Family::Mixed, StrategyKind::Lv, 400, 1);
        cfg.strategies = vec![
            StrategyKind::Lv,
            StrategyKind::Det,
            StrategyKind::McBudgeted { epsilon: 0.125 },
        ];
        cfg.execution = execution;
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| soundness_experiment(cfg).expect("trials run"))
        });
    }
    group.finish();
}

criterion_group!(benches, trial_core);
criterion_main!(benches);
