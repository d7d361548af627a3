use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use modpc::campaign::{run, ExperimentConfig, Statement};
use modpc::exec::Exec;

fn campaigns(c: &mut Criterion) {
    let mut group = c.benchmark_group("campaign");
    group.sample_size(10);
    for (s, trials) in [(Statement::Lemma71, 48), (Statement::Prop74, 24), (Statement::Lemma23, 48), (Statement::Transfer24, 12)] {
        for exec in [Exec::Sequential, Exec::Parallel] {
            let cfg = ExperimentConfig { trials, exec, ..ExperimentConfig::for_statement(s) };
            group.bench_with_input(BenchmarkId::new(s.to_string(), format!("{exec:?}")), &cfg, |b, cfg| {
                b.iter(|| run(cfg).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, campaigns);
criterion_main!(benches);
