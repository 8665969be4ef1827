use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use disloc_bench::disk_configuration;
use disloc_core::{integrate, pt, AnalyticKernels, Burgers, Configuration, Dislocation, Domain, IntegrationParams, KernelEvaluator, Mobility};

fn integrator(c: &mut Criterion) {
    let disk = AnalyticKernels::new(Domain::unit_disk());
    let mut g = c.benchmark_group("integrate");
    let single = Configuration::new(vec![Dislocation::new(pt(0.9, 0.0), Burgers::Positive)], disk.domain()).unwrap();
    g.bench_function("disk_single_to_boundary", |b| {
        b.iter(|| integrate(&single, &disk, &Mobility::Identity, &IntegrationParams::with_t_max(1.0)).unwrap())
    });
    for n in [2, 4, 8] {
        let config = disk_configuration(n);
        g.bench_with_input(BenchmarkId::new("disk_ensemble_member", n), &config, |b, cfg| {
            b.iter(|| integrate(cfg, &disk, &Mobility::Identity, &IntegrationParams::with_t_max(5.0)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, integrator);
criterion_main!(benches);
