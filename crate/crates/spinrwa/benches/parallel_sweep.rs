use criterion::{criterion_group, criterion_main, Criterion};
use spinrwa::fidelity::Metric;
use spinrwa::methods::Method;
use spinrwa::spin::SpinParams;
use spinrwa::sweep::{run_sweep, run_sweep_serial, SweepAxis, SweepSpec};

fn bench_spec() -> SweepSpec {
    SweepSpec {
        vary: SweepAxis::Omega,
        start: 0.9,
        stop: 1.1,
        points: 8,
        fixed: SpinParams::new(2.0, 1.0, 0.05, 0.3, 1.0),
        methods: vec![Method::RwaReduced, Method::RwaFull],
        average_window: 2.0,
        metric: Metric::Operator,
    }
}

fn sweep_benches(c: &mut Criterion) {
    let spec = bench_spec();
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    group.bench_function("parallel", |b| b.iter(|| run_sweep(&spec).unwrap()));
    group.bench_function("serial", |b| b.iter(|| run_sweep_serial(&spec).unwrap()));
    group.finish();
}

criterion_group!(benches, sweep_benches);
criterion_main!(benches);
