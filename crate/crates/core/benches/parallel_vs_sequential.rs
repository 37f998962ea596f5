use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use detumble::controllability::{rank_sweep, FieldSource, DEFAULT_RANK_TOL};
use detumble::dynamics::InertiaTensor;
use detumble::exec::Execution;
use detumble::magnetics::DipoleModel;
use detumble::orbit::OrbitElements;
use detumble::sim::{run_suite, ControllerKind, RunConfig, TruthModel};
use nalgebra::Vector3;
use std::sync::Arc;

fn policies() -> Vec<(&'static str, Execution)> {
    let mut v = vec![("sequential", Execution::Sequential)];
    #[cfg(feature = "parallel")]
    v.push(("parallel", Execution::Parallel));
    v
}

fn bench_rank_sweep(c: &mut Criterion) {
    let orbit = OrbitElements::aeolus();
    let source = FieldSource::Model(Arc::new(DipoleModel::new(orbit)));
    let j = InertiaTensor::asymmetric_reference();
    let mut group = c.benchmark_group("rank_sweep_360");
    for (name, exec) in policies() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                rank_sweep(
                    j,
                    &source,
                    orbit.period(),
                    360,
                    &Vector3::zeros(),
                    DEFAULT_RANK_TOL,
                    exec,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_suite(c: &mut Criterion) {
    let cases = [
        [2.429286, 2.878490, -0.366780],
        [-1.576299, -0.246907, 2.778531],
        [0.047150, -2.486905, -1.425107],
        [-0.626909, -0.795380, 2.927892],
    ];
    let configs: Vec<RunConfig> = cases
        .iter()
        .enumerate()
        .map(|(i, w)| RunConfig {
            max_duration: 300.0,
            truth_model: TruthModel::Igrf,
            ..RunConfig::new(format!("case{}", i + 1), ControllerKind::Bdot, *w)
        })
        .collect();
    let mut group = c.benchmark_group("bdot_suite_5min");
    group.sample_size(10);
    for (name, exec) in policies() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_suite(&configs, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_rank_sweep, bench_suite);
criterion_main!(benches);
