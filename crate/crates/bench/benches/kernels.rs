use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spin7_bench::{dt, rotation_state};
use spin7_core::algebra::{cayley_form, metric_from_form};
use spin7_core::flow::{evaluate, flow_step};
use spin7_core::sampling::{random_rotation, rng};
use spin7_core::spinor::rotate_form;
use spin7_core::Integrator;

fn pointwise(c: &mut Criterion) {
    let phi = cayley_form();
    let r = random_rotation(&mut rng(1));
    let rotated = rotate_form(&r, &phi).unwrap();
    c.bench_function("metric_from_form", |b| {
        b.iter(|| metric_from_form(black_box(&rotated)).unwrap())
    });
    c.bench_function("rotate_form", |b| {
        b.iter(|| rotate_form(black_box(&r), black_box(&phi)).unwrap())
    });
}

fn lattice(c: &mut Criterion) {
    let mut group = c.benchmark_group("flow");
    group.sample_size(20);
    for n in [32, 128] {
        let s = rotation_state(1, n);
        group.bench_with_input(BenchmarkId::new("evaluate_1d", n), &s, |b, s| {
            b.iter(|| evaluate(black_box(&s.field)))
        });
        for (name, integrator) in [
            ("lie_euler_1d", Integrator::LieEuler),
            ("euler_1d", Integrator::Euler),
        ] {
            group.bench_with_input(BenchmarkId::new(name, n), &s, |b, s| {
                b.iter(|| flow_step(black_box(s), dt(s), integrator))
            });
        }
    }
    let s = rotation_state(2, 16);
    group.bench_function("lie_euler_2d/16", |b| {
        b.iter(|| flow_step(black_box(&s), dt(&s), Integrator::LieEuler))
    });
    group.finish();
}

criterion_group!(benches, pointwise, lattice);
criterion_main!(benches);
