use criterion::{black_box, criterion_group, criterion_main, Criterion};

use jost_bench::dot_solver;
use jost_core::expansion::expand;
use jost_core::riccati::riccati_jy;
use jost_core::{Complex64, PartialWave, RiemannPoint};

fn riccati(c: &mut Criterion) {
    let pw = PartialWave::new(2);
    let z = Complex64::new(7.5, -1.2);
    c.bench_function("riccati_jy l=2", |b| {
        b.iter(|| riccati_jy(pw, black_box(z)).unwrap())
    });
}

fn jost(c: &mut Criterion) {
    let solver = dot_solver();
    let pw = PartialWave::new(0);
    let mut group = c.benchmark_group("jost");
    group.sample_size(20);
    group.bench_function("direct E=7", |b| {
        b.iter(|| {
            solver
                .direct(
                    pw,
                    RiemannPoint::physical(black_box(Complex64::new(7.0, 0.0))),
                )
                .unwrap()
        })
    });
    group.bench_function("resonance E=7.1-0.29i", |b| {
        b.iter(|| {
            solver
                .direct(
                    pw,
                    RiemannPoint::resonance(black_box(Complex64::new(7.105, -0.2856))),
                )
                .unwrap()
        })
    });
    group.bench_function("tilde E=7", |b| {
        b.iter(|| {
            solver
                .tilde(pw, black_box(Complex64::new(7.0, 0.0)))
                .unwrap()
        })
    });
    group.finish();
}

fn expansion(c: &mut Criterion) {
    let solver = dot_solver();
    let pw = PartialWave::new(0);
    let mut group = c.benchmark_group("expand");
    group.sample_size(10);
    for order in [2, 4] {
        group.bench_function(format!("E0=7 N={order}"), |b| {
            b.iter(|| expand(&solver, pw, black_box(Complex64::new(7.0, 0.0)), order).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, riccati, jost, expansion);
criterion_main!(benches);
