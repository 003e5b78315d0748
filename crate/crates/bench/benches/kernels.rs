use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use cliffgr::dirac;
use cliffgr::einstein::mass;
use cliffgr::fixtures;
use cliffgr::geometry::Snapshot;
use cliffgr::sampling;
use cliffgr::suite::{self, Tolerances};

fn algebra(c: &mut Criterion) {
    let mut rng = sampling::stream(1, 0);
    let a = sampling::multivector(&mut rng);
    let b = sampling::multivector(&mut rng);
    c.bench_function("geometric_product", |bench| bench.iter(|| black_box(a).gp(black_box(&b))));
    c.bench_function("hodge_dual", |bench| bench.iter(|| black_box(a).hodge()));
}

fn geometry(c: &mut Criterion) {
    let spec = fixtures::schwarzschild();
    let x = [0.3, 7.0, 1.1, 0.4];
    for ord in [2, 3, 4] {
        c.bench_function(&format!("snapshot_order_{ord}"), |bench| {
            bench.iter(|| Snapshot::new(&spec, black_box(x), ord).unwrap())
        });
    }
    let s = Snapshot::new(&spec, x, 3).unwrap();
    let f = dirac::polynomial_field(2, 3, 5);
    c.bench_function("dirac_split_two_form", |bench| bench.iter(|| dirac::split_residual(&s, black_box(&f)).unwrap()));
}

fn batteries(c: &mut Criterion) {
    let mut g = c.benchmark_group("batteries");
    g.sample_size(10);
    let spec = fixtures::schwarzschild();
    let tol = Tolerances::default();
    g.bench_function("point_battery", |bench| {
        bench.iter(|| suite::point_battery(&spec, black_box([0.3, 7.0, 1.1, 0.4]), 1, 0, &tol).unwrap())
    });
    g.bench_function("algebra_suite_1000", |bench| bench.iter(|| suite::algebra_suite(42, 1000, &tol)));
    let qc = fixtures::schwarzschild_qc();
    g.bench_function("mass_at_r100_q32", |bench| bench.iter(|| mass::mass_at(&qc, black_box(100.0), 32).unwrap()));
    g.finish();
}

criterion_group!(benches, algebra, geometry, batteries);
criterion_main!(benches);
