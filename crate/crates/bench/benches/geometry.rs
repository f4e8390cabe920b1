use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use windform_core::formout::sweep_tube;
use windform_core::{DVec3, JointChain};

fn fabrik(c: &mut Criterion) {
    let chain = JointChain::straight(DVec3::ZERO, vec![1.0, 0.8, 0.6, 0.5, 0.4, 0.3], DVec3::X);
    c.bench_function("fabrik_solve_6", |b| {
        b.iter(|| {
            let mut ch = chain.clone();
            ch.solve(black_box(DVec3::new(1.5, 1.2, 0.8)), 1e-6, 50)
        })
    });
}

fn tube(c: &mut Criterion) {
    let pts: Vec<DVec3> = (0..500)
        .map(|i| {
            let t = i as f64 * 0.05;
            DVec3::new(t.cos() * 3.0, t.sin() * 3.0, t * 0.2)
        })
        .collect();
    c.bench_function("sweep_tube_500x8", |b| {
        b.iter(|| sweep_tube(black_box(&pts), 0.1, 8).unwrap())
    });
}

criterion_group!(benches, fabrik, tube);
criterion_main!(benches);
