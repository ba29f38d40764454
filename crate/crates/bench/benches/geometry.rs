use criterion::{criterion_group, criterion_main, Criterion};
use pathspace::{ManifoldSpec, Vec3};
use std::hint::black_box;

fn steps(c: &mut Criterion) {
    for spec in [ManifoldSpec::Euclidean { n: 2 }, ManifoldSpec::Sphere2, ManifoldSpec::Hyperbolic2] {
        let o = spec.origin();
        let frame = spec.standard_frame(&o);
        let v = frame.apply(&[0.03, -0.02]);
        c.bench_function(&format!("step_raw/{spec}"), |b| {
            b.iter(|| {
                let mut cols: Vec<Vec3> = frame.columns().to_vec();
                black_box(spec.step_raw(black_box(o.coords()), black_box(&v), &mut cols))
            })
        });
        let q = spec.exp_raw(o.coords(), &v);
        c.bench_function(&format!("dist_raw/{spec}"), |b| b.iter(|| black_box(spec.dist_raw(black_box(o.coords()), black_box(&q)))));
    }
}

criterion_group!(benches, steps);
criterion_main!(benches);
