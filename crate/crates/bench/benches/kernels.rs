use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use floatberg::laplace::log_laplace;
use floatberg::{kernel, Body, Point, QuadratureConfig};

fn p(c: &[f64]) -> Point {
    Point::from_vec(c.to_vec())
}

fn kernels(c: &mut Criterion) {
    let cfg = QuadratureConfig::default();
    let triangle = Body::unit_triangle();
    let disk = Body::unit_ball(2);
    let square = Body::unit_square();
    let mut g = c.benchmark_group("kernel");
    g.sample_size(20);
    g.bench_function("square_center", |b| {
        b.iter(|| kernel(&square, black_box(&p(&[0.5, 0.5])), &cfg).unwrap())
    });
    g.bench_function("triangle_centroid", |b| {
        b.iter(|| kernel(&triangle, black_box(&p(&[1.0 / 3.0, 1.0 / 3.0])), &cfg).unwrap())
    });
    g.bench_function("triangle_near_edge", |b| {
        b.iter(|| kernel(&triangle, black_box(&p(&[0.4, 0.005])), &cfg).unwrap())
    });
    g.bench_function("disk_off_center", |b| {
        b.iter(|| kernel(&disk, black_box(&p(&[0.6, 0.2])), &cfg).unwrap())
    });
    g.finish();
}

fn laplace(c: &mut Criterion) {
    let triangle = Body::unit_triangle();
    let ball = Body::unit_ball(3);
    c.bench_function("laplace_triangle", |b| {
        b.iter(|| log_laplace(&triangle, black_box(&p(&[3.0, -1.0]))))
    });
    c.bench_function("laplace_ball3", |b| {
        b.iter(|| log_laplace(&ball, black_box(&p(&[2.0, 0.5, -1.0]))))
    });
}

criterion_group!(benches, kernels, laplace);
criterion_main!(benches);
