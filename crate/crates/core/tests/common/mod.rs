#![allow(dead_code)]

use floatberg::{Body, Matrix, Point};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn p(c: &[f64]) -> Point {
    Point::from_vec(c.to_vec())
}

/// Convex polygon through `k` points at sorted random angles and radii in `[0.5, 1.5]`.
pub fn polygon_from(angles: &[f64], radii: &[f64]) -> Body {
    let mut a = angles.to_vec();
    a.sort_by(f64::total_cmp);
    let pts: Vec<Point> = a
        .iter()
        .zip(radii)
        .map(|(t, r)| p(&[r * t.cos(), r * t.sin()]))
        .collect();
    Body::new_polytope(&pts).expect("polygon")
}

pub fn polygon() -> impl Strategy<Value = Body> {
    (5usize..9)
        .prop_flat_map(|k| {
            (
                prop::collection::vec(0.0..std::f64::consts::TAU, k),
                prop::collection::vec(0.5..1.5f64, k),
            )
        })
        .prop_filter_map("spread-out angles", |(a, r)| {
            let mut s = a.clone();
            s.sort_by(f64::total_cmp);
            let gaps = s.windows(2).map(|w| w[1] - w[0]).chain([s[0] + std::f64::consts::TAU - s[s.len() - 1]]);
            if gaps.fold(0.0, f64::max) < 2.5 {
                Some(polygon_from(&a, &r))
            } else {
                None
            }
        })
}

/// Origin-symmetric polygon from points and their negatives.
pub fn symmetric_polygon() -> impl Strategy<Value = Body> {
    (3usize..6).prop_flat_map(|k| {
        (
            prop::collection::vec(0.0..std::f64::consts::PI, k),
            prop::collection::vec(0.5..1.5f64, k),
        )
            .prop_map(|(a, r)| symmetric_from(&a, &r))
    })
}

pub fn symmetric_from(angles: &[f64], radii: &[f64]) -> Body {
    let mut pts = Vec::new();
    for (t, r) in angles.iter().zip(radii) {
        let q = p(&[r * t.cos(), r * t.sin()]);
        pts.push(-&q);
        pts.push(q);
    }
    // Guarantee a nondegenerate hull.
    pts.push(p(&[0.3, 0.3]));
    pts.push(p(&[-0.3, -0.3]));
    pts.push(p(&[0.3, -0.3]));
    pts.push(p(&[-0.3, 0.3]));
    Body::new_polytope(&pts).expect("symmetric polygon")
}

/// Seeded corpus of `count` random symmetric polygons.
pub fn symmetric_corpus(count: usize, seed: u64) -> Vec<Body> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let k = rng.random_range(3..6);
            let a: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..std::f64::consts::PI)).collect();
            let r: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..1.5)).collect();
            symmetric_from(&a, &r)
        })
        .collect()
}

/// Seeded random point cloud of `m` points in `n` dimensions.
pub fn cloud(n: usize, m: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stretch = Matrix::from_fn(n, n, |i, j| if i == j { 1.0 + i as f64 } else { 0.3 });
    (0..m)
        .map(|_| &stretch * Point::from_fn(n, |_, _| rng.random_range(-1.0..1.0)))
        .collect()
}

/// Uniform point of the body's bounding box that lies in the body.
pub fn interior_point(body: &Body, u: &[f64]) -> Option<Point> {
    let (lo, hi) = body.bounding_box();
    let x = Point::from_fn(lo.len(), |i, _| lo[i] + (hi[i] - lo[i]) * u[i]);
    body.contains(&x).then_some(x)
}
