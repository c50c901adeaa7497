mod common;

use common::{interior_point, p, polygon_from};
use floatberg::bergman::interval_kernel_reference;
use floatberg::{kernel, Body, Matrix, Point, QuadratureConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-8;

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default().with_rel_tol(EPS)
}

fn k(body: &Body, x: &Point) -> f64 {
    let v = kernel(body, x, &cfg()).unwrap();
    assert!(v.value > 0.0);
    v.value
}

fn pentagon() -> Body {
    let a: Vec<f64> = (0..5).map(|i| 0.4 + 1.25 * i as f64).collect();
    polygon_from(&a, &[1.0, 1.2, 0.8, 1.1, 0.9])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn symmetric_points_share_kernel_values(u in prop::collection::vec(0.02..0.98f64, 2)) {
        let (a, b) = (u[0], u[1]);
        let sq = Body::unit_square();
        let base = k(&sq, &p(&[a, b]));
        for q in [[b, a], [1.0 - a, b], [1.0 - b, 1.0 - a]] {
            prop_assert!((k(&sq, &p(&q)) / base - 1.0).abs() <= 2.0 * EPS);
        }
        let t = Body::unit_triangle();
        if let Some(x) = interior_point(&t, &u) {
            if t.boundary_gap(&x) > 0.01 {
                let y = p(&[x[1], x[0]]);
                prop_assert!((k(&t, &y) / k(&t, &x) - 1.0).abs() <= 2.0 * EPS);
            }
        }
        let disk = Body::unit_ball(2);
        let x = p(&[0.9 * a - 0.45, 0.9 * b - 0.45]);
        let rot = p(&[-x[1], x[0]]);
        prop_assert!((k(&disk, &rot) / k(&disk, &x) - 1.0).abs() <= 2.0 * EPS);
    }

    #[test]
    fn transformation_law_for_diagonal_and_shear_maps(
        d in prop::collection::vec(0.5..2.5f64, 2),
        s in -1.0..1.0f64,
        u in prop::collection::vec(0.05..0.95f64, 2),
        shear in any::<bool>(),
    ) {
        let a = if shear {
            Matrix::from_row_slice(2, 2, &[1.0, s, 0.0, 1.0])
        } else {
            Matrix::from_diagonal(&p(&d))
        };
        let b = p(&[0.2, -0.7]);
        let det2 = a.determinant().powi(2);
        for body in [Body::unit_square(), Body::unit_triangle()] {
            let Some(x) = interior_point(&body, &u) else { continue };
            let image = body.affine_image(&a, &b).unwrap();
            let lhs = k(&image, &(&a * &x + &b)) * det2;
            prop_assert!((lhs / k(&body, &x) - 1.0).abs() <= 5.0 * EPS);
        }
    }

    #[test]
    fn boxes_factor_into_interval_kernels(
        lo in prop::collection::vec(-2.0..0.0f64, 2),
        w in prop::collection::vec(0.2..3.0f64, 2),
        u in prop::collection::vec(0.01..0.99f64, 2),
    ) {
        let hi: Vec<f64> = lo.iter().zip(&w).map(|(l, w)| l + w).collect();
        let bx = Body::new_box(lo.clone(), hi.clone()).unwrap();
        let x = p(&[lo[0] + w[0] * u[0], lo[1] + w[1] * u[1]]);
        let want = interval_kernel_reference(lo[0], hi[0], x[0]) * interval_kernel_reference(lo[1], hi[1], x[1]);
        prop_assert!((k(&bx, &x) / want - 1.0).abs() <= 2.0 * EPS);
    }

    #[test]
    fn log_kernel_is_midpoint_convex(which in 0usize..3, u in prop::collection::vec(0.0..1.0f64, 4)) {
        let bodies = [Body::unit_triangle(), pentagon(), Body::unit_ball(2)];
        let body = &bodies[which];
        let (Some(x), Some(y)) = (interior_point(body, &u[..2]), interior_point(body, &u[2..])) else {
            return Ok(());
        };
        let m = (&x + &y) * 0.5;
        let lhs = k(body, &m).ln();
        let rhs = 0.5 * (k(body, &x).ln() + k(body, &y).ln());
        prop_assert!(lhs <= rhs + 5.0 * EPS, "{lhs} > {rhs}");
    }
}

#[test]
fn kernel_is_monotone_under_inclusion() {
    // T ⊂ S ⊂ 2T.
    let t = Body::unit_triangle();
    let s = Body::unit_square();
    let big = Body::new_simplex(vec![p(&[0.0, 0.0]), p(&[2.0, 0.0]), p(&[0.0, 2.0])]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut count = 0;
    while count < 20 {
        let c = p(&[rng.random_range(0.02..0.96), rng.random_range(0.02..0.96)]);
        if !t.contains(&c) || t.boundary_gap(&c) < 0.01 {
            continue;
        }
        count += 1;
        let kt = kernel(&t, &c, &cfg()).unwrap();
        let ks = kernel(&s, &c, &cfg()).unwrap();
        let kb = kernel(&big, &c, &cfg()).unwrap();
        assert!(kb.value + kb.error < ks.value - ks.error, "{c:?}");
        assert!(ks.value + ks.error < kt.value - kt.error, "{c:?}");
    }
}
