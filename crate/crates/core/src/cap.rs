//! Caps `{x ∈ D : x · v ≥ r}`: volumes, slice barycenters, and cut depths.

use std::f64::consts::FRAC_PI_2;

use crate::body::{ball_volume, Body, CutSpec, Direction, Ellipsoid};
use crate::error::{Error, Result};
use crate::polytope::polygon_centroid;
use crate::quadrature::{integrate, GaussLegendre};
use crate::tol;
use crate::Point;

/// Reference-ball coordinates of a cut on an ellipsoid: the slice is
/// `u · w = 1 - height` in the unit ball, `w = Aᵀv / |Aᵀv|`.
struct BallCut {
    w: Point,
    height: f64,
}

fn ball_cut(e: &Ellipsoid, cut: &CutSpec) -> BallCut {
    let atv = e.shape.transpose() * cut.direction.as_point();
    let scale = atv.norm();
    let support = e.center.dot(&cut.direction) + scale;
    BallCut {
        w: atv / scale,
        height: (support - cut.offset) / scale,
    }
}

/// Volume of the cap of height `w` (measured inward from the pole) of the
/// unit ball, by quadrature of section measures.
///
/// With `z = cos θ'` the slice measure `ω_{n-1}(1 - z²)^{(n-1)/2} dz` becomes
/// `ω_{n-1} sin^n θ' dθ'` over `θ' ∈ [0, acos(1 - w)]`.
pub(crate) fn ball_cap_volume(n: usize, height: f64) -> f64 {
    if height <= 0.0 {
        return 0.0;
    }
    if height >= 2.0 {
        return ball_volume(n);
    }
    let omega = ball_volume(n - 1);
    if n == 1 {
        return omega * height;
    }
    // acos(1 - w) without cancellation.
    let upper = 2.0 * (0.5 * height).sqrt().asin();
    let rule = GaussLegendre::new(20);
    let mut breaks = vec![0.0, upper];
    if upper > FRAC_PI_2 {
        breaks = vec![0.0, FRAC_PI_2, upper];
    }
    let res = integrate(
        |t: f64| t.sin().powi(n as i32),
        &breaks,
        tol::SECTION_QUADRATURE,
        0.0,
        &rule,
        30,
    );
    omega * res.value
}

/// `vol{x ∈ body : x · v ≥ r}`.
pub fn cap_volume(body: &Body, cut: &CutSpec) -> f64 {
    match body {
        Body::Ellipsoid(e) => {
            let bc = ball_cut(e, cut);
            e.shape.determinant().abs() * ball_cap_volume(e.center.len(), bc.height)
        }
        _ => {
            let p = body.to_polytope().expect("polytopal body");
            p.clip(cut.direction.as_point(), cut.offset).volume
        }
    }
}

/// Barycenter of the slice `{x · v = r} ∩ body`.
pub fn section_barycenter(body: &Body, cut: &CutSpec) -> Result<Point> {
    let v = cut.direction.as_point();
    let lo = -body.support(&-v);
    let hi = body.support(v);
    if !(cut.offset > lo && cut.offset < hi) {
        return Err(Error::EmptySection);
    }
    match body {
        Body::Ellipsoid(e) => {
            let bc = ball_cut(e, cut);
            let h = 1.0 - bc.height;
            Ok(&e.center + &e.shape * (bc.w * h))
        }
        _ => {
            let p = body.to_polytope().expect("polytopal body");
            let clip = p.clip(v, cut.offset);
            match (p.dim(), clip.section.len()) {
                (1, 1) => Ok(clip.section[0].clone()),
                (2, 2) => Ok((&clip.section[0] + &clip.section[1]) * 0.5),
                (3, k) if k >= 3 => Ok(polygon_centroid(&clip.section)),
                _ => Err(Error::EmptySection),
            }
        }
    }
}

/// Offset `r` with `cap_volume(body, (v, r)) = δ`, by bracketed bisection on
/// `[-support(-v), support(v)]`.
pub fn cut_depth(body: &Body, v: &Direction, delta: f64) -> Result<f64> {
    let volume = body.volume();
    if !(delta > 0.0 && delta < volume) {
        return Err(Error::DeltaOutOfRange {
            delta,
            max: volume,
        });
    }
    if let Body::Ellipsoid(e) = body {
        let atv = (e.shape.transpose() * v.as_point()).norm();
        return Ok(body.support(v) - ellipsoid_cap_height(e, delta) * atv);
    }
    let p = body.to_polytope().expect("polytopal body");
    let dir = v.as_point();
    let mut lo = -p.support(&-dir);
    let mut hi = p.support(dir);
    let residual = |r: f64| p.clip(dir, r).volume - delta;
    let target = tol::CUT_RESIDUAL * volume;
    for _ in 0..tol::BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        // Cap volume decreases in r.
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (rl, rh) = (residual(lo), residual(hi));
    let r = if rl.abs() <= rh.abs() { lo } else { hi };
    debug_assert!(rl.abs().min(rh.abs()) <= target.max(1e-15));
    Ok(r)
}

// Cap height in reference-ball units, by bisection; avoids the cancellation
// of `support - r` for thin caps.
fn ellipsoid_cap_height(e: &Ellipsoid, delta: f64) -> f64 {
    let n = e.center.len();
    let target = delta / e.shape.determinant().abs();
    let (mut lo, mut hi) = (0.0_f64, 2.0_f64);
    for _ in 0..tol::BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ball_cap_volume(n, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Cap width `support(v) - cut_depth(v, δ)`, computed without cancellation
/// for ellipsoids.
pub fn cap_width(body: &Body, v: &Direction, delta: f64) -> Result<f64> {
    let volume = body.volume();
    if !(delta > 0.0 && delta < volume) {
        return Err(Error::DeltaOutOfRange { delta, max: volume });
    }
    match body {
        Body::Ellipsoid(e) => {
            let atv = (e.shape.transpose() * v.as_point()).norm();
            Ok(ellipsoid_cap_height(e, delta) * atv)
        }
        _ => Ok(body.support(v) - cut_depth(body, v, delta)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Matrix;
    use std::f64::consts::{PI, SQRT_2};

    fn p(c: &[f64]) -> Point {
        Point::from_vec(c.to_vec())
    }

    fn cut(v: &[f64], r: f64) -> CutSpec {
        CutSpec::new(Direction::from_slice(v).unwrap(), r)
    }

    #[test]
    fn cap_volume_examples() {
        let sq = Body::unit_square();
        assert!((cap_volume(&sq, &cut(&[0.0, 1.0], 0.5)) - 0.5).abs() < 1e-15);
        let disk = Body::unit_ball(2);
        assert!((cap_volume(&disk, &cut(&[0.0, 1.0], 0.0)) - PI / 2.0).abs() < 1e-13);
        let corner = cap_volume(&sq, &cut(&[1.0, 1.0], 1.5 / SQRT_2));
        assert!((corner - 0.125).abs() < 1e-15);
        assert_eq!(cap_volume(&sq, &cut(&[0.0, 1.0], 2.0)), 0.0);
        assert_eq!(cap_volume(&sq, &cut(&[0.0, 1.0], -1.0)), 1.0);
    }

    #[test]
    fn ball_caps_match_closed_forms() {
        for &w in &[1e-6f64, 3e-4, 0.1, 0.7, 1.0, 1.5, 1.99] {
            // Disk cap area (x - sin x)/2 with x = 2 acos(1 - w), summed as a series.
            let x = 4.0 * (0.5 * w).sqrt().asin();
            let (mut term, mut disk) = (x * x * x / 6.0, 0.0);
            for k in 1..60 {
                disk += term;
                term *= -x * x / ((2 * k + 2) as f64 * (2 * k + 3) as f64);
            }
            disk *= 0.5;
            assert!(
                ((ball_cap_volume(2, w) - disk) / disk).abs() < 1e-11,
                "w = {w}"
            );
            let ball = PI * w * w * (3.0 - w) / 3.0;
            assert!(((ball_cap_volume(3, w) - ball) / ball).abs() < 1e-12);
        }
        assert_eq!(ball_cap_volume(1, 0.25), 0.25);
    }

    #[test]
    fn barycenter_examples() {
        let sq = Body::unit_square();
        let b = section_barycenter(&sq, &cut(&[0.0, 1.0], 0.9)).unwrap();
        assert!((b - p(&[0.5, 0.9])).norm() < 1e-15);
        let b = section_barycenter(&Body::unit_ball(2), &cut(&[0.0, 1.0], 0.5)).unwrap();
        assert!((b - p(&[0.0, 0.5])).norm() < 1e-15);
        let b = section_barycenter(&Body::unit_triangle(), &cut(&[0.0, 1.0], 0.5)).unwrap();
        assert!((b - p(&[0.25, 0.5])).norm() < 1e-15);
        assert_eq!(
            section_barycenter(&sq, &cut(&[0.0, 1.0], 1.0)),
            Err(Error::EmptySection)
        );
        let e = Body::new_ellipsoid(p(&[1.0, 0.0]), Matrix::from_diagonal(&p(&[2.0, 1.0]))).unwrap();
        let b = section_barycenter(&e, &cut(&[1.0, 1.0], 1.0)).unwrap();
        // Midpoint of the chord x + y = √2 on (x-1)²/4 + y² = 1.
        let s2 = SQRT_2;
        let (a2, b2) = (4.0, 1.0);
        // Parametrize x = 1 + t, y = s2 - 1 - t and solve t²/a2 + (s2-1-t)²/b2 = 1.
        let qa = 1.0 / a2 + 1.0 / b2;
        let qb = -2.0 * (s2 - 1.0) / b2;
        let t = -qb / (2.0 * qa);
        assert!((b - p(&[1.0 + t, s2 - 1.0 - t])).norm() < 1e-14);
    }

    #[test]
    fn cut_depth_examples() {
        let disk = Body::unit_ball(2);
        let v = Direction::from_angle(1.1);
        assert!(cut_depth(&disk, &v, PI / 2.0).unwrap().abs() < 1e-14);
        let sq = Body::unit_square();
        let up = Direction::from_slice(&[0.0, 1.0]).unwrap();
        assert!((cut_depth(&sq, &up, 0.25).unwrap() - 0.75).abs() < 1e-14);
        let diag = Direction::from_slice(&[1.0, 1.0]).unwrap();
        assert!((cut_depth(&sq, &diag, 0.125).unwrap() - 1.5 / SQRT_2).abs() < 1e-14);
        assert!(matches!(
            cut_depth(&sq, &up, 1.5),
            Err(Error::DeltaOutOfRange { .. })
        ));
        assert!(cut_depth(&sq, &up, 0.0).is_err());
    }

    #[test]
    fn cube_caps() {
        let cube = Body::new_box(vec![0.0; 3], vec![1.0; 3]).unwrap();
        let v = Direction::from_slice(&[0.0, 0.0, 1.0]).unwrap();
        let r = cut_depth(&cube, &v, 0.3).unwrap();
        assert!((r - 0.7).abs() < 1e-14);
        let b = section_barycenter(&cube, &CutSpec::new(v, r)).unwrap();
        assert!((b - p(&[0.5, 0.5, 0.7])).norm() < 1e-14);
        let ball = Body::unit_ball(3);
        let v = Direction::from_slice(&[1.0, 2.0, 2.0]).unwrap();
        let r = cut_depth(&ball, &v, 2.0 * PI / 3.0).unwrap();
        assert!(r.abs() < 1e-14);
    }
}
