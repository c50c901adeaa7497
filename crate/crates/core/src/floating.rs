//! Outer polyhedral models of the convex floating body
//! `D_δ = ⋂_v {x : x · v < r_v}`, where the cap `{x · v ≥ r_v}` has volume `δ`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::body::{Body, CutSpec, Direction};
use crate::cap::{cut_depth, section_barycenter};
use crate::error::{Error, Result};
use crate::oracle::{mc_box_mean, McEstimate};
use crate::tol;
use crate::Point;

pub const DEFAULT_DIRECTIONS_2D: usize = 720;
pub const DEFAULT_DIRECTIONS_3D: usize = 2000;

/// `count` equally spaced unit vectors in the plane, starting at angle 0.
pub fn uniform_directions(count: usize) -> Vec<Direction> {
    (0..count)
        .map(|k| Direction::from_angle(2.0 * PI * k as f64 / count as f64))
        .collect()
}

/// Fibonacci-sphere grid of `count` unit vectors in space.
pub fn fibonacci_directions(count: usize) -> Vec<Direction> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * k as f64;
            Direction::from_slice(&[r * phi.cos(), r * phi.sin(), z]).expect("unit vector")
        })
        .collect()
}

/// Direction grid for dimension `n` with `count` directions (ignored for `n = 1`).
pub fn direction_grid(n: usize, count: usize) -> Result<Vec<Direction>> {
    if count == 0 {
        return Err(Error::InvalidArgument("direction count must be positive".into()));
    }
    match n {
        1 => Ok(vec![
            Direction::from_slice(&[1.0])?,
            Direction::from_slice(&[-1.0])?,
        ]),
        2 => Ok(uniform_directions(count)),
        3 => Ok(fibonacci_directions(count)),
        _ => Err(Error::UnsupportedDimension(n)),
    }
}

/// Default grid: 720 directions in the plane, 2000 in space.
pub fn default_directions(n: usize) -> Result<Vec<Direction>> {
    let count = if n == 3 {
        DEFAULT_DIRECTIONS_3D
    } else {
        DEFAULT_DIRECTIONS_2D
    };
    direction_grid(n, count)
}

/// Finitely many cuts of `D_δ` with their section barycenters.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatingBodyApprox {
    pub delta: f64,
    pub cuts: Vec<CutSpec>,
    pub barycenters: Vec<Point>,
    pub body: Body,
}

fn check_inputs(body: &Body, delta: f64, directions: &[Direction]) -> Result<()> {
    let volume = body.volume();
    if !(delta > 0.0 && delta <= 0.5 * volume) {
        return Err(Error::DeltaOutOfRange {
            delta,
            max: 0.5 * volume,
        });
    }
    if directions.is_empty() {
        return Err(Error::InvalidArgument("no directions given".into()));
    }
    if let Some(d) = directions.iter().find(|d| d.dim() != body.dim()) {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            got: d.dim(),
        });
    }
    Ok(())
}

fn cuts_and_barycenters(
    body: &Body,
    delta: f64,
    directions: &[Direction],
) -> Result<(Vec<CutSpec>, Vec<Point>)> {
    check_inputs(body, delta, directions)?;
    let rows: Vec<(CutSpec, Point)> = directions
        .par_iter()
        .map(|v| {
            let r = cut_depth(body, v, delta)?;
            let b = section_barycenter(body, &CutSpec::new(v.clone(), r))?;
            // Same rounding as `member`, so every barycenter is a boundary point.
            let r = b.dot(v.as_point());
            Ok((CutSpec::new(v.clone(), r), b))
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().unzip())
}

/// Cuts `r_k = cut_depth(v_k, δ)` and barycenters for every direction.
pub fn build(body: &Body, delta: f64, directions: &[Direction]) -> Result<FloatingBodyApprox> {
    let (cuts, barycenters) = cuts_and_barycenters(body, delta, directions)?;
    let fba = FloatingBodyApprox {
        delta,
        cuts,
        barycenters,
        body: body.clone(),
    };
    let n = body.dim();
    let mean = fba
        .barycenters
        .iter()
        .fold(Point::zeros(n), |a, b| a + b)
        / fba.barycenters.len() as f64;
    let (lo, hi) = body.bounding_box();
    let scale = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max);
    let margin = tol::INTERIOR * scale;
    if ![mean, body.centroid()].iter().any(|x| fba.slack(x) > margin) {
        return Err(Error::EmptyFloatingBody);
    }
    Ok(fba)
}

/// Barycenters `b_k` of the cutting sections; they lie on `∂D_δ`.
pub fn boundary_points(body: &Body, delta: f64, directions: &[Direction]) -> Result<Vec<Point>> {
    Ok(cuts_and_barycenters(body, delta, directions)?.1)
}

impl FloatingBodyApprox {
    pub fn dim(&self) -> usize {
        self.body.dim()
    }

    /// `min_k (r_k - x · v_k)`.
    pub fn slack(&self, x: &Point) -> f64 {
        self.cuts
            .iter()
            .map(|c| c.offset - x.dot(c.direction.as_point()))
            .fold(f64::INFINITY, f64::min)
    }

    /// `x · v_k < r_k` for every cut.
    pub fn member(&self, x: &Point) -> bool {
        x.len() == self.dim()
            && self
                .cuts
                .iter()
                .all(|c| x.dot(c.direction.as_point()) < c.offset)
    }
}

/// `min(xy, (1-x)y, x(1-y), (1-x)(1-y)) > δ/2` on the unit square.
pub fn reference_member_square(x: &Point, delta: f64) -> bool {
    let (a, b) = (x[0], x[1]);
    let m = (a * b)
        .min((1.0 - a) * b)
        .min(a * (1.0 - b))
        .min((1.0 - a) * (1.0 - b));
    a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0 && m > 0.5 * delta
}

/// `min(xy, (1-x-y)y, (1-x-y)x) > δ/2` on the triangle `conv{0, e_1, e_2}`.
pub fn reference_member_triangle(x: &Point, delta: f64) -> bool {
    let (a, b) = (x[0], x[1]);
    let c = 1.0 - a - b;
    a > 0.0 && b > 0.0 && c > 0.0 && (a * b).min(c * b).min(c * a) > 0.5 * delta
}

/// Floating body of the triangle scaled by `s`, `(sT)_δ = s·T_{δ/s²}`.
pub fn reference_member_scaled_triangle(x: &Point, delta: f64, s: f64) -> bool {
    reference_member_triangle(&(x / s), delta / (s * s))
}

/// Largest `ρ ∈ [0, ρ_max]` with `inside(center + ρd)`, by bisection to `tol::RADIAL`.
pub fn boundary_radius<F: Fn(&Point) -> bool>(inside: F, center: &Point, d: &Point, rho_max: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, rho_max);
    if inside(&(center + d * hi)) {
        return hi;
    }
    while hi - lo > tol::RADIAL {
        let mid = 0.5 * (lo + hi);
        if inside(&(center + d * mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `max_rays |ρ_a - ρ_b|` for two star-shaped subsets of `body` about `center`.
pub fn radial_gap_between<A, B>(body: &Body, a: A, b: B, center: &Point, rays: &[Direction]) -> Result<f64>
where
    A: Fn(&Point) -> bool + Sync,
    B: Fn(&Point) -> bool + Sync,
{
    let ia = |x: &Point| body.contains(x) && a(x);
    let ib = |x: &Point| body.contains(x) && b(x);
    if !ia(center) || !ib(center) {
        return Err(Error::CenterNotInterior);
    }
    Ok(rays
        .par_iter()
        .map(|d| {
            let d = d.as_point();
            let rho_max = body.ray_exit(center, d);
            (boundary_radius(ia, center, d, rho_max) - boundary_radius(ib, center, d, rho_max)).abs()
        })
        .reduce(|| 0.0, f64::max))
}

/// Radial gap between the model and a reference membership predicate.
pub fn radial_gap<R>(fba: &FloatingBodyApprox, reference: R, center: &Point, rays: &[Direction]) -> Result<f64>
where
    R: Fn(&Point) -> bool + Sync,
{
    radial_gap_between(&fba.body, |x| fba.member(x), reference, center, rays)
}

/// Monte Carlo estimate of `vol(D ∖ D_δ)` using the model's membership.
pub fn wet_volume(fba: &FloatingBodyApprox, samples: u64, seed: u64) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    Ok(mc_box_mean(&fba.body, samples, seed, |x| {
        if fba.member(x) {
            0.0
        } else {
            1.0
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Matrix;

    fn p(c: &[f64]) -> Point {
        Point::from_vec(c.to_vec())
    }

    #[test]
    fn grids() {
        let g = uniform_directions(4);
        assert!((g[1].as_point() - p(&[0.0, 1.0])).norm() < 1e-15);
        let f = fibonacci_directions(2000);
        let mean = f.iter().fold(Point::zeros(3), |a, d| a + d.as_point()) / 2000.0;
        assert!(mean.norm() < 1e-3);
        assert_eq!(direction_grid(1, 5).unwrap().len(), 2);
        assert!(direction_grid(4, 5).is_err());
        assert_eq!(default_directions(2).unwrap().len(), 720);
    }

    #[test]
    fn single_cut_square() {
        let up = Direction::from_slice(&[0.0, 1.0]).unwrap();
        let fba = build(&Body::unit_square(), 0.25, &[up]).unwrap();
        assert!((fba.cuts[0].offset - 0.75).abs() < 1e-14);
        assert!((&fba.barycenters[0] - p(&[0.5, 0.75])).norm() < 1e-14);
    }

    #[test]
    fn disk_half_volume_is_empty() {
        let disk = Body::unit_ball(2);
        assert_eq!(
            build(&disk, PI / 2.0, &uniform_directions(36)),
            Err(Error::EmptyFloatingBody)
        );
        let up = Direction::from_slice(&[0.0, 1.0]).unwrap();
        let b = boundary_points(&disk, PI / 2.0, &[up]).unwrap();
        assert!(b[0].norm() < 1e-14);
        assert!(build(&disk, 2.0, &uniform_directions(4)).is_err());
    }

    #[test]
    fn square_membership_examples() {
        let fba = build(&Body::unit_square(), 0.02, &uniform_directions(720)).unwrap();
        assert!(fba.member(&p(&[0.5, 0.5])));
        assert!(!fba.member(&p(&[0.001, 0.001])));
        for b in &fba.barycenters {
            assert!(!fba.member(b));
        }
        assert!(reference_member_square(&p(&[0.5, 0.5]), 0.02));
        assert!(!reference_member_square(&p(&[0.09, 0.1]), 0.02));
        assert!(reference_member_square(&p(&[0.1, 0.1]), 1e-6));
        assert!(reference_member_triangle(&p(&[1.0 / 3.0, 1.0 / 3.0]), 0.02));
        assert!(!reference_member_triangle(&p(&[0.05, 0.05]), 0.02));
        assert_eq!(
            reference_member_scaled_triangle(&p(&[0.5, 0.3]), 0.08, 2.0),
            reference_member_triangle(&p(&[0.25, 0.15]), 0.02)
        );
    }

    #[test]
    fn square_barycenters_lie_on_the_hyperbolas() {
        let delta = 0.02;
        let pts = boundary_points(&Body::unit_square(), delta, &uniform_directions(720)).unwrap();
        for b in &pts {
            let (x, y) = (b[0], b[1]);
            let m = (x * y).min((1.0 - x) * y).min(x * (1.0 - y)).min((1.0 - x) * (1.0 - y));
            assert!((m - 0.5 * delta).abs() < 1e-6, "{b:?}");
        }
    }

    #[test]
    fn radial_gap_shrinks_with_more_directions() {
        let sq = Body::unit_square();
        let c = p(&[0.5, 0.5]);
        let rays = uniform_directions(90);
        let reference = |x: &Point| reference_member_square(x, 0.02);
        let fine = build(&sq, 0.02, &uniform_directions(720)).unwrap();
        let coarse = build(&sq, 0.02, &uniform_directions(8)).unwrap();
        let gf = radial_gap(&fine, reference, &c, &rays).unwrap();
        let gc = radial_gap(&coarse, reference, &c, &rays).unwrap();
        assert!(gf <= 2e-3, "{gf}");
        assert!(gc > gf);
        assert_eq!(radial_gap(&fine, |x| fine.member(x), &c, &rays).unwrap(), 0.0);
        assert_eq!(
            radial_gap(&fine, reference, &p(&[0.001, 0.5]), &rays),
            Err(Error::CenterNotInterior)
        );
    }

    #[test]
    fn wet_volume_of_the_square() {
        let delta = 0.02;
        let fba = build(&Body::unit_square(), delta, &uniform_directions(720)).unwrap();
        let est = wet_volume(&fba, 400_000, 5).unwrap();
        // Midpoint grid on the closed-form complement.
        let n = 2000;
        let h = 1.0 / n as f64;
        let mut outside = 0usize;
        for i in 0..n {
            for j in 0..n {
                let x = p(&[(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]);
                if !reference_member_square(&x, delta) {
                    outside += 1;
                }
            }
        }
        let want = outside as f64 * h * h;
        assert!(est.brackets(want, 3.0), "{est:?} vs {want}");
        let small = build(&Body::unit_square(), 1e-6, &uniform_directions(720)).unwrap();
        assert!(wet_volume(&small, 100_000, 5).unwrap().value < 1e-3);
    }

    #[test]
    fn disk_wet_volume_grows_with_delta() {
        let disk = Body::unit_ball(2);
        let dirs = uniform_directions(360);
        let mut last = 0.0;
        for delta in [0.005, 0.02, 0.1] {
            let fba = build(&disk, delta, &dirs).unwrap();
            let w = wet_volume(&fba, 200_000, 9).unwrap().value;
            assert!(w > last);
            last = w;
        }
    }

    #[test]
    fn shear_equivariance() {
        let sq = Body::unit_square();
        let a = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        let b = p(&[0.0, 0.0]);
        let image = sq.affine_image(&a, &b).unwrap();
        let delta = 0.02;
        let dirs = uniform_directions(720);
        let ainv_t = a.clone().try_inverse().unwrap().transpose();
        let mapped: Vec<Direction> = dirs
            .iter()
            .map(|d| Direction::new(&ainv_t * d.as_point()).unwrap())
            .collect();
        let f = build(&sq, delta, &dirs).unwrap();
        let g = build(&image, delta * a.determinant().abs(), &mapped).unwrap();
        let ainv = a.clone().try_inverse().unwrap();
        let c = &a * p(&[0.5, 0.5]);
        let gap = radial_gap_between(
            &image,
            |y| g.member(y),
            |y| f.member(&(&ainv * y)),
            &c,
            &uniform_directions(120),
        )
        .unwrap();
        assert!(gap < 1e-6, "{gap}");
    }
}
