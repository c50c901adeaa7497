//! Minimum-volume enclosing ellipsoids and their John shrinkings.

use crate::body::{Body, Ellipsoid};
use crate::error::{Error, Result};
use crate::tol;
use crate::{Matrix, Point};

const MAX_ITER: usize = 200_000;

/// Löwner–John ellipsoid of a point cloud by the Khachiyan iteration with
/// Todd–Yıldırım away steps, stopped at duality gap `tol::MVEE_GAP` and then
/// scaled to contain every point.
pub fn mvee(points: &[Point]) -> Result<Body> {
    let m = points.len();
    let n = points.first().map(|p| p.len()).ok_or(Error::DegenerateBody)?;
    if m < n + 1 || points.iter().any(|p| p.len() != n) {
        return Err(Error::DegenerateBody);
    }
    let mean = points.iter().fold(Point::zeros(n), |a, p| a + p) / m as f64;
    let centered = Matrix::from_fn(n, m, |i, j| points[j][i] - mean[i]);
    let scale = centered.amax();
    let sv = centered.singular_values();
    if !(scale > 0.0) || sv.iter().any(|&s| s <= 1e-12 * scale * (m as f64).sqrt()) {
        return Err(Error::DegenerateBody);
    }
    // Lifted points q_i = (p_i, 1).
    let q: Vec<Point> = points
        .iter()
        .map(|p| Point::from_iterator(n + 1, p.iter().cloned().chain([1.0])))
        .collect();
    let d = (n + 1) as f64;
    let mut u = vec![1.0 / m as f64; m];
    let mut g = vec![0.0; m];
    for _ in 0..MAX_ITER {
        let mut x = Matrix::zeros(n + 1, n + 1);
        for (qi, ui) in q.iter().zip(&u) {
            x.ger(*ui, qi, qi, 1.0);
        }
        let chol = x.cholesky().ok_or(Error::DegenerateBody)?;
        for (gi, qi) in g.iter_mut().zip(&q) {
            *gi = qi.dot(&chol.solve(qi));
        }
        let (j, &kappa) = g
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        let (k, &lambda) = g
            .iter()
            .enumerate()
            .filter(|(i, _)| u[*i] > 0.0)
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("positive weight");
        if kappa <= d * (1.0 + tol::MVEE_GAP) && lambda >= d * (1.0 - tol::MVEE_GAP) {
            break;
        }
        if kappa - d >= d - lambda {
            let beta = (kappa - d) / (d * (kappa - 1.0));
            for ui in u.iter_mut() {
                *ui *= 1.0 - beta;
            }
            u[j] += beta;
        } else {
            // Away step, clipped so the weight stays nonnegative.
            let beta = ((d - lambda) / (d * (lambda - 1.0))).min(u[k] / (1.0 - u[k]));
            for ui in u.iter_mut() {
                *ui *= 1.0 + beta;
            }
            u[k] -= beta;
            u[k] = u[k].max(0.0);
        }
    }
    let center = points
        .iter()
        .zip(&u)
        .fold(Point::zeros(n), |a, (p, w)| a + p * *w);
    let mut s = Matrix::zeros(n, n);
    for (p, w) in points.iter().zip(&u) {
        let r = p - &center;
        s.ger(*w, &r, &r, 1.0);
    }
    // E = {x : (x-c)ᵀ (nS)⁻¹ (x-c) ≤ 1}, enlarged to contain every point.
    let metric = (&s * n as f64).try_inverse().ok_or(Error::DegenerateBody)?;
    let gamma = points
        .iter()
        .map(|p| {
            let r = p - &center;
            r.dot(&(&metric * &r))
        })
        .fold(1.0_f64, f64::max);
    let cov = &s * (n as f64 * gamma);
    let shape = cov.cholesky().ok_or(Error::DegenerateBody)?.l();
    Ok(Body::Ellipsoid(Ellipsoid::new(center, shape)?))
}

/// `c + (1/n) A(𝔹ⁿ)` for the ellipsoid `c + A(𝔹ⁿ)`.
pub fn john_inner(e: &Body, n: usize) -> Result<Body> {
    match e {
        Body::Ellipsoid(el) => {
            if n == 0 {
                return Err(Error::InvalidArgument("dimension must be positive".into()));
            }
            Ok(Body::Ellipsoid(Ellipsoid::new(
                el.center.clone(),
                &el.shape / n as f64,
            )?))
        }
        other => Err(Error::WrongVariant {
            expected: "ellipsoid",
            got: other.kind(),
        }),
    }
}
