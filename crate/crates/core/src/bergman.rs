//! Bergman kernel of the tube `ℝⁿ + iD` on the diagonal,
//! `K_D(x) = (2π)^{-n} ∫ e^{-2x·t} / J_D(t) dt`.
//!
//! The integral is taken in polar coordinates `t = ρω` after translating `x`
//! to the origin. Along a ray the integrand decays like `e^{-2ρ g(ω)}`, where
//! `g(ω)` is the gap from `x` to the supporting hyperplane with outward normal
//! `-ω`, so the radial variable is rescaled to `s = 2ρ g(ω)` and truncated at
//! a length fixed by the truncation tolerance.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::body::{ball_volume, factorial, Body, Direction, Ellipsoid};
use crate::error::{Error, Result};
use crate::laplace::{
    log_ball_laplace, log_exp_divided_difference, log_interval_laplace, log_sphere_moment,
};
use crate::polytope::{clip_polygon, polygon_area, Polytope};
use crate::quadrature::{integrate, GaussLegendre, Integral, QuadratureConfig};
use crate::tol;
use crate::{Matrix, Point};

/// A kernel evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelValue {
    pub point: Point,
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    /// Truncation radius in `t`.
    pub radius: f64,
}

#[derive(Debug, Clone, Copy)]
struct Estimate {
    value: f64,
    error: f64,
    converged: bool,
}

impl Estimate {
    fn product(self, other: Estimate) -> Estimate {
        let value = self.value * other.value;
        Estimate {
            value,
            error: self.error * other.value.abs() + other.error * self.value.abs(),
            converged: self.converged && other.converged,
        }
    }
}

/// Rescaled radial length `S` solving `S = ln(1/ε) + 2n ln S`.
fn truncation_length(n: usize, trunc_tol: f64) -> f64 {
    let base = (1.0 / trunc_tol).ln();
    let mut s = base;
    for _ in 0..30 {
        s = base + 2.0 * n as f64 * s.ln();
    }
    s
}

struct Radial<'a> {
    n: usize,
    breaks: Vec<f64>,
    rule: &'a GaussLegendre,
    depth: u32,
}

impl<'a> Radial<'a> {
    fn new(n: usize, cfg: &QuadratureConfig, rule: &'a GaussLegendre) -> Self {
        let s_max = truncation_length(n, cfg.trunc_tol);
        let mut breaks: Vec<f64> = [0.0, 3.0, 10.0, 24.0]
            .into_iter()
            .filter(|&b| b < s_max)
            .collect();
        breaks.push(s_max);
        Self {
            n,
            breaks,
            rule,
            depth: cfg.max_subdivisions,
        }
    }

    /// `∫_0^S s^{n-1} exp(log_ratio(s)) ds`.
    fn integrate<F: FnMut(f64) -> f64>(&self, mut log_ratio: F, rel_tol: f64) -> Integral {
        let p = (self.n - 1) as i32;
        integrate(
            |s: f64| s.powi(p) * log_ratio(s).exp(),
            &self.breaks,
            rel_tol,
            0.0,
            self.rule,
            self.depth,
        )
    }
}

type Vec3 = [f64; 3];

fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn rel(p: &Point, x: &Point) -> Vec3 {
    let mut a = [0.0; 3];
    for i in 0..p.len() {
        a[i] = p[i] - x[i];
    }
    a
}

/// Fan triangulation of a polytope translated by `-x`, for fast `ln J`.
struct Fan {
    n: usize,
    vertices: Vec<Vec3>,
    simplices: Vec<([Vec3; 4], f64)>,
}

impl Fan {
    fn new(p: &Polytope, x: &Point) -> Self {
        let n = p.dim();
        let vertices = p.vertices().iter().map(|v| rel(v, x)).collect();
        let simplices = p
            .fan_simplices()
            .iter()
            .map(|s| {
                let mut m = Matrix::zeros(n, n);
                for j in 0..n {
                    m.set_column(j, &(&s[j + 1] - &s[0]));
                }
                let mut vs = [[0.0; 3]; 4];
                for (k, v) in s.iter().enumerate() {
                    vs[k] = rel(v, x);
                }
                (vs, m.determinant().abs().ln())
            })
            .collect();
        Self {
            n,
            vertices,
            simplices,
        }
    }

    fn gap(&self, w: &Vec3) -> f64 {
        self.vertices
            .iter()
            .map(|v| -dot3(v, w))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn log_j(&self, t: &Vec3) -> f64 {
        let mut u = [0.0; 4];
        let (mut m, mut acc) = (f64::NEG_INFINITY, 0.0);
        for (vs, lw) in &self.simplices {
            for k in 0..=self.n {
                u[k] = -2.0 * dot3(&vs[k], t);
            }
            let term = lw + log_exp_divided_difference(&u[..=self.n]);
            if term > m {
                acc = acc * (m - term).exp() + 1.0;
                m = term;
            } else {
                acc += (term - m).exp();
            }
        }
        m + acc.ln()
    }
}

/// Ray integral `(2g)^{-n} ∫ s^{n-1} / J_x(sω/2g) ds` for a translated body.
fn ray_integral<G, J>(radial: &Radial, w: &Vec3, gap: &G, log_j: &J, rel_tol: f64) -> Integral
where
    G: Fn(&Vec3) -> f64,
    J: Fn(&Vec3) -> f64,
{
    let g = gap(w);
    let c = 1.0 / (2.0 * g);
    let mut r = radial.integrate(|s| -log_j(&[w[0] * s * c, w[1] * s * c, w[2] * s * c]), rel_tol);
    let scale = c.powi(radial.n as i32);
    r.value *= scale;
    r.error *= scale;
    r
}

fn angle_breaks(angles: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut cuts: Vec<f64> = angles
        .map(|a| a.rem_euclid(2.0 * PI))
        .chain([0.0, 2.0 * PI])
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut out = vec![cuts[0]];
    for w in cuts.windows(2) {
        let k = ((w[1] - w[0]) / (PI / 4.0)).ceil().max(1.0) as usize;
        for j in 1..=k {
            out.push(w[0] + (w[1] - w[0]) * j as f64 / k as f64);
        }
    }
    out
}

/// `(2π)^{-2} ∫_0^{2π} R(φ) dφ` over the circle of directions.
fn polar_2d<G, J>(
    radial: &Radial,
    gap: G,
    log_j: J,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Estimate
where
    G: Fn(&Vec3) -> f64,
    J: Fn(&Vec3) -> f64,
{
    let inner_tol = 0.1 * cfg.rel_tol;
    let mut inner_ok = true;
    let outer = integrate(
        |phi: f64| {
            let w = [phi.cos(), phi.sin(), 0.0];
            let r = ray_integral(radial, &w, &gap, &log_j, inner_tol);
            inner_ok &= r.converged;
            r.value
        },
        breaks,
        cfg.rel_tol,
        0.0,
        radial.rule,
        cfg.max_subdivisions,
    );
    let norm = (2.0 * PI).powi(-2);
    Estimate {
        value: outer.value * norm,
        error: (outer.error + inner_tol * outer.value) * norm,
        converged: outer.converged && inner_ok,
    }
}

/// `(2π)^{-3} ∫_{-1}^{1} ∫_0^{2π} R(ω(z, φ)) dφ dz` over the sphere.
fn polar_3d<G, J>(
    radial: &Radial,
    gap: G,
    log_j: J,
    z_breaks: &[f64],
    phi_breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Estimate
where
    G: Fn(&Vec3) -> f64,
    J: Fn(&Vec3) -> f64,
{
    let (mid_tol, inner_tol) = (0.1 * cfg.rel_tol, 0.01 * cfg.rel_tol);
    let mut ok = true;
    let outer = integrate(
        |z: f64| {
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let mid = integrate(
                |phi: f64| {
                    let w = [rho * phi.cos(), rho * phi.sin(), z];
                    let r = ray_integral(radial, &w, &gap, &log_j, inner_tol);
                    ok &= r.converged;
                    r.value
                },
                phi_breaks,
                mid_tol,
                0.0,
                radial.rule,
                cfg.max_subdivisions,
            );
            ok &= mid.converged;
            mid.value
        },
        z_breaks,
        cfg.rel_tol,
        0.0,
        radial.rule,
        cfg.max_subdivisions,
    );
    let norm = (2.0 * PI).powi(-3);
    Estimate {
        value: outer.value * norm,
        error: (outer.error + mid_tol * outer.value) * norm,
        converged: outer.converged && ok,
    }
}

fn interval_kernel(lo: f64, hi: f64, y: f64, radial: &Radial, rel_tol: f64) -> Estimate {
    let (a, b) = (lo - y, hi - y);
    let mut total = Estimate {
        value: 0.0,
        error: 0.0,
        converged: true,
    };
    for (sign, g) in [(1.0, -a), (-1.0, b)] {
        let c = sign / (2.0 * g);
        let r = radial.integrate(|s| -log_interval_laplace(a, b, s * c), rel_tol);
        total.value += r.value / (2.0 * g);
        total.error += r.error / (2.0 * g);
        total.converged &= r.converged;
    }
    total.value /= 2.0 * PI;
    total.error /= 2.0 * PI;
    total
}

/// `ln Ψ_n(q) = ln ∫_{S^{n-1}} e^{2q ω_1} dσ(ω)` for `n ≥ 2`.
fn log_sphere_exponential(n: usize, q: f64) -> f64 {
    ((n - 1) as f64 * ball_volume(n - 1)).ln() + log_sphere_moment(n - 2, q)
}

/// Unit-ball kernel at radius `r`, then `K_E(x) = K_B(u) / |det A|²`.
fn ellipsoid_kernel(e: &Ellipsoid, x: &Point, radial: &Radial, rel_tol: f64) -> Estimate {
    let n = e.center.len();
    let r = e.to_ball(x).norm();
    let h = 1.0 - r;
    let res = radial.integrate(
        |s| {
            let rho = s / (2.0 * h);
            log_sphere_exponential(n, rho * r) - log_ball_laplace(n, rho)
        },
        rel_tol,
    );
    let det = e.shape.determinant().abs();
    let scale = (2.0 * PI).powi(-(n as i32)) * (2.0 * h).powi(-(n as i32)) / (det * det);
    Estimate {
        value: res.value * scale,
        error: res.error * scale,
        converged: res.converged,
    }
}

fn polytope_kernel(p: &Polytope, x: &Point, radial: &Radial, cfg: &QuadratureConfig) -> Estimate {
    let fan = Fan::new(p, x);
    let gap = |w: &Vec3| fan.gap(w);
    let log_j = |t: &Vec3| fan.log_j(t);
    match p.dim() {
        2 => {
            let breaks = angle_breaks(p.facets().iter().map(|h| (-h.normal[1]).atan2(-h.normal[0])));
            polar_2d(radial, gap, log_j, &breaks, cfg)
        }
        _ => {
            let mut z: Vec<f64> = p
                .facets()
                .iter()
                .map(|h| -h.normal[2])
                .chain([-1.0, 1.0])
                .collect();
            z.sort_by(f64::total_cmp);
            z.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
            let phi = angle_breaks(
                p.facets()
                    .iter()
                    .filter(|h| h.normal[2].abs() < 1.0 - 1e-12)
                    .map(|h| (-h.normal[1]).atan2(-h.normal[0])),
            );
            polar_3d(radial, gap, log_j, &z, &phi, cfg)
        }
    }
}

// Relative rounding floor of a reported error estimate.
const ROUNDOFF: f64 = 64.0 * f64::EPSILON;

/// `K_D(x)` with relative error at most `cfg.rel_tol`.
pub fn kernel(body: &Body, x: &Point, cfg: &QuadratureConfig) -> Result<KernelValue> {
    cfg.validate()?;
    let n = body.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    if !body.contains(x) {
        return Err(Error::PointOutsideBody);
    }
    let rule = GaussLegendre::new(cfg.base_nodes);
    let radial1 = Radial::new(1, cfg, &rule);
    let est = match body {
        Body::Box(b) => (0..n)
            .map(|i| interval_kernel(b.lo[i], b.hi[i], x[i], &radial1, cfg.rel_tol / n as f64))
            .reduce(Estimate::product)
            .expect("nonempty box"),
        _ if n == 1 => {
            let (lo, hi) = body.bounding_box();
            interval_kernel(lo[0], hi[0], x[0], &radial1, cfg.rel_tol)
        }
        _ if n > 3 => return Err(Error::UnsupportedDimension(n)),
        Body::Ellipsoid(e) => ellipsoid_kernel(e, x, &Radial::new(n, cfg, &rule), cfg.rel_tol),
        _ => {
            let p = body.to_polytope().ok_or(Error::DegenerateBody)?;
            polytope_kernel(&p, x, &Radial::new(n, cfg, &rule), cfg)
        }
    };
    let radius = truncation_length(n, cfg.trunc_tol) / (2.0 * body.boundary_gap(x));
    if !est.converged || !est.value.is_finite() || est.value <= 0.0 {
        return Err(Error::QuadratureNotConverged {
            value: est.value,
            achieved: est.error / est.value.abs(),
            requested: cfg.rel_tol,
        });
    }
    Ok(KernelValue {
        point: x.clone(),
        value: est.value,
        error: est.error.max(ROUNDOFF * est.value),
        radius,
    })
}

/// Kernel through the generic polar route using only `ln J` of the body;
/// used to cross-check the specialised routes.
pub fn kernel_polar(body: &Body, x: &Point, cfg: &QuadratureConfig) -> Result<KernelValue> {
    cfg.validate()?;
    let n = body.dim();
    if !(2..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    if !body.contains(x) {
        return Err(Error::PointOutsideBody);
    }
    let rule = GaussLegendre::new(cfg.base_nodes);
    let radial = Radial::new(n, cfg, &rule);
    let to_point = |w: &Vec3| Point::from_iterator(n, w.iter().take(n).cloned());
    let gap = |w: &Vec3| {
        let p = to_point(w);
        body.support(&-&p) + x.dot(&p)
    };
    let log_j = |t: &Vec3| {
        let p = to_point(t);
        crate::laplace::log_laplace(body, &p) + 2.0 * x.dot(&p)
    };
    let uniform: Vec<f64> = (0..=8).map(|k| k as f64 * PI / 4.0).collect();
    let est = if n == 2 {
        polar_2d(&radial, gap, log_j, &uniform, cfg)
    } else {
        let z: Vec<f64> = (0..=4).map(|k| -1.0 + 0.5 * k as f64).collect();
        polar_3d(&radial, gap, log_j, &z, &uniform, cfg)
    };
    if !est.converged {
        return Err(Error::QuadratureNotConverged {
            value: est.value,
            achieved: est.error / est.value,
            requested: cfg.rel_tol,
        });
    }
    Ok(KernelValue {
        point: x.clone(),
        value: est.value,
        error: est.error.max(ROUNDOFF * est.value),
        radius: truncation_length(n, cfg.trunc_tol) / (2.0 * body.boundary_gap(x)),
    })
}

/// Interval kernel `π/(4L²) csc²(π(y - lo)/L)`.
pub fn interval_kernel_reference(lo: f64, hi: f64, y: f64) -> f64 {
    let len = hi - lo;
    let s = (PI * (y - lo) / len).sin();
    PI / (4.0 * len * len * s * s)
}

/// `π²/16 csc²(πx) csc²(πy)` on the unit square.
pub fn kernel_square_reference(x: &Point) -> Result<f64> {
    if !Body::unit_square().contains(x) {
        return Err(Error::PointOutsideBody);
    }
    Ok(interval_kernel_reference(0.0, 1.0, x[0]) * interval_kernel_reference(0.0, 1.0, x[1]))
}

/// Certified bracket `lower ≤ K_D(x) ≤ upper` from closed forms only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelBounds {
    pub lower: f64,
    pub upper: f64,
}

fn ball_center_kernel(n: usize) -> f64 {
    static CACHE: [OnceLock<f64>; 4] = [const { OnceLock::new() }; 4];
    *CACHE[n].get_or_init(|| {
        let cfg = QuadratureConfig::default().with_rel_tol(1e-12);
        let ball = Body::unit_ball(n);
        kernel(&ball, &Point::zeros(n), &cfg)
            .expect("ball kernel at the center")
            .value
    })
}

/// Orthonormal frame (as rows) whose first row is `v`.
fn frame_from(v: &Point) -> Matrix {
    let n = v.len();
    let mut rows = vec![v.normalize()];
    for k in 0..n {
        if rows.len() == n {
            break;
        }
        let mut e = Point::zeros(n);
        e[k] = 1.0;
        for r in &rows {
            e -= r * r.dot(&e);
        }
        if e.norm() > 1e-6 {
            rows.push(e.normalize());
        }
    }
    Matrix::from_fn(n, n, |i, j| rows[i][j])
}

fn frame_box_kernel(body: &Body, x: &Point, frame: &Matrix) -> f64 {
    (0..frame.nrows())
        .map(|i| {
            let q: Point = frame.row(i).transpose();
            let hi = body.support(&q);
            let lo = -body.support(&-&q);
            interval_kernel_reference(lo, hi, q.dot(x))
        })
        .product()
}

/// Nazarov bound on the symmetrised polygon `(D - x) ∩ (x - D)`.
fn nazarov_polygon_bound(p: &Polytope, x: &Point) -> Option<f64> {
    let mut poly: Vec<Point> = p.vertices().iter().map(|v| v - x).collect();
    for h in p.facets() {
        let slack = h.offset - h.normal.dot(x);
        poly = clip_polygon(&poly, &h.normal, -slack).0;
        if poly.len() < 3 {
            return None;
        }
    }
    let area = polygon_area(&poly);
    let sym = Polytope::from_vertices(&poly).ok()?;
    let dual: Vec<Point> = sym.facets().iter().map(|h| &h.normal / h.offset).collect();
    let dual_area = Polytope::from_vertices(&dual).ok()?.volume();
    Some(2.0 * dual_area / (PI * PI * area))
}

/// Closed-form bracket of `K_D(x)`: circumscribed boxes from below (monotonicity)
/// and inscribed centred bodies from above.
pub fn kernel_bounds(body: &Body, x: &Point) -> Result<KernelBounds> {
    let n = body.dim();
    if !body.contains(x) {
        return Err(Error::PointOutsideBody);
    }
    if let Body::Box(b) = body {
        let k: f64 = (0..n)
            .map(|i| interval_kernel_reference(b.lo[i], b.hi[i], x[i]))
            .product();
        return Ok(KernelBounds { lower: k, upper: k });
    }
    if n == 1 {
        let (lo, hi) = body.bounding_box();
        let k = interval_kernel_reference(lo[0], hi[0], x[0]);
        return Ok(KernelBounds { lower: k, upper: k });
    }
    if n > 3 {
        return Err(Error::UnsupportedDimension(n));
    }
    let mut frames = vec![Matrix::identity(n, n)];
    let mut upper = f64::INFINITY;
    match body {
        Body::Ellipsoid(e) => {
            let svd = e.shape.clone().svd(true, false);
            frames.push(svd.u.expect("left singular vectors").transpose());
            let r = e.to_ball(x).norm();
            let det = e.shape.determinant().abs();
            upper = ball_center_kernel(n) / ((1.0 - r).powi(2 * n as i32) * det * det);
        }
        _ => {
            let p = body.to_polytope().ok_or(Error::DegenerateBody)?;
            for h in p.facets() {
                frames.push(frame_from(&h.normal));
            }
            let d = p.min_slack(x);
            upper = upper.min(ball_center_kernel(n) / d.powi(2 * n as i32));
            if n == 2 {
                if let Some(b) = nazarov_polygon_bound(&p, x) {
                    upper = upper.min(b);
                }
            }
        }
    }
    let lower = frames
        .iter()
        .map(|f| frame_box_kernel(body, x, f))
        .fold(0.0, f64::max);
    Ok(KernelBounds {
        lower: lower * (1.0 - 1e-12),
        upper: upper * (1.0 + 1e-9),
    })
}

/// `x ∈ D^M`, i.e. `K_D(x) < M`; boundary points and exterior points are not members.
pub fn sublevel_member(body: &Body, x: &Point, m: f64, cfg: &QuadratureConfig) -> Result<bool> {
    if !(m > 0.0) {
        return Err(Error::InvalidArgument(format!("level must be positive, got {m}")));
    }
    if !body.contains(x) {
        return Ok(false);
    }
    let kv = kernel(body, x, cfg)?;
    if (kv.value - m).abs() <= kv.error {
        return Err(Error::IndeterminateAtTolerance {
            value: kv.value,
            error: kv.error,
            threshold: m,
        });
    }
    Ok(kv.value < m)
}

fn golden<F: FnMut(f64) -> Result<f64>>(mut f: F, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol::KERNEL_MIN_STEP {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

const MAX_SWEEPS: usize = 40;

/// Minimiser of `K_D` by coordinate-wise golden-section search on `ln K`,
/// each sweep followed by a search along the sweep's net displacement.
pub fn kernel_min(body: &Body, cfg: &QuadratureConfig) -> Result<(Point, f64)> {
    let n = body.dim();
    let log_k = |p: &Point| kernel(body, p, cfg).map(|k| k.value.ln());
    let mut x = body.centroid();
    let mut fx = log_k(&x)?;
    let (lo, hi) = body.bounding_box();
    let scale = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max);
    let mut reach = scale;
    let line = |x: &mut Point, fx: &mut f64, d: &Point, reach: f64| -> Result<()> {
        let t_hi = (0.98 * body.ray_exit(x, d)).min(reach);
        let t_lo = -(0.98 * body.ray_exit(x, &-d)).min(reach);
        let base = x.clone();
        let (t, ft) = golden(|t| log_k(&(&base + d * t)), t_lo, t_hi)?;
        if ft < *fx {
            *x = &base + d * t;
            *fx = ft;
        }
        Ok(())
    };
    for _ in 0..MAX_SWEEPS {
        let start = x.clone();
        let f_start = fx;
        for i in 0..n {
            let mut e = Point::zeros(n);
            e[i] = 1.0;
            line(&mut x, &mut fx, &e, reach)?;
        }
        let disp = &x - &start;
        if n > 1 && disp.norm() > 0.0 {
            line(&mut x, &mut fx, &disp.normalize(), reach)?;
        }
        let moved = (&x - &start).norm();
        if moved < tol::KERNEL_MIN_STEP || f_start - fx <= cfg.rel_tol {
            break;
        }
        reach = (8.0 * moved).max(1e-6 * scale);
    }
    Ok((x, fx.exp()))
}

/// Boundary of `{K_D < M}` along rays from the kernel minimiser.
pub fn sublevel_boundary(
    body: &Body,
    m: f64,
    rays: &[Direction],
    cfg: &QuadratureConfig,
) -> Result<Vec<Point>> {
    let (c, k_min) = kernel_min(body, cfg)?;
    sublevel_boundary_from(body, &c, k_min, m, rays, cfg)
}

/// As [`sublevel_boundary`] with a known minimiser `c` and minimum `k_min`.
pub fn sublevel_boundary_from(
    body: &Body,
    c: &Point,
    k_min: f64,
    m: f64,
    rays: &[Direction],
    cfg: &QuadratureConfig,
) -> Result<Vec<Point>> {
    if !(m > k_min) {
        return Err(Error::MBelowMinimum {
            level: m,
            minimum: k_min,
        });
    }
    rays.par_iter()
        .map(|d| {
            let d = d.as_point();
            let exit = body.ray_exit(c, d);
            let k_at = |rho: f64| kernel(body, &(c + d * rho), cfg).map(|k| k.value);
            let (mut lo, mut hi) = (0.0, 0.5 * exit);
            while k_at(hi)? < m {
                lo = hi;
                hi = exit - 0.5 * (exit - hi);
                if exit - hi < tol::SUBLEVEL_RADIAL {
                    break;
                }
            }
            while hi - lo > tol::SUBLEVEL_RADIAL {
                let mid = 0.5 * (lo + hi);
                if k_at(mid)? < m {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(c + d * (0.5 * (lo + hi)))
        })
        .collect()
}

/// `n! / (4π)ⁿ`, the boundary constant of `dist^{n+1} K_D` for curvature one.
pub fn boundary_constant(n: usize) -> f64 {
    factorial(n) / (4.0 * PI).powi(n as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Point {
        Point::from_vec(c.to_vec())
    }

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn square_polytope() -> Body {
        Body::new_polytope(&[p(&[0.0, 0.0]), p(&[1.0, 0.0]), p(&[1.0, 1.0]), p(&[0.0, 1.0])]).unwrap()
    }

    #[test]
    fn truncation_length_solves_its_equation() {
        let s = truncation_length(2, 1e-14);
        assert!((s - (1e14f64.ln() + 4.0 * s.ln())).abs() < 1e-9);
        assert!(s > 40.0 && s < 60.0);
    }

    #[test]
    fn square_and_interval_references() {
        let k = kernel(&Body::unit_square(), &p(&[0.5, 0.5]), &cfg()).unwrap();
        assert!(((k.value - PI * PI / 16.0) / k.value).abs() < 1e-8);
        let k = kernel(&Body::unit_square(), &p(&[0.25, 0.5]), &cfg()).unwrap();
        assert!(((k.value - PI * PI / 8.0) / k.value).abs() < 1e-8);
        let unit = Body::new_box(vec![0.0], vec![1.0]).unwrap();
        let k = kernel(&unit, &p(&[0.5]), &cfg()).unwrap();
        assert!((k.value - PI / 4.0).abs() < 1e-8);
        for y in [0.01, 0.2, 0.77] {
            let k = kernel(&unit, &p(&[y]), &cfg()).unwrap();
            let want = interval_kernel_reference(0.0, 1.0, y);
            assert!(((k.value - want) / want).abs() < 1e-8);
            assert!(k.error >= 0.0);
        }
    }

    #[test]
    fn polar_route_reproduces_the_square() {
        let sq = square_polytope();
        for x in [[0.5, 0.5], [0.2, 0.7], [0.06, 0.5], [0.9, 0.1]] {
            let x = p(&x);
            let k = kernel(&sq, &x, &cfg()).unwrap();
            let want = kernel_square_reference(&x).unwrap();
            assert!(((k.value - want) / want).abs() < 1e-7, "{x:?}: {} vs {want}", k.value);
        }
    }

    #[test]
    fn disk_center_matches_bessel_integral() {
        // (1/2π) ∫_0^∞ ρ² / (π I₁(2ρ)) dρ, evaluated offline.
        let want = 0.067_156_195_375_136_70;
        let k = kernel(&Body::unit_ball(2), &p(&[0.0, 0.0]), &cfg()).unwrap();
        assert!(((k.value - want) / want).abs() < 1e-8, "{}", k.value);
        let generic = kernel_polar(&Body::unit_ball(2), &p(&[0.3, -0.4]), &cfg()).unwrap();
        let special = kernel(&Body::unit_ball(2), &p(&[0.3, -0.4]), &cfg()).unwrap();
        assert!(((generic.value - special.value) / special.value).abs() < 1e-7);
    }

    #[test]
    fn ellipse_transformation_law() {
        let e = Body::new_ellipsoid(p(&[1.0, 2.0]), Matrix::from_row_slice(2, 2, &[2.0, 0.5, 0.0, 1.0]))
            .unwrap();
        let x = p(&[1.5, 2.3]);
        let k = kernel(&e, &x, &cfg()).unwrap();
        let generic = kernel_polar(&e, &x, &cfg()).unwrap();
        assert!(((k.value - generic.value) / k.value).abs() < 1e-7);
    }

    #[test]
    fn triangle_symmetry_and_scaling() {
        let t = Body::unit_triangle();
        let a = kernel(&t, &p(&[0.2, 0.5]), &cfg()).unwrap();
        let b = kernel(&t, &p(&[0.5, 0.2]), &cfg()).unwrap();
        assert!(((a.value - b.value) / a.value).abs() < 2e-8);
        let big = t.affine_image(&(Matrix::identity(2, 2) * 2.0), &p(&[0.0, 0.0])).unwrap();
        let c = kernel(&big, &p(&[0.4, 1.0]), &cfg()).unwrap();
        assert!(((c.value * 16.0 - a.value) / a.value).abs() < 5e-8);
    }

    #[test]
    fn ball_3d_center() {
        // (2π)^{-3} 4π ∫ ρ² b³ / (4π (b cosh b - sinh b)) dρ with b = 2ρ.
        let loose = cfg().with_rel_tol(1e-9);
        let k = kernel(&Body::unit_ball(3), &p(&[0.0, 0.0, 0.0]), &loose).unwrap();
        let want = 0.033_192_852_807_061_52;
        assert!(((k.value - want) / want).abs() < 1e-8, "{}", k.value);
    }

    #[test]
    fn cube_through_the_polytope_route() {
        let cube = Body::new_box(vec![0.0; 3], vec![1.0; 3]).unwrap();
        let poly = Body::Polytope(cube.to_polytope().unwrap());
        let x = p(&[0.5, 0.4, 0.6]);
        let loose = cfg().with_rel_tol(1e-5);
        let k = kernel(&poly, &x, &loose).unwrap();
        let want = kernel(&cube, &x, &cfg()).unwrap().value;
        assert!(((k.value - want) / want).abs() < 1e-5, "{} vs {want}", k.value);
    }

    #[test]
    fn outside_points_are_rejected() {
        assert_eq!(
            kernel(&Body::unit_square(), &p(&[1.0, 0.5]), &cfg()),
            Err(Error::PointOutsideBody)
        );
        assert!(kernel_square_reference(&p(&[0.0, 0.5])).is_err());
    }

    #[test]
    fn bounds_bracket_the_kernel() {
        let pent = Body::new_polytope(&[
            p(&[0.0, 0.0]),
            p(&[2.0, 0.0]),
            p(&[2.5, 1.2]),
            p(&[1.0, 2.0]),
            p(&[-0.5, 1.0]),
        ])
        .unwrap();
        let bodies = [
            (Body::unit_triangle(), p(&[0.3, 0.2])),
            (Body::unit_triangle(), p(&[0.02, 0.5])),
            (Body::unit_ball(2), p(&[0.5, 0.5])),
            (pent, p(&[1.0, 1.0])),
            (square_polytope(), p(&[0.3, 0.6])),
        ];
        for (b, x) in &bodies {
            let bounds = kernel_bounds(b, x).unwrap();
            let k = kernel(b, x, &cfg()).unwrap().value;
            assert!(bounds.lower <= k && k <= bounds.upper, "{}: {bounds:?} {k}", b.kind());
            assert!(bounds.upper / bounds.lower < 100.0);
        }
        let exact = kernel_bounds(&Body::unit_square(), &p(&[0.5, 0.5])).unwrap();
        assert_eq!(exact.lower, exact.upper);
    }

    #[test]
    fn sublevel_membership() {
        let sq = Body::unit_square();
        let c = p(&[0.5, 0.5]);
        assert!(sublevel_member(&sq, &c, 1.0, &cfg()).unwrap());
        assert!(!sublevel_member(&sq, &c, 0.5, &cfg()).unwrap());
        assert!(!sublevel_member(&sq, &p(&[2.0, 0.5]), 1.0, &cfg()).unwrap());
        assert!(matches!(
            sublevel_member(&sq, &c, PI * PI / 16.0, &cfg()),
            Err(Error::IndeterminateAtTolerance { .. })
        ));
    }

    #[test]
    fn square_minimum_and_sublevel_curve() {
        let sq = Body::unit_square();
        let (x, k) = kernel_min(&sq, &cfg()).unwrap();
        assert!((&x - p(&[0.5, 0.5])).norm() < 1e-4);
        assert!(((k - PI * PI / 16.0) / k).abs() < 1e-8);
        let m = 2.0;
        let rays: Vec<Direction> = (0..8).map(|k| Direction::from_angle(k as f64 * PI / 4.0)).collect();
        let pts = sublevel_boundary(&sq, m, &rays, &cfg()).unwrap();
        for q in &pts {
            let want = kernel_square_reference(q).unwrap();
            assert!(((want - m) / m).abs() < 1e-6);
        }
        assert!(matches!(
            sublevel_boundary(&sq, 0.1, &rays, &cfg()),
            Err(Error::MBelowMinimum { .. })
        ));
    }

    #[test]
    fn triangle_minimum_is_the_centroid() {
        let loose = cfg().with_rel_tol(1e-7);
        let (x, _) = kernel_min(&Body::unit_triangle(), &loose).unwrap();
        assert!((&x - p(&[1.0 / 3.0, 1.0 / 3.0])).norm() < 2e-3, "{x:?}");
    }

    #[test]
    fn boundary_blow_up_along_a_ray() {
        // Toward the corner, 4e-3 from both edges.
        let k = kernel(&square_polytope(), &p(&[0.996, 0.996]), &cfg()).unwrap();
        assert!(k.value > 1e4);
        let want = kernel_square_reference(&p(&[0.996, 0.996])).unwrap();
        assert!(((k.value - want) / want).abs() < 1e-7);
        assert_eq!(boundary_constant(2), 2.0 / (16.0 * PI * PI));
    }
}
