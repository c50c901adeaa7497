//! Convex bodies: boxes, simplices, polytopes and ellipsoids.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::Polytope;
use crate::tol;
use crate::{Matrix, Point};

/// Volume of the Euclidean unit ball in `n` dimensions, `π^{n/2} / Γ(n/2 + 1)`.
pub fn unit_ball_volume(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::UnsupportedDimension(n));
    }
    Ok(ball_volume(n))
}

// ω_0 = 1 is used for ω_{n-1} when n = 1.
pub(crate) fn ball_volume(n: usize) -> f64 {
    let (mut even, mut odd) = (1.0, 2.0);
    let mut k = 0;
    while k + 2 <= n {
        k += 2;
        even *= 2.0 * std::f64::consts::PI / k as f64;
        odd *= 2.0 * std::f64::consts::PI / (k + 1) as f64;
    }
    if n % 2 == 0 {
        even
    } else {
        odd
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// A unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Point);

impl Direction {
    /// Normalizes `v`; fails on the zero vector.
    pub fn new(v: Point) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument("direction must be nonzero".into()));
        }
        Ok(Self(v / norm))
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        Self::new(Point::from_column_slice(v))
    }

    /// Unit vector at angle `phi` in the plane.
    pub fn from_angle(phi: f64) -> Self {
        Self(Point::from_vec(vec![phi.cos(), phi.sin()]))
    }

    pub fn as_point(&self) -> &Point {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn neg(&self) -> Self {
        Self(-&self.0)
    }
}

impl std::ops::Deref for Direction {
    type Target = Point;
    fn deref(&self) -> &Point {
        &self.0
    }
}

/// The hyperplane `x · v = r` together with its cap `{x · v ≥ r}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutSpec {
    pub direction: Direction,
    pub offset: f64,
}

impl CutSpec {
    pub fn new(direction: Direction, offset: f64) -> Self {
        Self { direction, offset }
    }
}

/// Axis-aligned box `∏ (lo_i, hi_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxBody {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// Simplex spanned by `n + 1` affinely independent vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    pub vertices: Vec<Point>,
}

/// Ellipsoid `center + shape(𝔹ⁿ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    pub center: Point,
    pub shape: Matrix,
}

/// A bounded convex body with nonempty interior.
#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Box(BoxBody),
    Simplex(Simplex),
    Polytope(Polytope),
    Ellipsoid(Ellipsoid),
}

impl Simplex {
    /// Signed-volume matrix `[v_1 - v_0, ..., v_n - v_0]`.
    fn edge_matrix(&self) -> Matrix {
        let n = self.vertices.len() - 1;
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let e = &self.vertices[j + 1] - &self.vertices[0];
            m.set_column(j, &e);
        }
        m
    }

    pub fn volume(&self) -> f64 {
        let n = self.vertices.len() - 1;
        self.edge_matrix().determinant().abs() / factorial(n)
    }
}

impl Ellipsoid {
    pub fn new(center: Point, shape: Matrix) -> Result<Self> {
        let e = Self { center, shape };
        Body::Ellipsoid(e.clone()).validate()?;
        Ok(e)
    }

    /// Ball of radius `radius` about `center`.
    pub fn ball(center: Point, radius: f64) -> Self {
        let n = center.len();
        Self {
            center,
            shape: Matrix::identity(n, n) * radius,
        }
    }

    pub fn inverse_shape(&self) -> Matrix {
        self.shape
            .clone()
            .try_inverse()
            .expect("ellipsoid shape validated nonsingular")
    }

    /// Coordinates `A⁻¹(x - c)` in the reference ball.
    pub fn to_ball(&self, x: &Point) -> Point {
        self.inverse_shape() * (x - &self.center)
    }

    /// Gaussian curvature of the boundary at `x` (assumed on the boundary).
    ///
    /// With `Q = (A Aᵀ)⁻¹` the boundary is `(x-c)ᵀQ(x-c) = 1` and the
    /// curvature is `det Q / |Q(x-c)|^{n+1}`.
    pub fn gauss_curvature(&self, x: &Point) -> f64 {
        let n = self.center.len();
        let a_inv = self.inverse_shape();
        let q = a_inv.transpose() * &a_inv;
        let grad = &q * (x - &self.center);
        q.determinant() / grad.norm().powi(n as i32 + 1)
    }

    /// Outward unit normal at the boundary point `x`.
    pub fn outward_normal(&self, x: &Point) -> Point {
        let a_inv = self.inverse_shape();
        let q = a_inv.transpose() * &a_inv;
        (q * (x - &self.center)).normalize()
    }
}

fn kind_name(b: &Body) -> &'static str {
    match b {
        Body::Box(_) => "box",
        Body::Simplex(_) => "simplex",
        Body::Polytope(_) => "polytope",
        Body::Ellipsoid(_) => "ellipsoid",
    }
}

impl Body {
    /// The open unit square `(0,1)²`.
    pub fn unit_square() -> Self {
        Body::Box(BoxBody {
            lo: vec![0.0, 0.0],
            hi: vec![1.0, 1.0],
        })
    }

    /// The triangle `conv{(0,0), (1,0), (0,1)}`.
    pub fn unit_triangle() -> Self {
        Body::Simplex(Simplex {
            vertices: vec![
                Point::from_vec(vec![0.0, 0.0]),
                Point::from_vec(vec![1.0, 0.0]),
                Point::from_vec(vec![0.0, 1.0]),
            ],
        })
    }

    /// The Euclidean unit ball in `n` dimensions.
    pub fn unit_ball(n: usize) -> Self {
        Body::Ellipsoid(Ellipsoid::ball(Point::zeros(n), 1.0))
    }

    pub fn new_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let b = Body::Box(BoxBody { lo, hi });
        b.validate()?;
        Ok(b)
    }

    pub fn new_simplex(vertices: Vec<Point>) -> Result<Self> {
        let b = Body::Simplex(Simplex { vertices });
        b.validate()?;
        Ok(b)
    }

    pub fn new_polytope(vertices: &[Point]) -> Result<Self> {
        let b = Body::Polytope(Polytope::from_vertices(vertices)?);
        b.validate()?;
        Ok(b)
    }

    pub fn new_ellipsoid(center: Point, shape: Matrix) -> Result<Self> {
        Ok(Body::Ellipsoid(Ellipsoid::new(center, shape)?))
    }

    pub fn kind(&self) -> &'static str {
        kind_name(self)
    }

    pub fn dim(&self) -> usize {
        match self {
            Body::Box(b) => b.lo.len(),
            Body::Simplex(s) => s.vertices[0].len(),
            Body::Polytope(p) => p.dim(),
            Body::Ellipsoid(e) => e.center.len(),
        }
    }

    /// Checks boundedness, nonempty interior and representation consistency.
    pub fn validate(&self) -> Result<()> {
        match self {
            Body::Box(b) => {
                if b.lo.is_empty() {
                    return Err(Error::InvalidBody("box has no axes".into()));
                }
                if b.lo.len() != b.hi.len() {
                    return Err(Error::DimensionMismatch {
                        expected: b.lo.len(),
                        got: b.hi.len(),
                    });
                }
                for (i, (l, h)) in b.lo.iter().zip(&b.hi).enumerate() {
                    if !(l < h) || !l.is_finite() || !h.is_finite() {
                        return Err(Error::InvalidBody(format!(
                            "box axis {i}: need lo < hi, got {l} and {h}"
                        )));
                    }
                }
                Ok(())
            }
            Body::Simplex(s) => {
                let n = s.vertices.first().map(|v| v.len()).unwrap_or(0);
                if n == 0 {
                    return Err(Error::InvalidBody("simplex has no vertices".into()));
                }
                if s.vertices.len() != n + 1 {
                    return Err(Error::InvalidBody(format!(
                        "simplex in dimension {n} needs {} vertices, got {}",
                        n + 1,
                        s.vertices.len()
                    )));
                }
                if let Some(v) = s.vertices.iter().find(|v| v.len() != n) {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: v.len(),
                    });
                }
                let scale = s
                    .vertices
                    .iter()
                    .flat_map(|v| v.iter())
                    .fold(1.0_f64, |m, c| m.max(c.abs()));
                if s.edge_matrix().determinant().abs() <= 1e-12 * scale.powi(n as i32) {
                    return Err(Error::DegenerateBody);
                }
                Ok(())
            }
            Body::Polytope(p) => p.validate(),
            Body::Ellipsoid(e) => {
                let n = e.center.len();
                if n == 0 || e.shape.nrows() != n || e.shape.ncols() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: e.shape.nrows(),
                    });
                }
                let det = e.shape.determinant();
                if !(det.abs() > 0.0) || !det.is_finite() {
                    return Err(Error::SingularMap(det));
                }
                Ok(())
            }
        }
    }

    /// Polytope representation of the polytopal variants.
    pub fn to_polytope(&self) -> Option<Polytope> {
        match self {
            Body::Box(b) => {
                let n = b.lo.len();
                let corners: Vec<Point> = (0..(1usize << n))
                    .map(|mask| {
                        Point::from_iterator(
                            n,
                            (0..n).map(|i| if mask >> i & 1 == 1 { b.hi[i] } else { b.lo[i] }),
                        )
                    })
                    .collect();
                Polytope::from_vertices(&corners).ok()
            }
            Body::Simplex(s) => Polytope::from_vertices(&s.vertices).ok(),
            Body::Polytope(p) => Some(p.clone()),
            Body::Ellipsoid(_) => None,
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Body::Box(b) => b.lo.iter().zip(&b.hi).map(|(l, h)| h - l).product(),
            Body::Simplex(s) => s.volume(),
            Body::Polytope(p) => p.volume(),
            Body::Ellipsoid(e) => ball_volume(e.center.len()) * e.shape.determinant().abs(),
        }
    }

    /// Support function `max_{y ∈ body} y · v`.
    pub fn support(&self, v: &Point) -> f64 {
        match self {
            Body::Box(b) => (0..b.lo.len())
                .map(|i| if v[i] >= 0.0 { b.hi[i] * v[i] } else { b.lo[i] * v[i] })
                .sum(),
            Body::Simplex(s) => s
                .vertices
                .iter()
                .map(|p| p.dot(v))
                .fold(f64::NEG_INFINITY, f64::max),
            Body::Polytope(p) => p.support(v),
            Body::Ellipsoid(e) => e.center.dot(v) + (e.shape.transpose() * v).norm(),
        }
    }

    /// Strict interior test.
    pub fn contains(&self, x: &Point) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            Body::Box(b) => (0..b.lo.len())
                .all(|i| x[i] > b.lo[i] + tol::INTERIOR && x[i] < b.hi[i] - tol::INTERIOR),
            Body::Simplex(_) | Body::Polytope(_) => {
                self.min_slack(x).is_some_and(|s| s > tol::INTERIOR)
            }
            Body::Ellipsoid(e) => e.to_ball(x).norm_squared() < 1.0 - tol::INTERIOR,
        }
    }

    /// Smallest facet slack for polytopal variants (positive inside).
    pub fn min_slack(&self, x: &Point) -> Option<f64> {
        match self {
            Body::Box(b) => Some(
                (0..b.lo.len())
                    .map(|i| (x[i] - b.lo[i]).min(b.hi[i] - x[i]))
                    .fold(f64::INFINITY, f64::min),
            ),
            Body::Simplex(s) => {
                let n = s.vertices.len() - 1;
                let m = s.edge_matrix();
                let inv = m.try_inverse()?;
                // Barycentric slacks scaled to distances.
                let lam = &inv * (x - &s.vertices[0]);
                let mut best = f64::INFINITY;
                let l0 = 1.0 - lam.sum();
                let g0 = inv.row_sum_tr();
                best = best.min(l0 / g0.norm());
                for i in 0..n {
                    best = best.min(lam[i] / inv.row(i).norm());
                }
                Some(best)
            }
            Body::Polytope(p) => Some(p.min_slack(x)),
            Body::Ellipsoid(_) => None,
        }
    }

    /// Lower bound on the distance from an interior `x` to the boundary: the
    /// smallest gap `support(v) - x · v` over facet normals and coordinate
    /// directions (exact for polytopes; for ellipsoids scaled by the smallest
    /// semi-axis).
    pub fn boundary_gap(&self, x: &Point) -> f64 {
        match self {
            Body::Ellipsoid(e) => {
                let r = e.to_ball(x).norm();
                let sv = e.shape.clone().singular_values();
                let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
                (1.0 - r) * smin
            }
            _ => self.min_slack(x).unwrap_or(0.0),
        }
    }

    /// Distance `ρ` from interior `x` along `d` to the boundary, in units of `|d|`.
    pub fn ray_exit(&self, x: &Point, d: &Point) -> f64 {
        match self {
            Body::Box(b) => (0..b.lo.len())
                .map(|i| {
                    if d[i] > 0.0 {
                        (b.hi[i] - x[i]) / d[i]
                    } else if d[i] < 0.0 {
                        (b.lo[i] - x[i]) / d[i]
                    } else {
                        f64::INFINITY
                    }
                })
                .fold(f64::INFINITY, f64::min),
            Body::Ellipsoid(e) => {
                let inv = e.inverse_shape();
                let u = &inv * (x - &e.center);
                let w = &inv * d;
                let (a, b, c) = (w.norm_squared(), u.dot(&w), u.norm_squared() - 1.0);
                (-b + (b * b - a * c).max(0.0).sqrt()) / a
            }
            _ => {
                let p = self.to_polytope().expect("polytopal body");
                p.facets()
                    .iter()
                    .filter_map(|h| {
                        let nd = h.normal.dot(d);
                        (nd > 0.0).then(|| (h.offset - h.normal.dot(x)) / nd)
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.dim();
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        for i in 0..n {
            let mut e = Point::zeros(n);
            e[i] = 1.0;
            hi[i] = self.support(&e);
            lo[i] = -self.support(&-e);
        }
        (lo, hi)
    }

    /// Centroid (center of mass).
    pub fn centroid(&self) -> Point {
        match self {
            Body::Box(b) => {
                Point::from_iterator(b.lo.len(), b.lo.iter().zip(&b.hi).map(|(l, h)| 0.5 * (l + h)))
            }
            Body::Simplex(s) => {
                let mut c = Point::zeros(s.vertices[0].len());
                for v in &s.vertices {
                    c += v;
                }
                c / s.vertices.len() as f64
            }
            Body::Polytope(p) => {
                let mut acc = Point::zeros(p.dim());
                let mut total = 0.0;
                for simplex in p.fan_simplices() {
                    let s = Simplex { vertices: simplex };
                    let w = s.volume();
                    let mut c = Point::zeros(p.dim());
                    for v in &s.vertices {
                        c += v;
                    }
                    acc += c * (w / s.vertices.len() as f64);
                    total += w;
                }
                acc / total
            }
            Body::Ellipsoid(e) => e.center.clone(),
        }
    }

    /// Image under `x ↦ A x + b`.
    pub fn affine_image(&self, a: &Matrix, b: &Point) -> Result<Body> {
        let n = self.dim();
        if a.nrows() != n || a.ncols() != n || b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.nrows(),
            });
        }
        let det = a.determinant();
        if !(det.abs() > 1e-14) || !det.is_finite() {
            return Err(Error::SingularMap(det));
        }
        let map = |p: &Point| a * p + b;
        Ok(match self {
            Body::Box(bx) if is_diagonal(a) => {
                let mut lo = vec![0.0; n];
                let mut hi = vec![0.0; n];
                for i in 0..n {
                    let (u, w) = (a[(i, i)] * bx.lo[i] + b[i], a[(i, i)] * bx.hi[i] + b[i]);
                    lo[i] = u.min(w);
                    hi[i] = u.max(w);
                }
                Body::Box(BoxBody { lo, hi })
            }
            Body::Box(_) | Body::Polytope(_) => {
                let p = self.to_polytope().ok_or(Error::DegenerateBody)?;
                let verts: Vec<Point> = p.vertices().iter().map(map).collect();
                Body::Polytope(Polytope::from_vertices(&verts)?)
            }
            Body::Simplex(s) => Body::Simplex(Simplex {
                vertices: s.vertices.iter().map(map).collect(),
            }),
            Body::Ellipsoid(e) => Body::Ellipsoid(Ellipsoid {
                center: map(&e.center),
                shape: a * &e.shape,
            }),
        })
    }

    /// Whether `body = -body` about the origin.
    pub fn is_origin_symmetric(&self) -> bool {
        let eps = tol::SYMMETRY;
        match self {
            Body::Box(b) => b.lo.iter().zip(&b.hi).all(|(l, h)| (l + h).abs() <= eps),
            Body::Ellipsoid(e) => e.center.norm() <= eps,
            _ => {
                let Some(p) = self.to_polytope() else {
                    return false;
                };
                let scale = p
                    .vertices()
                    .iter()
                    .map(|v| v.amax())
                    .fold(1.0_f64, f64::max);
                p.vertex_centroid().norm() <= eps * scale
                    && p.vertices().iter().all(|v| {
                        p.vertices()
                            .iter()
                            .any(|w| (v + w).norm() <= eps * scale)
                    })
            }
        }
    }

    /// Polar body `{y : x · y ≤ 1 for all x}` of an origin-symmetric body.
    pub fn polar(&self) -> Result<Body> {
        if !self.is_origin_symmetric() {
            return Err(Error::NotSymmetric);
        }
        match self {
            Body::Ellipsoid(e) => {
                let inv_t = e.inverse_shape().transpose();
                Ok(Body::Ellipsoid(Ellipsoid {
                    center: Point::zeros(e.center.len()),
                    shape: inv_t,
                }))
            }
            _ => {
                let p = self.to_polytope().ok_or(Error::DegenerateBody)?;
                let verts: Vec<Point> = p
                    .facets()
                    .iter()
                    .map(|h| &h.normal / h.offset)
                    .collect();
                Ok(Body::Polytope(Polytope::from_vertices(&verts)?))
            }
        }
    }
}

/// JSON description of a body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum BodySpec {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Simplex { vertices: Vec<Vec<f64>> },
    Polytope { vertices: Vec<Vec<f64>> },
    Ellipsoid { center: Vec<f64>, shape: Vec<Vec<f64>> },
}

fn points(rows: &[Vec<f64>]) -> Vec<Point> {
    rows.iter().map(|r| Point::from_column_slice(r)).collect()
}

impl BodySpec {
    pub fn into_body(self) -> Result<Body> {
        match self {
            BodySpec::Box { lo, hi } => Body::new_box(lo, hi),
            BodySpec::Simplex { vertices } => Body::new_simplex(points(&vertices)),
            BodySpec::Polytope { vertices } => Body::new_polytope(&points(&vertices)),
            BodySpec::Ellipsoid { center, shape } => {
                let n = center.len();
                if shape.len() != n || shape.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidBody(format!(
                        "ellipsoid shape must be {n}×{n}"
                    )));
                }
                let a = Matrix::from_fn(n, n, |i, j| shape[i][j]);
                Body::new_ellipsoid(Point::from_vec(center), a)
            }
        }
    }

    pub fn from_body(body: &Body) -> Self {
        let rows = |v: &[Point]| v.iter().map(|p| p.iter().cloned().collect()).collect();
        match body {
            Body::Box(b) => BodySpec::Box {
                lo: b.lo.clone(),
                hi: b.hi.clone(),
            },
            Body::Simplex(s) => BodySpec::Simplex {
                vertices: rows(&s.vertices),
            },
            Body::Polytope(p) => BodySpec::Polytope {
                vertices: rows(p.vertices()),
            },
            Body::Ellipsoid(e) => {
                let n = e.center.len();
                BodySpec::Ellipsoid {
                    center: e.center.iter().cloned().collect(),
                    shape: (0..n)
                        .map(|i| (0..n).map(|j| e.shape[(i, j)]).collect())
                        .collect(),
                }
            }
        }
    }
}

impl Body {
    /// Parses the JSON body schema.
    pub fn from_json(text: &str) -> Result<Body> {
        let spec: BodySpec =
            serde_json::from_str(text).map_err(|e| Error::InvalidBody(e.to_string()))?;
        spec.into_body()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&BodySpec::from_body(self)).expect("body specs serialize")
    }
}


fn is_diagonal(a: &Matrix) -> bool {
    (0..a.nrows()).all(|i| (0..a.ncols()).all(|j| i == j || a[(i, j)] == 0.0))
}
