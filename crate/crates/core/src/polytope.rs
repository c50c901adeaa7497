//! Convex polytopes in dimensions 1–3 carrying both vertex and half-space
//! representations, plus half-space clipping.

use crate::error::{Error, Result};
use crate::tol;
use crate::Point;

/// Outward unit normal and offset of a facet: `normal · x ≤ offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Point,
    pub offset: f64,
}

/// A bounded convex polytope with mutually consistent V- and H-representations.
///
/// In the plane, `vertices` are in counter-clockwise order and facet `i` is the
/// edge from vertex `i` to vertex `i + 1`. In space, `faces[i]` lists the
/// vertices of facet `i` counter-clockwise as seen from outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Point>,
    facets: Vec<Halfspace>,
    faces: Vec<Vec<usize>>,
}

/// Result of intersecting a polytope with `{x · v ≥ r}`.
#[derive(Debug, Clone)]
pub struct Clip {
    pub volume: f64,
    /// Vertices of the slice by the hyperplane `x · v = r` (empty if it misses).
    pub section: Vec<Point>,
}

const HULL_EPS: f64 = 1e-10;

fn scale_of(points: &[Point]) -> f64 {
    points
        .iter()
        .flat_map(|p| p.iter())
        .fold(1.0_f64, |m, &c| m.max(c.abs()))
}

impl Polytope {
    /// Builds the polytope spanned by `points` (the convex hull; interior and
    /// non-extreme points are dropped).
    pub fn from_vertices(points: &[Point]) -> Result<Self> {
        let dim = points
            .first()
            .map(|p| p.len())
            .ok_or_else(|| Error::InvalidBody("polytope needs vertices".into()))?;
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.len(),
            });
        }
        if points.iter().any(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(Error::InvalidBody("non-finite vertex coordinate".into()));
        }
        match dim {
            1 => Self::hull_1d(points),
            2 => Self::hull_2d(points),
            3 => Self::hull_3d(points),
            d => Err(Error::UnsupportedDimension(d)),
        }
    }

    fn hull_1d(points: &[Point]) -> Result<Self> {
        let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        if hi - lo <= HULL_EPS * scale_of(points) {
            return Err(Error::DegenerateBody);
        }
        Ok(Self {
            dim: 1,
            vertices: vec![Point::from_vec(vec![lo]), Point::from_vec(vec![hi])],
            facets: vec![
                Halfspace {
                    normal: Point::from_vec(vec![-1.0]),
                    offset: -lo,
                },
                Halfspace {
                    normal: Point::from_vec(vec![1.0]),
                    offset: hi,
                },
            ],
            faces: vec![vec![0], vec![1]],
        })
    }

    // Andrew's monotone chain, counter-clockwise, collinear points dropped.
    fn hull_2d(points: &[Point]) -> Result<Self> {
        let eps = HULL_EPS * scale_of(points).powi(2);
        let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        pts.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-14 && (a.1 - b.1).abs() <= 1e-14);
        if pts.len() < 3 {
            return Err(Error::DegenerateBody);
        }
        let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
            (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
        };
        let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
        for &p in &pts {
            while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= eps {
                hull.pop();
            }
            hull.push(p);
        }
        let lower = hull.len() + 1;
        for &p in pts.iter().rev().skip(1) {
            while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= eps
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
        if hull.len() < 3 {
            return Err(Error::DegenerateBody);
        }
        let vertices: Vec<Point> = hull
            .iter()
            .map(|&(x, y)| Point::from_vec(vec![x, y]))
            .collect();
        let m = vertices.len();
        let mut facets = Vec::with_capacity(m);
        let mut faces = Vec::with_capacity(m);
        for i in 0..m {
            let a = &vertices[i];
            let b = &vertices[(i + 1) % m];
            let e = b - a;
            let normal = Point::from_vec(vec![e[1], -e[0]]).normalize();
            let offset = normal.dot(a);
            facets.push(Halfspace { normal, offset });
            faces.push(vec![i, (i + 1) % m]);
        }
        Ok(Self {
            dim: 2,
            vertices,
            facets,
            faces,
        })
    }

    // Brute force over vertex triples; fine for the small vertex counts used here.
    fn hull_3d(points: &[Point]) -> Result<Self> {
        let scale = scale_of(points);
        let eps = HULL_EPS * scale;
        let m = points.len();
        let mut planes: Vec<Halfspace> = Vec::new();
        for i in 0..m {
            for j in (i + 1)..m {
                for k in (j + 1)..m {
                    let n = (&points[j] - &points[i]).cross(&(&points[k] - &points[i]));
                    let norm = n.norm();
                    if norm <= 1e-9 * scale * scale {
                        continue;
                    }
                    let mut normal = n / norm;
                    let mut offset = normal.dot(&points[i]);
                    let (mut above, mut below) = (false, false);
                    for p in points {
                        let s = normal.dot(p) - offset;
                        above |= s > eps;
                        below |= s < -eps;
                    }
                    if above && below {
                        continue;
                    }
                    if above {
                        normal = -normal;
                        offset = -offset;
                    }
                    let dup = planes.iter().any(|h| {
                        (&h.normal - &normal).norm() <= 1e-9 && (h.offset - offset).abs() <= 1e-9 * scale
                    });
                    if !dup {
                        planes.push(Halfspace { normal, offset });
                    }
                }
            }
        }
        if planes.len() < 4 {
            return Err(Error::DegenerateBody);
        }
        let on = |h: &Halfspace, p: &Point| (h.normal.dot(p) - h.offset).abs() <= eps;
        // Extreme points lie on at least three facets.
        let mut vertices: Vec<Point> = Vec::new();
        for p in points {
            let count = planes.iter().filter(|h| on(h, p)).count();
            if count >= 3 && !vertices.iter().any(|q| (q - p).norm() <= eps) {
                vertices.push(p.clone());
            }
        }
        let mut faces = Vec::with_capacity(planes.len());
        for h in &planes {
            let idx: Vec<usize> = (0..vertices.len()).filter(|&v| on(h, &vertices[v])).collect();
            faces.push(order_face(&vertices, &idx, &h.normal));
        }
        Ok(Self {
            dim: 3,
            vertices,
            facets: planes,
            faces,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Halfspace] {
        &self.facets
    }

    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }

    /// Checks that every vertex satisfies every facet inequality and every
    /// facet is touched by at least `dim` vertices.
    pub fn validate(&self) -> Result<()> {
        let scale = scale_of(&self.vertices);
        let eps = tol::POLYTOPE_CONSISTENCY * scale;
        for h in &self.facets {
            let mut touching = 0;
            for v in &self.vertices {
                let s = h.normal.dot(v) - h.offset;
                if s > eps {
                    return Err(Error::InvalidBody(format!(
                        "vertex violates a facet inequality by {s:e}"
                    )));
                }
                if s.abs() <= eps {
                    touching += 1;
                }
            }
            if touching < self.dim {
                return Err(Error::InvalidBody(
                    "facet touched by fewer than n vertices".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn vertex_centroid(&self) -> Point {
        let mut c = Point::zeros(self.dim);
        for v in &self.vertices {
            c += v;
        }
        c / self.vertices.len() as f64
    }

    pub fn volume(&self) -> f64 {
        match self.dim {
            1 => self.vertices[1][0] - self.vertices[0][0],
            2 => polygon_area(&self.vertices),
            _ => {
                let faces: Vec<Vec<Point>> = self
                    .faces
                    .iter()
                    .map(|f| f.iter().map(|&i| self.vertices[i].clone()).collect())
                    .collect();
                polyhedron_volume(&faces, &self.vertex_centroid())
            }
        }
    }

    pub fn support(&self, v: &Point) -> f64 {
        self.vertices
            .iter()
            .map(|p| p.dot(v))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest slack `offset - normal · x` over all facets (positive inside).
    pub fn min_slack(&self, x: &Point) -> f64 {
        self.facets
            .iter()
            .map(|h| h.offset - h.normal.dot(x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Simplices (as vertex lists) triangulating the polytope by a fan.
    pub fn fan_simplices(&self) -> Vec<Vec<Point>> {
        match self.dim {
            1 => vec![self.vertices.clone()],
            2 => {
                let v = &self.vertices;
                (1..v.len() - 1)
                    .map(|i| vec![v[0].clone(), v[i].clone(), v[i + 1].clone()])
                    .collect()
            }
            _ => {
                let apex = 0usize;
                let mut out = Vec::new();
                for face in &self.faces {
                    if face.contains(&apex) {
                        continue;
                    }
                    for i in 1..face.len() - 1 {
                        out.push(vec![
                            self.vertices[apex].clone(),
                            self.vertices[face[0]].clone(),
                            self.vertices[face[i]].clone(),
                            self.vertices[face[i + 1]].clone(),
                        ]);
                    }
                }
                out
            }
        }
    }

    /// Intersects with `{x · v ≥ r}`, returning the cap volume and the section.
    pub fn clip(&self, v: &Point, r: f64) -> Clip {
        match self.dim {
            1 => {
                let (a, b) = (self.vertices[0][0], self.vertices[1][0]);
                // v is ±1 for a unit direction in one dimension.
                let (lo, hi) = if v[0] > 0.0 {
                    ((r / v[0]).max(a), b)
                } else {
                    (a, (r / v[0]).min(b))
                };
                let volume = (hi - lo).max(0.0);
                let cut = r / v[0];
                let section = if cut > a && cut < b {
                    vec![Point::from_vec(vec![cut])]
                } else {
                    vec![]
                };
                Clip { volume, section }
            }
            2 => {
                let (poly, section) = clip_polygon(&self.vertices, v, r);
                Clip {
                    volume: if poly.len() >= 3 { polygon_area(&poly) } else { 0.0 },
                    section,
                }
            }
            _ => self.clip_3d(v, r),
        }
    }

    fn clip_3d(&self, v: &Point, r: f64) -> Clip {
        let heights: Vec<f64> = self.vertices.iter().map(|p| p.dot(v) - r).collect();
        if heights.iter().all(|&s| s <= 0.0) {
            return Clip {
                volume: 0.0,
                section: vec![],
            };
        }
        if heights.iter().all(|&s| s >= 0.0) {
            return Clip {
                volume: self.volume(),
                section: vec![],
            };
        }
        let mut faces: Vec<Vec<Point>> = Vec::with_capacity(self.faces.len() + 1);
        let mut cut_points: Vec<Point> = Vec::new();
        for face in &self.faces {
            let pts: Vec<Point> = face.iter().map(|&i| self.vertices[i].clone()).collect();
            let (clipped, inter) = clip_polygon(&pts, v, r);
            if clipped.len() >= 3 {
                faces.push(clipped);
            }
            for p in inter {
                if !cut_points.iter().any(|q| (q - &p).norm() <= 1e-13) {
                    cut_points.push(p);
                }
            }
        }
        let section = if cut_points.len() >= 3 {
            let idx: Vec<usize> = (0..cut_points.len()).collect();
            let order = order_face(&cut_points, &idx, &(-v));
            order.iter().map(|&i| cut_points[i].clone()).collect::<Vec<_>>()
        } else {
            vec![]
        };
        if section.len() >= 3 {
            faces.push(section.clone());
        }
        let mut o = Point::zeros(3);
        let mut count = 0.0;
        for f in &faces {
            for p in f {
                o += p;
                count += 1.0;
            }
        }
        if count == 0.0 {
            return Clip {
                volume: 0.0,
                section,
            };
        }
        o /= count;
        Clip {
            volume: polyhedron_volume(&faces, &o),
            section,
        }
    }
}

/// Orders the points `idx` of a planar face counter-clockwise around `normal`.
fn order_face(points: &[Point], idx: &[usize], normal: &Point) -> Vec<usize> {
    if idx.len() < 3 {
        return idx.to_vec();
    }
    let mut c = Point::zeros(3);
    for &i in idx {
        c += &points[i];
    }
    c /= idx.len() as f64;
    let seed = if normal[0].abs() < 0.9 {
        Point::from_vec(vec![1.0, 0.0, 0.0])
    } else {
        Point::from_vec(vec![0.0, 1.0, 0.0])
    };
    let e1 = normal.cross(&seed).normalize();
    let e2 = normal.cross(&e1);
    let mut keyed: Vec<(f64, usize)> = idx
        .iter()
        .map(|&i| {
            let d = &points[i] - &c;
            (d.dot(&e2).atan2(d.dot(&e1)), i)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    keyed.into_iter().map(|(_, i)| i).collect()
}

/// Sutherland–Hodgman against `{x · v ≥ r}`; returns the clipped polygon and
/// the points where its boundary crosses the hyperplane.
pub(crate) fn clip_polygon(poly: &[Point], v: &Point, r: f64) -> (Vec<Point>, Vec<Point>) {
    let m = poly.len();
    let mut out = Vec::with_capacity(m + 2);
    let mut crossings = Vec::new();
    let h: Vec<f64> = poly.iter().map(|p| p.dot(v) - r).collect();
    for i in 0..m {
        let j = (i + 1) % m;
        let (a, b) = (&poly[i], &poly[j]);
        let (ha, hb) = (h[i], h[j]);
        if ha >= 0.0 {
            out.push(a.clone());
        }
        if (ha >= 0.0) != (hb >= 0.0) {
            let t = ha / (ha - hb);
            let p = a + (b - a) * t;
            crossings.push(p.clone());
            out.push(p);
        }
    }
    (out, crossings)
}

/// Area of a planar polygon (fan from its vertex centroid).
pub fn polygon_area(poly: &[Point]) -> f64 {
    let m = poly.len();
    if m < 3 {
        return 0.0;
    }
    let (mut cx, mut cy) = (0.0, 0.0);
    for p in poly {
        cx += p[0];
        cy += p[1];
    }
    cx /= m as f64;
    cy /= m as f64;
    let mut area = 0.0;
    for i in 0..m {
        let a = &poly[i];
        let b = &poly[(i + 1) % m];
        area += (a[0] - cx) * (b[1] - cy) - (a[1] - cy) * (b[0] - cx);
    }
    0.5 * area.abs()
}

/// Area-weighted centroid of a planar polygon in 2D or 3D.
pub fn polygon_centroid(poly: &[Point]) -> Point {
    let dim = poly[0].len();
    let o = &poly[0];
    let mut acc = Point::zeros(dim);
    let mut total = 0.0;
    for i in 1..poly.len() - 1 {
        let a = &poly[i] - o;
        let b = &poly[i + 1] - o;
        let w = if dim == 2 {
            (a[0] * b[1] - a[1] * b[0]).abs()
        } else {
            a.cross(&b).norm()
        };
        acc += (o * 3.0 + &a + &b) * (w / 3.0);
        total += w;
    }
    if total == 0.0 {
        let mut c = Point::zeros(dim);
        for p in poly {
            c += p;
        }
        return c / poly.len() as f64;
    }
    acc / total
}

fn polyhedron_volume(faces: &[Vec<Point>], o: &Point) -> f64 {
    let mut vol = 0.0;
    for f in faces {
        let a = &f[0] - o;
        for i in 1..f.len() - 1 {
            let b = &f[i] - o;
            let c = &f[i + 1] - o;
            vol += a.dot(&b.cross(&c)).abs();
        }
    }
    vol / 6.0
}
