//! CSV tables and SVG figures.
//!
//! Numbers are written as `{:.17e}` so that tables round-trip exactly.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::body::{Body, CutSpec, Direction};
use crate::cap::{cut_depth, section_barycenter};
use crate::error::{Error, Result};
use crate::floating::FloatingBodyApprox;
use crate::invariants::{LimitReport, SandwichReport, ThetaReport};
use crate::Point;

pub fn sci(x: f64) -> String {
    format!("{x:.17e}")
}

fn join(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(sci).collect::<Vec<_>>().join(",")
}

fn axis_header(prefix: &str, n: usize) -> String {
    (1..=n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>().join(",")
}

/// `v_1..v_n, r, b_1..b_n` per cut.
pub fn cuts_csv(fba: &FloatingBodyApprox) -> String {
    let n = fba.dim();
    let mut out = format!("{},r,{}\n", axis_header("v", n), axis_header("b", n));
    for (c, b) in fba.cuts.iter().zip(&fba.barycenters) {
        let _ = writeln!(
            out,
            "{},{},{}",
            join(c.direction.as_point().iter().cloned()),
            sci(c.offset),
            join(b.iter().cloned())
        );
    }
    out
}

/// `x_1..x_n, K, error` per point.
pub fn kernel_csv(rows: &[(Point, f64, f64)]) -> String {
    let n = rows.first().map(|r| r.0.len()).unwrap_or(0);
    let mut out = format!("{},K,error\n", axis_header("x", n));
    for (x, k, e) in rows {
        let _ = writeln!(out, "{},{},{}", join(x.iter().cloned()), sci(*k), sci(*e));
    }
    out
}

/// One row per `δ`, then a `δ = 0` row holding the extrapolated limits.
pub fn theta_csv(r: &ThetaReport) -> String {
    let mut out = String::from("delta,L,U,theta,flagged\n");
    for row in &r.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            sci(row.delta),
            sci(row.lower),
            sci(row.upper),
            sci(row.theta()),
            row.flagged
        );
    }
    let _ = writeln!(
        out,
        "{},{},{},{},{}",
        sci(0.0),
        sci(r.ell.limit),
        sci(r.u.limit),
        sci(r.theta),
        r.flagged_points.len()
    );
    out
}

pub fn sandwich_csv(reports: &[SandwichReport]) -> String {
    let mut out = String::from("delta,violations_lower,violations_upper,worst_margin\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            sci(r.delta),
            r.violations_lower,
            r.violations_upper,
            sci(r.worst_margin())
        );
    }
    out
}

/// Rows of named limit tables.
pub fn limits_csv(tables: &[(&str, &LimitReport)]) -> String {
    let mut out = String::from("check,parameter,value,target,gap\n");
    for (name, t) in tables {
        for row in &t.rows {
            let _ = writeln!(
                out,
                "{name},{},{},{},{}",
                sci(row.parameter),
                sci(row.value),
                sci(row.target),
                sci(row.gap)
            );
        }
    }
    out
}

/// Boundary of a planar body as a closed counter-clockwise polygon.
pub fn outline(body: &Body) -> Result<Vec<Point>> {
    if body.dim() != 2 {
        return Err(Error::UnsupportedDimension(body.dim()));
    }
    if let Body::Ellipsoid(e) = body {
        return Ok((0..256)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / 256.0;
                &e.center + &e.shape * Point::from_vec(vec![t.cos(), t.sin()])
            })
            .collect());
    }
    let p = body.to_polytope().ok_or(Error::DegenerateBody)?;
    let c = p.vertex_centroid();
    let mut v = p.vertices().to_vec();
    v.sort_by(|a, b| {
        let (da, db) = (a - &c, b - &c);
        da[1].atan2(da[0]).total_cmp(&db[1].atan2(db[0]))
    });
    Ok(v)
}

enum Shape {
    Path {
        points: Vec<Point>,
        closed: bool,
        style: &'static str,
    },
    Dot {
        at: Point,
        style: &'static str,
    },
    Label {
        at: Point,
        text: String,
    },
}

/// Minimal SVG canvas in world coordinates, fitted to its contents.
#[derive(Default)]
pub struct Canvas {
    shapes: Vec<Shape>,
}

const SIZE: f64 = 480.0;
const MARGIN: f64 = 24.0;

impl Canvas {
    pub fn polygon(&mut self, points: Vec<Point>, style: &'static str) {
        self.shapes.push(Shape::Path {
            points,
            closed: true,
            style,
        });
    }

    pub fn polyline(&mut self, points: Vec<Point>, style: &'static str) {
        self.shapes.push(Shape::Path {
            points,
            closed: false,
            style,
        });
    }

    pub fn dot(&mut self, at: Point, style: &'static str) {
        self.shapes.push(Shape::Dot { at, style });
    }

    pub fn label(&mut self, at: Point, text: &str) {
        self.shapes.push(Shape::Label {
            at,
            text: text.to_string(),
        });
    }

    pub fn render(&self) -> String {
        let pts = self.shapes.iter().flat_map(|s| match s {
            Shape::Path { points, .. } => points.iter().collect::<Vec<_>>(),
            Shape::Dot { at, .. } | Shape::Label { at, .. } => vec![at],
        });
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in pts {
            for i in 0..2 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        let s = (SIZE - 2.0 * MARGIN) / span;
        let map = |p: &Point| (MARGIN + (p[0] - lo[0]) * s, SIZE - MARGIN - (p[1] - lo[1]) * s);
        let mut out = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        );
        for shape in &self.shapes {
            match shape {
                Shape::Path {
                    points,
                    closed,
                    style,
                } => {
                    let coords = points
                        .iter()
                        .map(|p| {
                            let (x, y) = map(p);
                            format!("{x:.3},{y:.3}")
                        })
                        .collect::<Vec<_>>()
                        .join(" ");
                    let tag = if *closed { "polygon" } else { "polyline" };
                    let _ = writeln!(out, "<{tag} points=\"{coords}\" {style}/>");
                }
                Shape::Dot { at, style } => {
                    let (x, y) = map(at);
                    let _ = writeln!(out, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"3\" {style}/>");
                }
                Shape::Label { at, text } => {
                    let (x, y) = map(at);
                    let _ = writeln!(
                        out,
                        "<text x=\"{x:.3}\" y=\"{y:.3}\" font-family=\"serif\" font-size=\"14\">{text}</text>"
                    );
                }
            }
        }
        out.push_str("</svg>\n");
        out
    }
}

const BODY: &str = "fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"";
const FLOAT: &str = "fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"";
const THICK: &str = "fill=\"none\" stroke=\"firebrick\" stroke-width=\"4\"";
const THIN: &str = "fill=\"none\" stroke=\"gray\" stroke-width=\"1\" stroke-dasharray=\"4 3\"";
const POINT: &str = "fill=\"black\"";

/// Body outline with the barycenter polygon of its floating body; barycenters
/// satisfying `highlight` are redrawn thick.
pub fn floating_figure<F: Fn(&Point) -> bool>(fba: &FloatingBodyApprox, highlight: F) -> Result<String> {
    let mut c = Canvas::default();
    c.polygon(outline(&fba.body)?, BODY);
    c.polygon(fba.barycenters.clone(), FLOAT);
    let mut run: Vec<Point> = Vec::new();
    for b in fba.barycenters.iter().chain(fba.barycenters.first()) {
        if highlight(b) {
            run.push(b.clone());
        } else if !run.is_empty() {
            c.polyline(std::mem::take(&mut run), THICK);
        }
    }
    if !run.is_empty() {
        c.polyline(run, THICK);
    }
    Ok(c.render())
}

/// The one-eighth arc `{0 ≤ y ≤ x ≤ 1/2}` of the square's floating boundary.
pub fn square_octant(b: &Point) -> bool {
    b[1] >= 0.0 && b[1] <= b[0] && b[0] <= 0.5
}

/// Boundary point with outward normal `v`, the tangent line there, the parallel
/// cut of volume `δ`, and the barycenter of the cut.
pub fn scheme_figure(body: &Body, v: &Direction, delta: f64) -> Result<String> {
    if body.dim() != 2 {
        return Err(Error::UnsupportedDimension(body.dim()));
    }
    let vp = v.as_point();
    let h = body.support(vp);
    let r = cut_depth(body, v, delta)?;
    let b = section_barycenter(body, &CutSpec::new(v.clone(), r))?;
    let tangent = Point::from_vec(vec![-vp[1], vp[0]]);
    let x0 = match body {
        Body::Ellipsoid(e) => {
            let at = e.shape.transpose() * vp;
            &e.center + &e.shape * &at / at.norm()
        }
        _ => {
            let foot = &b + vp * (h - b.dot(vp));
            if body.contains(&(&foot - vp * 1e-9)) {
                foot
            } else {
                outline(body)?
                    .into_iter()
                    .max_by(|p, q| p.dot(vp).total_cmp(&q.dot(vp)))
                    .expect("nonempty outline")
            }
        }
    };
    let (lo, hi) = body.bounding_box();
    let reach = lo.iter().zip(&hi).map(|(l, u)| u - l).fold(0.0, f64::max);
    let line = |p: &Point| vec![p - &tangent * (0.6 * reach), p + &tangent * (0.6 * reach)];
    let mut c = Canvas::default();
    c.polygon(outline(body)?, BODY);
    c.polyline(line(&x0), THIN);
    c.polyline(line(&(&x0 - vp * (h - r))), FLOAT);
    c.polyline(vec![x0.clone(), &x0 + vp * (0.25 * reach)], BODY);
    c.dot(x0.clone(), POINT);
    c.dot(b.clone(), POINT);
    c.label(&x0 + vp * (0.27 * reach), "N");
    c.label(&x0 + &tangent * (0.03 * reach), "x₀");
    c.label(&b + &tangent * (0.03 * reach) - vp * (0.05 * reach), "x^δ");
    c.label(&x0 - vp * (0.5 * (h - r)) - &tangent * (0.12 * reach), "Δ");
    Ok(c.render())
}

/// `C_δ ⊂ T ⊂ S ⊂ 2T` with `C_δ = {(t, δ/2t) : √(δ/2) ≤ t ≤ 1/2}`.
pub fn nested_figure(delta: f64) -> Result<String> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::DeltaOutOfRange { delta, max: 0.5 });
    }
    let p = |x: f64, y: f64| Point::from_vec(vec![x, y]);
    let mut c = Canvas::default();
    c.polygon(vec![p(0.0, 0.0), p(2.0, 0.0), p(0.0, 2.0)], THIN);
    c.polygon(vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)], BODY);
    c.polygon(vec![p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)], FLOAT);
    let t0 = (0.5 * delta).sqrt();
    let arc = (0..=200)
        .map(|k| {
            let t = t0 + (0.5 - t0) * k as f64 / 200.0;
            p(t, 0.5 * delta / t)
        })
        .collect();
    c.polyline(arc, THICK);
    c.label(p(0.55, 0.08), "C_δ");
    c.label(p(0.25, 0.3), "T");
    c.label(p(0.85, 0.85), "S");
    c.label(p(1.05, 1.05), "2T");
    Ok(c.render())
}
