//! Affine invariants `ℓ_D`, `u_D`, `θ_D = ℓ_D / u_D` and numerical checks of the
//! inequalities relating floating bodies to Bergman sublevel sets.
//!
//! `ℓ_D` and `u_D` are estimated as the extrema of `δ² K_D` over the section
//! barycenters, which parametrize `∂D_δ`, followed by extrapolation in `δ`.

use rayon::prelude::*;

use crate::bergman::{kernel, kernel_bounds};
use crate::body::{ball_volume, factorial, Body, Direction};
use crate::error::{Error, Result};
use crate::floating::{
    boundary_points, build, direction_grid, fibonacci_directions, radial_gap_between,
    uniform_directions,
};
use crate::oracle::SamplerState;
use crate::quadrature::QuadratureConfig;
use crate::{Matrix, Point};

/// Share of flagged kernel evaluations above which an estimate is rejected.
pub const MAX_FLAGGED_FRACTION: f64 = 0.01;

/// Dimensional constants of the sandwich `D^{ℓ_n/δ²} ⊆ D_δ ⊆ D^{u_n/δ²}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionalConstants {
    pub n: usize,
    /// `4^{-(n+1)}`.
    pub ell: f64,
    /// `n! n^{2n} ω_n² / πⁿ`.
    pub u: f64,
    /// Boundary limit of `δ² K` for strongly convex bodies with `κ = 1`.
    pub a: f64,
    /// `ℓ_n / u_n`.
    pub theta_lower: f64,
}

pub fn constants(n: usize) -> Result<DimensionalConstants> {
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let pi_n = std::f64::consts::PI.powi(n as i32);
    let fact = factorial(n);
    let omega = ball_volume(n);
    let ell = 0.25f64.powi(n as i32 + 1);
    let u = fact * (n as f64).powi(2 * n as i32) * omega * omega / pi_n;
    let a = fact * 2f64.powi(n as i32 + 1) / (4.0f64.powi(n as i32) * pi_n)
        * (ball_volume(n - 1) / (n + 1) as f64).powi(2);
    Ok(DimensionalConstants {
        n,
        ell,
        u,
        a,
        theta_lower: ell / u,
    })
}

/// `δ² K_D(b)` at one boundary barycenter.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySample {
    pub point: Point,
    pub scaled: f64,
    /// Absolute error of `scaled`.
    pub error: f64,
    /// Quadrature missed the tolerance; `scaled` is the unconverged estimate.
    pub flagged: bool,
}

/// Distinct barycenters, first occurrence kept.
fn dedup_points(points: Vec<Point>) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(points.len());
    for p in points {
        let scale = p.amax().max(1.0);
        if !out.iter().any(|q| (q - &p).amax() <= 1e-12 * scale) {
            out.push(p);
        }
    }
    out
}

/// `δ² K_D` at every distinct barycenter of `∂D_δ`, in direction order.
pub fn boundary_samples(
    body: &Body,
    delta: f64,
    directions: &[Direction],
    cfg: &QuadratureConfig,
) -> Result<Vec<BoundarySample>> {
    let points = dedup_points(boundary_points(body, delta, directions)?);
    let d2 = delta * delta;
    points
        .into_par_iter()
        .map(|b| match kernel(body, &b, cfg) {
            Ok(k) => Ok(BoundarySample {
                point: b,
                scaled: d2 * k.value,
                error: d2 * k.error,
                flagged: false,
            }),
            Err(Error::QuadratureNotConverged {
                value, achieved, ..
            }) => Ok(BoundarySample {
                point: b,
                scaled: d2 * value,
                error: d2 * (value * achieved).abs(),
                flagged: true,
            }),
            Err(e) => Err(e),
        })
        .collect()
}

/// Extrema of `δ² K_D` over `∂D_δ` at one `δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaRow {
    pub delta: f64,
    /// `L(δ)`.
    pub lower: f64,
    /// `U(δ)`.
    pub upper: f64,
    pub lower_error: f64,
    pub upper_error: f64,
    pub argmin: Point,
    pub argmax: Point,
    pub samples: usize,
    pub flagged: usize,
}

impl DeltaRow {
    pub fn theta(&self) -> f64 {
        self.lower / self.upper
    }

    /// Relative uncertainty of `theta()` from quadrature.
    pub fn theta_band(&self) -> f64 {
        self.lower_error / self.lower + self.upper_error / self.upper
    }

    pub fn from_samples(delta: f64, samples: &[BoundarySample]) -> Result<Self> {
        let flagged = samples.iter().filter(|s| s.flagged).count();
        if flagged as f64 > MAX_FLAGGED_FRACTION * samples.len() as f64 {
            return Err(Error::TooManyFlagged {
                flagged,
                total: samples.len(),
            });
        }
        let good = || samples.iter().filter(|s| !s.flagged);
        let lo = good()
            .min_by(|a, b| a.scaled.total_cmp(&b.scaled))
            .ok_or(Error::TooManyFlagged {
                flagged,
                total: samples.len(),
            })?;
        let hi = good()
            .max_by(|a, b| a.scaled.total_cmp(&b.scaled))
            .expect("nonempty");
        Ok(Self {
            delta,
            lower: lo.scaled,
            upper: hi.scaled,
            lower_error: lo.error,
            upper_error: hi.error,
            argmin: lo.point.clone(),
            argmax: hi.point.clone(),
            samples: samples.len(),
            flagged,
        })
    }
}

/// Fit `y = limit + c δ^α` with `α ∈ [0.5, 2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolation {
    pub limit: f64,
    pub c: f64,
    pub alpha: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// `false` when the raw last value is reported instead of a fit.
    pub fitted: bool,
    /// Value at the smallest `δ`.
    pub raw: f64,
}

const ALPHA_MIN: f64 = 0.5;
const ALPHA_MAX: f64 = 2.0;

/// Least-squares `(limit, c, rms)` for fixed `α`.
fn fit_fixed_alpha(pts: &[(f64, f64)], alpha: f64) -> (f64, f64, f64) {
    let m = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0.powf(alpha)).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(pts).map(|(x, p)| (x - mx) * (p.1 - my)).sum();
    let c = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let limit = my - c * mx;
    let ss: f64 = xs
        .iter()
        .zip(pts)
        .map(|(x, p)| (p.1 - limit - c * x).powi(2))
        .sum();
    (limit, c, (ss / m).sqrt())
}

/// Extrapolate `(δ, y)` pairs to `δ → 0` from the three smallest `δ`.
pub fn extrapolate(data: &[(f64, f64)]) -> Extrapolation {
    let mut pts = data.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let raw = pts.first().map(|p| p.1).unwrap_or(f64::NAN);
    let fallback = Extrapolation {
        limit: raw,
        c: 0.0,
        alpha: f64::NAN,
        residual: f64::NAN,
        fitted: false,
        raw,
    };
    if pts.len() < 3 {
        return fallback;
    }
    pts.truncate(3);
    let cost = |a: f64| fit_fixed_alpha(&pts, a).2;
    let steps = 150;
    let h = (ALPHA_MAX - ALPHA_MIN) / steps as f64;
    let best = (0..=steps)
        .map(|i| ALPHA_MIN + h * i as f64)
        .min_by(|a, b| cost(*a).total_cmp(&cost(*b)))
        .expect("nonempty grid");
    let (mut a, mut b) = ((best - h).max(ALPHA_MIN), (best + h).min(ALPHA_MAX));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    while b - a > 1e-10 {
        let (x1, x2) = (b - g * (b - a), a + g * (b - a));
        if cost(x1) <= cost(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    let alpha = 0.5 * (a + b);
    let (limit, c, residual) = fit_fixed_alpha(&pts, alpha);
    if !(limit.is_finite() && limit > 0.0) {
        return fallback;
    }
    Extrapolation {
        limit,
        c,
        alpha,
        residual,
        fitted: true,
        raw,
    }
}

/// Per-`δ` extrema with extrapolated `ℓ̂`, `û` and `θ̂ = ℓ̂ / û`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaReport {
    /// Descending in `δ`.
    pub rows: Vec<DeltaRow>,
    pub ell: Extrapolation,
    pub u: Extrapolation,
    pub theta: f64,
    /// Relative band of `θ̂`: quadrature plus the extrapolation step.
    pub theta_band: f64,
    pub flagged_points: Vec<Point>,
}

impl ThetaReport {
    pub fn from_rows(rows: Vec<DeltaRow>, flagged_points: Vec<Point>) -> Self {
        let ell = extrapolate(&rows.iter().map(|r| (r.delta, r.lower)).collect::<Vec<_>>());
        let u = extrapolate(&rows.iter().map(|r| (r.delta, r.upper)).collect::<Vec<_>>());
        let quad = rows.last().map(|r| r.theta_band()).unwrap_or(0.0);
        let theta_band =
            quad + ((ell.limit - ell.raw) / ell.limit).abs() + ((u.limit - u.raw) / u.limit).abs();
        Self {
            rows,
            theta: ell.limit / u.limit,
            ell,
            u,
            theta_band,
            flagged_points,
        }
    }

    /// Per-`δ` θ strictly increasing as `δ` decreases, by more than the
    /// combined quadrature bands of consecutive rows.
    pub fn theta_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| {
            let (a, b) = (&w[0], &w[1]);
            b.theta() - a.theta() > a.theta() * a.theta_band() + b.theta() * b.theta_band()
        })
    }
}

fn check_delta_grid(body: &Body, deltas: &[f64]) -> Result<()> {
    if deltas.is_empty() {
        return Err(Error::InvalidArgument("empty delta grid".into()));
    }
    if deltas.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::InvalidArgument("delta grid must be strictly descending".into()));
    }
    let max = 0.5 * body.volume();
    if let Some(&d) = deltas.iter().find(|&&d| !(d > 0.0 && d < max)) {
        return Err(Error::DeltaOutOfRange { delta: d, max });
    }
    Ok(())
}

/// `L(δ)`, `U(δ)` over a descending grid and their extrapolation.
pub fn theta_estimate(
    body: &Body,
    deltas: &[f64],
    directions: &[Direction],
    cfg: &QuadratureConfig,
) -> Result<ThetaReport> {
    check_delta_grid(body, deltas)?;
    let mut rows = Vec::with_capacity(deltas.len());
    let mut flagged_points = Vec::new();
    for &delta in deltas {
        let samples = boundary_samples(body, delta, directions, cfg)?;
        rows.push(DeltaRow::from_samples(delta, &samples)?);
        flagged_points.extend(samples.into_iter().filter(|s| s.flagged).map(|s| s.point));
    }
    Ok(ThetaReport::from_rows(rows, flagged_points))
}

/// Sampled check of `K_D < ℓ_n/δ² ⇒ x ∈ D_δ` and `x ∈ D_δ ⇒ K_D < u_n/δ²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub delta: f64,
    pub samples: usize,
    pub members: usize,
    pub violations_lower: usize,
    pub violations_upper: usize,
    /// `min δ² K / ℓ_n` over non-members (≥ 1 when the lower inclusion holds).
    pub worst_margin_lower: f64,
    /// `min u_n / (δ² K)` over members (≥ 1 when the upper inclusion holds).
    pub worst_margin_upper: f64,
    /// Points where closed-form bounds did not decide and quadrature ran.
    pub quadrature_evaluations: usize,
    /// Points where neither bounds nor quadrature decided.
    pub undecided: usize,
}

impl SandwichReport {
    pub fn worst_margin(&self) -> f64 {
        self.worst_margin_lower.min(self.worst_margin_upper)
    }

    pub fn holds(&self) -> bool {
        self.violations_lower == 0 && self.violations_upper == 0
    }
}

/// Outcome at one sample: (member, margin, violation, quadrature used, undecided).
fn sandwich_point(
    body: &Body,
    x: &Point,
    member: bool,
    threshold: f64,
    cfg: &QuadratureConfig,
) -> Result<(f64, bool, bool, bool)> {
    // Non-members need K ≥ threshold (margin δ²K/ℓ); members need K < threshold.
    let bounds = kernel_bounds(body, x)?;
    let margin = |k: f64| if member { threshold / k } else { k / threshold };
    let decided = if member {
        bounds.upper < threshold
    } else {
        bounds.lower >= threshold
    };
    if decided {
        let k = if member { bounds.upper } else { bounds.lower };
        return Ok((margin(k), false, false, false));
    }
    let refuted = if member {
        bounds.lower >= threshold
    } else {
        bounds.upper < threshold
    };
    if refuted {
        let k = if member { bounds.lower } else { bounds.upper };
        return Ok((margin(k), true, false, false));
    }
    match kernel(body, x, cfg) {
        Ok(k) => {
            let (lo, hi) = (k.value - k.error, k.value + k.error);
            let violated = if member { lo >= threshold } else { hi < threshold };
            let undecided = if member {
                hi >= threshold && !violated
            } else {
                lo < threshold && !violated
            };
            Ok((margin(k.value), violated, true, undecided))
        }
        Err(Error::QuadratureNotConverged { .. }) => Ok((f64::NAN, false, true, true)),
        Err(e) => Err(e),
    }
}

/// Draw `count` uniform points of `body` by rejection from its bounding box.
pub fn sample_body(body: &Body, count: usize, seed: u64) -> Vec<Point> {
    let mut s = SamplerState::new(body, seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = s.next_point();
        if body.contains(&x) {
            out.push(x);
        }
    }
    out
}

pub fn sandwich_check(
    body: &Body,
    delta: f64,
    directions: &[Direction],
    cfg: &QuadratureConfig,
    samples: usize,
    seed: u64,
) -> Result<SandwichReport> {
    let c = constants(body.dim())?;
    let fba = build(body, delta, directions)?;
    let points = sample_body(body, samples, seed);
    let d2 = delta * delta;
    let outcomes: Vec<(bool, (f64, bool, bool, bool))> = points
        .par_iter()
        .map(|x| {
            let member = fba.member(x);
            let threshold = if member { c.u / d2 } else { c.ell / d2 };
            sandwich_point(body, x, member, threshold, cfg).map(|o| (member, o))
        })
        .collect::<Result<_>>()?;
    let mut r = SandwichReport {
        delta,
        samples: points.len(),
        members: 0,
        violations_lower: 0,
        violations_upper: 0,
        worst_margin_lower: f64::INFINITY,
        worst_margin_upper: f64::INFINITY,
        quadrature_evaluations: 0,
        undecided: 0,
    };
    for (member, (margin, violated, quad, undecided)) in outcomes {
        r.quadrature_evaluations += quad as usize;
        r.undecided += undecided as usize;
        if member {
            r.members += 1;
            r.violations_upper += violated as usize;
            r.worst_margin_upper = r.worst_margin_upper.min(margin);
        } else {
            r.violations_lower += violated as usize;
            r.worst_margin_lower = r.worst_margin_lower.min(margin);
        }
    }
    Ok(r)
}

/// `δ² K_D(b) ≥ 4^{-(n+1)}` at every barycenter.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockiReport {
    pub delta: f64,
    pub min_scaled: f64,
    pub argmin: Point,
    pub bound: f64,
    /// Absolute quadrature error at the minimum.
    pub band: f64,
    pub points: usize,
    pub flagged: usize,
}

impl BlockiReport {
    pub fn holds(&self) -> bool {
        self.min_scaled >= self.bound - self.band
    }

    pub fn from_samples(n: usize, delta: f64, samples: &[BoundarySample]) -> Result<Self> {
        let row = DeltaRow::from_samples(delta, samples)?;
        Ok(Self {
            delta,
            min_scaled: row.lower,
            argmin: row.argmin,
            bound: constants(n)?.ell,
            band: row.lower_error,
            points: row.samples,
            flagged: row.flagged,
        })
    }
}

pub fn blocki_consequence_check(
    body: &Body,
    delta: f64,
    directions: &[Direction],
    cfg: &QuadratureConfig,
) -> Result<BlockiReport> {
    let samples = boundary_samples(body, delta, directions, cfg)?;
    BlockiReport::from_samples(body.dim(), delta, &samples)
}

/// `vol(E) vol(E°)` for an origin-symmetric body.
pub fn santalo_product(e: &Body) -> Result<f64> {
    Ok(e.volume() * e.polar()?.volume())
}

/// `K_E(0)` against `n! vol(E°) / (πⁿ vol(E))`, and the Santaló product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NazarovReport {
    pub kernel_at_origin: f64,
    pub kernel_error: f64,
    pub bound: f64,
    /// `K_E(0) / bound`.
    pub ratio: f64,
    pub santalo_product: f64,
    /// `ω_n²`.
    pub santalo_bound: f64,
}

impl NazarovReport {
    pub fn holds(&self) -> bool {
        self.ratio <= 1.0 + self.kernel_error / self.bound
    }

    pub fn santalo_holds(&self) -> bool {
        self.santalo_product <= self.santalo_bound * (1.0 + 1e-12)
    }
}

pub fn nazarov_check(e: &Body, cfg: &QuadratureConfig) -> Result<NazarovReport> {
    let n = e.dim();
    let polar = e.polar()?;
    let (vol, pvol) = (e.volume(), polar.volume());
    let k = kernel(e, &Point::zeros(n), cfg)?;
    let bound = factorial(n) * pvol / (std::f64::consts::PI.powi(n as i32) * vol);
    let omega = ball_volume(n);
    Ok(NazarovReport {
        kernel_at_origin: k.value,
        kernel_error: k.error,
        bound,
        ratio: k.value / bound,
        santalo_product: vol * pvol,
        santalo_bound: omega * omega,
    })
}

/// One row of a limit table; `gap = value / target - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitRow {
    pub parameter: f64,
    pub value: f64,
    pub target: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub rows: Vec<LimitRow>,
    /// Boundary point the limit is taken at.
    pub base_point: Point,
}

impl LimitReport {
    /// `|gap|` non-increasing along the rows.
    pub fn converging(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].gap.abs() <= w[0].gap.abs())
    }
}

/// Boundary point with outward normal `v`, and the curvature there.
fn ellipsoid_base(body: &Body, v: &Direction) -> Result<(Point, f64)> {
    let Body::Ellipsoid(e) = body else {
        return Err(Error::WrongVariant {
            expected: "ellipsoid",
            got: body.kind(),
        });
    };
    if v.dim() != body.dim() {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            got: v.dim(),
        });
    }
    let at = e.shape.transpose() * v.as_point();
    let x0 = &e.center + &e.shape * &at / at.norm();
    let kappa = e.gauss_curvature(&x0);
    Ok((x0, kappa))
}

/// `Δ(x₀, δ)^{n+1} / δ²` against `2^{-(n+1)} ((n+1)/ω_{n-1})² κ(x₀)`, where
/// `Δ` is the width of the cap of volume `δ` with outward normal `v`.
pub fn scwe_limit_check(body: &Body, v: &Direction, deltas: &[f64]) -> Result<LimitReport> {
    let (x0, kappa) = ellipsoid_base(body, v)?;
    let n = body.dim();
    let target = 0.5f64.powi(n as i32 + 1) * ((n + 1) as f64 / ball_volume(n - 1)).powi(2) * kappa;
    let rows = deltas
        .iter()
        .map(|&delta| {
            let w = crate::cap::cap_width(body, v, delta)?;
            let value = w.powi(n as i32 + 1) / (delta * delta);
            Ok(LimitRow {
                parameter: delta,
                value,
                target,
                gap: value / target - 1.0,
            })
        })
        .collect::<Result<_>>()?;
    Ok(LimitReport { rows, base_point: x0 })
}

/// `d^{n+1} K_D(x₀ - d v)` against `n!/(4π)ⁿ κ(x₀)`. Quadrature failures give
/// `NaN` rows.
pub fn hormander_limit_check(
    body: &Body,
    v: &Direction,
    distances: &[f64],
    cfg: &QuadratureConfig,
) -> Result<LimitReport> {
    let (x0, kappa) = ellipsoid_base(body, v)?;
    let n = body.dim();
    let target = factorial(n) / (4.0 * std::f64::consts::PI).powi(n as i32) * kappa;
    let rows = distances
        .iter()
        .map(|&d| {
            let x = &x0 - v.as_point() * d;
            let value = match kernel(body, &x, cfg) {
                Ok(k) => d.powi(n as i32 + 1) * k.value,
                Err(Error::QuadratureNotConverged { .. }) => f64::NAN,
                Err(e) => return Err(e),
            };
            Ok(LimitRow {
                parameter: d,
                value,
                target,
                gap: value / target - 1.0,
            })
        })
        .collect::<Result<_>>()?;
    Ok(LimitReport { rows, base_point: x0 })
}

/// Pointwise checks of `K_{A(D)+b}(Ax+b) |det A|² = K_D(x)` and
/// `A(D_δ) + b = (A(D)+b)_{|det A| δ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineReport {
    pub det: f64,
    pub kernel_points: usize,
    /// Largest relative deviation in the kernel law.
    pub kernel_deviation: f64,
    pub kernel_tolerance: f64,
    /// Radial gap between `A(D_δ)+b` and the floating body of the image.
    pub radial_gap: f64,
    pub gap_tolerance: f64,
}

impl AffineReport {
    pub fn holds(&self) -> bool {
        self.kernel_deviation <= self.kernel_tolerance && self.radial_gap <= self.gap_tolerance
    }
}

pub const AFFINE_GAP_TOLERANCE: f64 = 1e-5;

fn probe_rays(n: usize, count: usize) -> Result<Vec<Direction>> {
    match n {
        1 => direction_grid(1, 2),
        2 => Ok(uniform_directions(count)),
        _ => Ok(fibonacci_directions(count)),
    }
}

pub fn affine_invariance_check(
    body: &Body,
    a: &Matrix,
    b: &Point,
    delta: f64,
    directions: &[Direction],
    cfg: &QuadratureConfig,
) -> Result<AffineReport> {
    let n = body.dim();
    if a.nrows() != n || a.ncols() != n || b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let det = a.determinant();
    let a_inv = a.clone().try_inverse().ok_or(Error::SingularMap(det))?;
    if !(det.abs() > 0.0) {
        return Err(Error::SingularMap(det));
    }
    let image = body.affine_image(a, b)?;
    let c = body.centroid();
    let probes: Vec<Point> = std::iter::once(c.clone())
        .chain(probe_rays(n, 8)?.iter().map(|d| {
            let d = d.as_point();
            &c + d * (0.6 * body.ray_exit(&c, d))
        }))
        .collect();
    let det2 = det * det;
    let kernel_deviation = probes
        .par_iter()
        .map(|x| {
            let k = kernel(body, x, cfg)?.value;
            let ki = kernel(&image, &(a * x + b), cfg)?.value;
            Ok((ki * det2 / k - 1.0).abs())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let a_inv_t = a_inv.transpose();
    let mapped = directions
        .iter()
        .map(|d| Direction::new(&a_inv_t * d.as_point()))
        .collect::<Result<Vec<_>>>()?;
    let f = build(body, delta, directions)?;
    let g = build(&image, delta * det.abs(), &mapped)?;
    let center = a * &c + b;
    let rays = probe_rays(n, if n == 2 { 120 } else { 200 })?;
    let radial_gap = radial_gap_between(
        &image,
        |y| g.member(y),
        |y| f.member(&(&a_inv * (y - b))),
        &center,
        &rays,
    )?;
    Ok(AffineReport {
        det,
        kernel_points: probes.len(),
        kernel_deviation,
        kernel_tolerance: 5.0 * cfg.rel_tol,
        radial_gap,
        gap_tolerance: AFFINE_GAP_TOLERANCE,
    })
}
