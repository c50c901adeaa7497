//! The Laplace transform `J_D(t) = ∫_D e^{-2x·t} dx`, evaluated on a log
//! scale so that large `|t|` neither overflows nor loses relative accuracy.

use crate::body::{ball_volume, factorial, Body};
use crate::quadrature::{integrate, GaussLegendre};
use crate::tol;
use crate::Point;

const MAX_POINTS: usize = 4;
const SERIES_TERMS: usize = 60;

/// Divided difference `exp[w_0, ..., w_k]` via its Taylor series about the
/// mean: `e^c Σ_m h_m(w - c) / (m + k)!`, `h_m` the complete homogeneous
/// symmetric polynomials.
fn exp_divdiff_series(w: &[f64]) -> f64 {
    let k = w.len() - 1;
    let c = w.iter().sum::<f64>() / w.len() as f64;
    let mut y = [0.0; MAX_POINTS];
    let mut r = 0.0_f64;
    for (yi, wi) in y.iter_mut().zip(w) {
        *yi = wi - c;
        r = r.max(yi.abs());
    }
    // |h_m| / (m+k)! ≤ r^m / (m! k!) bounds the tail; the sum is at least e^{-r} / k!.
    let mut terms = 1;
    let mut bound = 1.0;
    while terms < SERIES_TERMS && bound > 1e-17 * (-r).exp() {
        bound *= r / terms as f64;
        terms += 1;
    }
    // h[m] for the variables processed so far.
    let mut h = [0.0; SERIES_TERMS];
    h[0] = 1.0;
    for m in 1..terms {
        h[m] = h[m - 1] * y[0];
    }
    for &yj in &y[1..w.len()] {
        for m in 1..terms {
            h[m] += yj * h[m - 1];
        }
    }
    let mut fact = factorial(k);
    let mut sum = 0.0;
    for (m, hm) in h[..terms].iter().enumerate() {
        if m > 0 {
            fact *= (m + k) as f64;
        }
        sum += hm / fact;
    }
    c.exp() * sum
}

/// `ln exp[u_0, ..., u_k]` for up to four points, stable for clustered and
/// widely spread arguments alike.
pub fn log_exp_divided_difference(u: &[f64]) -> f64 {
    let k1 = u.len();
    assert!((1..=MAX_POINTS).contains(&k1));
    let mut w = [0.0; MAX_POINTS];
    w[..k1].copy_from_slice(u);
    let w = &mut w[..k1];
    w.sort_by(f64::total_cmp);
    let shift = w[k1 - 1];
    for x in w.iter_mut() {
        *x -= shift;
    }
    let mut dd = [[0.0; MAX_POINTS]; MAX_POINTS];
    for i in 0..k1 {
        dd[i][i] = w[i].exp();
    }
    for len in 2..=k1 {
        for i in 0..=(k1 - len) {
            let j = i + len - 1;
            let spread = w[j] - w[i];
            dd[i][j] = if spread < tol::DIVDIFF_CLUSTER {
                exp_divdiff_series(&w[i..=j])
            } else {
                (dd[i + 1][j] - dd[i][j - 1]) / spread
            };
        }
    }
    shift + dd[0][k1 - 1].ln()
}

/// `ln ∫_0^π sin^p ψ · e^{2a cos ψ} dψ` for `a ≥ 0`.
pub(crate) fn log_sphere_moment(p: usize, a: f64) -> f64 {
    let a = a.abs();
    let rule = GaussLegendre::new(16);
    let width = 1.0 / a.max(1.0).sqrt();
    let mut breaks = vec![0.0];
    let mut b = width;
    while b < std::f64::consts::PI {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(std::f64::consts::PI);
    let res = integrate(
        |psi: f64| {
            let s = (0.5 * psi).sin();
            psi.sin().powi(p as i32) * (-4.0 * a * s * s).exp()
        },
        &breaks,
        tol::SECTION_QUADRATURE,
        0.0,
        &rule,
        40,
    );
    2.0 * a + res.value.ln()
}

/// `ln ∫_{𝔹ⁿ} e^{2a u_1} du` by quadrature of section measures.
pub fn log_ball_laplace(n: usize, a: f64) -> f64 {
    let a = a.abs();
    if n == 1 {
        // ∫_{-1}^{1} e^{2au} du = e^{2a} (1 - e^{-4a}) / (2a)
        return 2.0 * a + 2f64.ln() + log_one_minus_exp_over(4.0 * a);
    }
    ball_volume(n - 1).ln() + log_sphere_moment(n, a)
}

/// `ln((1 - e^{-y}) / y)` for `y ≥ 0`.
fn log_one_minus_exp_over(y: f64) -> f64 {
    if y.abs() < tol::BOX_SERIES {
        (1.0 - y / 2.0 + y * y / 6.0 - y * y * y / 24.0).ln()
    } else {
        (-(-y).exp_m1() / y).ln()
    }
}

/// `ln ∫_lo^hi e^{-2zt} dz`.
pub fn log_interval_laplace(lo: f64, hi: f64, t: f64) -> f64 {
    let len = hi - lo;
    let y = 2.0 * len * t;
    if t >= 0.0 {
        -2.0 * lo * t + len.ln() + log_one_minus_exp_over(y)
    } else {
        -2.0 * hi * t + len.ln() + log_one_minus_exp_over(-y)
    }
}

/// `ln J` of a simplex with the given vertices, `ln(n! vol) + ln exp[-2 p_i · t]`.
pub fn log_simplex_laplace(vertices: &[Point], t: &Point) -> f64 {
    let n = vertices.len() - 1;
    let mut m = nalgebra::DMatrix::zeros(n, n);
    for j in 0..n {
        m.set_column(j, &(&vertices[j + 1] - &vertices[0]));
    }
    let weight = m.determinant().abs();
    let u: Vec<f64> = vertices.iter().map(|p| -2.0 * p.dot(t)).collect();
    weight.ln() + log_exp_divided_difference(&u)
}

pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + terms.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `ln J_D(t)`.
pub fn log_laplace(body: &Body, t: &Point) -> f64 {
    match body {
        Body::Box(b) => (0..b.lo.len())
            .map(|i| log_interval_laplace(b.lo[i], b.hi[i], t[i]))
            .sum(),
        Body::Simplex(s) => log_simplex_laplace(&s.vertices, t),
        Body::Polytope(p) => {
            let terms: Vec<f64> = p
                .fan_simplices()
                .iter()
                .map(|s| log_simplex_laplace(s, t))
                .collect();
            log_sum_exp(&terms)
        }
        Body::Ellipsoid(e) => {
            let n = e.center.len();
            let a = (e.shape.transpose() * t).norm();
            e.shape.determinant().abs().ln() - 2.0 * e.center.dot(t) + log_ball_laplace(n, a)
        }
    }
}

/// `J_D(t) = ∫_D e^{-2x·t} dx`.
pub fn laplace(body: &Body, t: &Point) -> f64 {
    log_laplace(body, t).exp()
}
