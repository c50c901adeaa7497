//! Gauss–Legendre panels with globally adaptive bisection.
//!
//! A panel's error is the refinement difference `|Q(P) - Q(P_left) - Q(P_right)|`;
//! the panel with the largest difference is split until the summed
//! differences meet the requested tolerance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and panel parameters for kernel quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Target relative error of a kernel value.
    pub rel_tol: f64,
    /// Truncation tolerance, relative to the integrand's peak.
    pub trunc_tol: f64,
    /// Maximum bisection depth of any panel.
    pub max_subdivisions: u32,
    /// Gauss–Legendre nodes per panel and axis.
    pub base_nodes: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            trunc_tol: 1e-14,
            max_subdivisions: 40,
            base_nodes: 32,
        }
    }
}

impl QuadratureConfig {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = self.rel_tol > 0.0
            && self.trunc_tol > 0.0
            && self.max_subdivisions > 0
            && self.base_nodes >= 2;
        if !positive {
            return Err(Error::InvalidArgument(
                "quadrature parameters must be positive".into(),
            ));
        }
        if !(self.trunc_tol < self.rel_tol) {
            return Err(Error::InvalidArgument(format!(
                "truncation tolerance {:e} must be below the relative tolerance {:e}",
                self.trunc_tol, self.rel_tol
            )));
        }
        Ok(())
    }
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule on `[a, b]`.
    pub fn apply<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

/// Outcome of an adaptive integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Sum of panel refinement differences.
    pub error: f64,
    pub converged: bool,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    err: f64,
    depth: u32,
}

const MAX_PANELS: usize = 4096;

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let (mut sum, mut c) = (0.0_f64, 0.0_f64);
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, with the interior
/// breakpoints as initial panel boundaries, to
/// `max(abs_tol, rel_tol · |value|)`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    rule: &GaussLegendre,
    max_depth: u32,
) -> Integral {
    let mut evals = 0usize;
    let n = rule.len();
    let make = |f: &mut F, a: f64, b: f64, whole: f64, depth: u32, evals: &mut usize| {
        let m = 0.5 * (a + b);
        let left = rule.apply(f, a, m);
        let right = rule.apply(f, m, b);
        *evals += 2 * n;
        Panel {
            a,
            b,
            left,
            right,
            err: (whole - left - right).abs(),
            depth,
        }
    };
    let mut panels: Vec<Panel> = Vec::with_capacity(64);
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let whole = rule.apply(&mut f, a, b);
        evals += n;
        panels.push(make(&mut f, a, b, whole, 0, &mut evals));
    }
    let mut converged = false;
    loop {
        let value = compensated_sum(panels.iter().map(|p| p.left + p.right));
        let error: f64 = panels.iter().map(|p| p.err).sum();
        let target = abs_tol.max(rel_tol * value.abs());
        if error <= target || !error.is_finite() {
            converged = error <= target;
            break;
        }
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.depth < max_depth)
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i);
        let Some(i) = worst else { break };
        if panels.len() >= MAX_PANELS {
            break;
        }
        let p = panels[i];
        let m = 0.5 * (p.a + p.b);
        let l = make(&mut f, p.a, m, p.left, p.depth + 1, &mut evals);
        let r = make(&mut f, m, p.b, p.right, p.depth + 1, &mut evals);
        panels[i] = l;
        panels.push(r);
    }
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = compensated_sum(panels.iter().map(|p| p.left + p.right));
    let error = compensated_sum(panels.iter().map(|p| p.err));
    Integral {
        value,
        error,
        converged,
        evals,
    }
}
