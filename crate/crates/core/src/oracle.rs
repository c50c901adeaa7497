//! Seeded Monte Carlo reference integrators.
//!
//! Samples are drawn uniformly from the body's bounding box by ChaCha8 streams:
//! chunk `k` of a run uses stream `k` of the seed, so estimates do not depend
//! on the number of worker threads.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::body::{Body, CutSpec};
use crate::quadrature::compensated_sum;
use crate::Point;

const CHUNK: u64 = 1 << 16;

/// Reproducible uniform sampler over a box.
#[derive(Debug, Clone)]
pub struct SamplerState {
    pub seed: u64,
    /// Points drawn so far.
    pub counter: u64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    rng: ChaCha8Rng,
}

impl SamplerState {
    /// Sampler over the bounding box of `body`.
    pub fn new(body: &Body, seed: u64) -> Self {
        let (lo, hi) = body.bounding_box();
        Self::with_box(lo, hi, seed, 0)
    }

    pub fn with_box(lo: Vec<f64>, hi: Vec<f64>, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            seed,
            counter: 0,
            lo,
            hi,
            rng,
        }
    }

    pub fn box_volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn next_point(&mut self) -> Point {
        self.counter += 1;
        let n = self.lo.len();
        Point::from_iterator(
            n,
            (0..n).map(|i| self.lo[i] + (self.hi[i] - self.lo[i]) * self.rng.random::<f64>()),
        )
    }
}

/// Estimate and standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
}

impl McEstimate {
    /// Whether `x` lies within `k` standard errors.
    pub fn brackets(&self, x: f64, k: f64) -> bool {
        (self.value - x).abs() <= k * self.stderr
    }
}

/// `vol(box) · mean(f)` over `samples` uniform box points, `f` zero off the body.
pub fn mc_box_mean<F>(body: &Body, samples: u64, seed: u64, f: F) -> McEstimate
where
    F: Fn(&Point) -> f64 + Sync,
{
    let (lo, hi) = body.bounding_box();
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut s = SamplerState::with_box(lo.clone(), hi.clone(), seed, c);
            let count = CHUNK.min(samples - c * CHUNK);
            let (mut sum, mut sq) = (0.0, 0.0);
            for _ in 0..count {
                let x = s.next_point();
                if body.contains(&x) {
                    let v = f(&x);
                    sum += v;
                    sq += v * v;
                }
            }
            (sum, sq)
        })
        .collect();
    let n = samples.max(1) as f64;
    let mean = compensated_sum(partial.iter().map(|p| p.0)) / n;
    let second = compensated_sum(partial.iter().map(|p| p.1)) / n;
    let var = (second - mean * mean).max(0.0);
    let vol = SamplerState::with_box(lo, hi, seed, 0).box_volume();
    McEstimate {
        value: vol * mean,
        stderr: vol * (var / n).sqrt(),
    }
}

/// Rejection estimate of `vol(body)`.
pub fn mc_volume(body: &Body, samples: u64, seed: u64) -> McEstimate {
    mc_box_mean(body, samples, seed, |_| 1.0)
}

/// Estimate of `J(t) = ∫ e^{-2x·t} dx`.
pub fn mc_laplace(body: &Body, t: &Point, samples: u64, seed: u64) -> McEstimate {
    mc_box_mean(body, samples, seed, |x| (-2.0 * x.dot(t)).exp())
}

/// Rejection estimate of `vol{x ∈ body : x · v ≥ r}`.
pub fn mc_cap_volume(body: &Body, cut: &CutSpec, samples: u64, seed: u64) -> McEstimate {
    let v = cut.direction.as_point();
    mc_box_mean(body, samples, seed, |x| {
        if x.dot(v) >= cut.offset {
            1.0
        } else {
            0.0
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::Direction;
    use std::f64::consts::{PI, SQRT_2};

    #[test]
    fn volumes_are_bracketed() {
        let e = mc_volume(&Body::unit_ball(2), 1_000_000, 7);
        assert!(e.brackets(PI, 3.0), "{e:?}");
        let e = mc_volume(&Body::unit_triangle(), 1_000_000, 8);
        assert!(e.brackets(0.5, 3.0), "{e:?}");
    }

    #[test]
    fn same_seed_same_stream() {
        let a = mc_volume(&Body::unit_ball(2), 100_000, 42);
        let b = mc_volume(&Body::unit_ball(2), 100_000, 42);
        assert_eq!(a, b);
        let c = mc_volume(&Body::unit_ball(2), 100_000, 43);
        assert_ne!(a, c);
        assert!((a.value - c.value).abs() <= 4.0 * (a.stderr.hypot(c.stderr)));
        let mut s = SamplerState::new(&Body::unit_square(), 1);
        let mut t = SamplerState::new(&Body::unit_square(), 1);
        for _ in 0..10 {
            assert_eq!(s.next_point(), t.next_point());
        }
        assert_eq!(s.counter, 10);
    }

    #[test]
    fn laplace_at_zero_is_volume() {
        let b = Body::unit_ball(2);
        let z = Point::zeros(2);
        assert_eq!(mc_laplace(&b, &z, 50_000, 3), mc_volume(&b, 50_000, 3));
    }

    #[test]
    fn square_laplace_and_caps() {
        let sq = Body::unit_square();
        let e = mc_laplace(&sq, &Point::from_vec(vec![1.0, 0.0]), 10_000_000, 11);
        assert!(e.brackets((1.0 - (-2f64).exp()) / 2.0, 3.0), "{e:?}");
        let up = Direction::from_slice(&[0.0, 1.0]).unwrap();
        let e = mc_cap_volume(&sq, &CutSpec::new(up, 0.5), 1_000_000, 12);
        assert!(e.brackets(0.5, 3.0));
        let diag = Direction::from_slice(&[1.0, 1.0]).unwrap();
        let e = mc_cap_volume(&sq, &CutSpec::new(diag, 1.5 / SQRT_2), 1_000_000, 13);
        assert!(e.brackets(0.125, 3.0));
        let disk = Body::unit_ball(2);
        let e = mc_cap_volume(&disk, &CutSpec::new(Direction::from_angle(0.3), 0.0), 1_000_000, 14);
        assert!(e.brackets(PI / 2.0, 3.0));
    }
}
