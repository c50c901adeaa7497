//! Fixed numerical tolerances shared by every routine.
//!
//! Acceptance runs depend on these values; change them only together with
//! the tests that pin them.

/// Slack for strict interior tests (`contains`).
pub const INTERIOR: f64 = 1e-12;

/// Unit-norm slack for [`crate::Direction`].
pub const UNIT_NORM: f64 = 1e-12;

/// Vertex/half-space consistency of a polytope's two representations.
pub const POLYTOPE_CONSISTENCY: f64 = 1e-10;

/// Origin-symmetry slack for polar duality.
pub const SYMMETRY: f64 = 1e-10;

/// Residual bound for `cut_depth`, relative to the body volume.
pub const CUT_RESIDUAL: f64 = 1e-12;

/// Iteration cap for the bracketed bisection in `cut_depth`.
pub const BISECTION_MAX_ITER: usize = 200;

/// Relative tolerance for 1D section-measure integrals (ellipsoid caps, ball transforms).
pub const SECTION_QUADRATURE: f64 = 1e-12;

/// Containment slack and duality-gap target for the minimum-volume ellipsoid.
pub const MVEE_GAP: f64 = 1e-7;

/// Radial tolerance for boundary bisections in floating-body comparisons.
pub const RADIAL: f64 = 1e-9;

/// Radial tolerance for tracing Bergman sublevel boundaries.
pub const SUBLEVEL_RADIAL: f64 = 1e-8;

/// Step tolerance of the coordinate-wise golden-section descent.
pub const KERNEL_MIN_STEP: f64 = 1e-9;

/// Below this separation, simplex Laplace exponents are summed by Taylor series.
pub const DIVDIFF_CLUSTER: f64 = 0.5;

/// Below this `|2 t_i (hi_i - lo_i)|` the box Laplace factor uses its series.
pub const BOX_SERIES: f64 = 1e-6;

/// Hyperplane gap under which kernel quadrature is expected to be expensive.
pub const NEAR_BOUNDARY_GAP: f64 = 1e-3;
