//! Convex floating bodies and Bergman kernels of tube domains over convex bodies.
//!
//! Points and matrices are dynamically sized `nalgebra` types; dimensions 1, 2
//! and 3 are supported throughout.

pub mod bergman;
pub mod body;
pub mod cap;
pub mod error;
pub mod floating;
pub mod invariants;
pub mod laplace;
pub mod mvee;
pub mod oracle;
pub mod polytope;
pub mod quadrature;
pub mod report;
pub mod tol;

pub type Point = nalgebra::DVector<f64>;
pub type Matrix = nalgebra::DMatrix<f64>;

pub use bergman::{kernel, kernel_bounds, kernel_min, KernelBounds, KernelValue};
pub use body::{unit_ball_volume, Body, BodySpec, BoxBody, CutSpec, Direction, Ellipsoid, Simplex};
pub use cap::{cap_volume, cap_width, cut_depth, section_barycenter};
pub use error::{Error, Result};
pub use floating::{build as build_floating_body, FloatingBodyApprox};
pub use invariants::{constants, theta_estimate, DimensionalConstants, ThetaReport};
pub use laplace::{laplace, log_laplace};
pub use mvee::{john_inner, mvee};
pub use quadrature::QuadratureConfig;
