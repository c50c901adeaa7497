use thiserror::Error;

/// Errors raised by geometry, quadrature, and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("singular linear map (|det| = {0:e})")]
    SingularMap(f64),
    #[error("body is not origin-symmetric")]
    NotSymmetric,
    #[error("hyperplane does not meet the interior of the body")]
    EmptySection,
    #[error("delta {delta:e} outside the admissible range (0, {max:e})")]
    DeltaOutOfRange { delta: f64, max: f64 },
    #[error("points are affinely dependent")]
    DegenerateBody,
    #[error("expected {expected} body, got {got}")]
    WrongVariant {
        expected: &'static str,
        got: &'static str,
    },
    #[error("floating body is empty")]
    EmptyFloatingBody,
    #[error("point is not interior to the body")]
    PointOutsideBody,
    #[error("center is not interior to both sets")]
    CenterNotInterior,
    #[error("quadrature did not converge: estimate {value:e}, achieved error {achieved:e}, requested {requested:e}")]
    QuadratureNotConverged {
        value: f64,
        achieved: f64,
        requested: f64,
    },
    #[error("kernel value {value:e} ± {error:e} straddles the threshold {threshold:e}")]
    IndeterminateAtTolerance {
        value: f64,
        error: f64,
        threshold: f64,
    },
    #[error("level {level:e} is not above the kernel minimum {minimum:e}")]
    MBelowMinimum { level: f64, minimum: f64 },
    #[error("{flagged} of {total} kernel evaluations missed the tolerance")]
    TooManyFlagged { flagged: usize, total: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
