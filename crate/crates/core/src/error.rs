//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors produced by construction, validation, and numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A mass that must be strictly positive is zero or negative.
    #[error("mass `{field}` must be > 0, got {value}")]
    NonPositiveMass { field: &'static str, value: f64 },

    /// A mass that must be nonnegative is negative.
    #[error("mass `{field}` must be >= 0, got {value}")]
    NegativeMass { field: &'static str, value: f64 },

    /// An interaction coefficient is negative.
    #[error("interaction coefficient `{field}` must be >= 0, got {value}")]
    NegativeGamma { field: &'static str, value: f64 },

    /// A mass transfer asked for more than the source cluster holds.
    #[error("cluster {cluster} holds {available} of phase {phase}, cannot transfer {requested}")]
    InsufficientMass {
        cluster: usize,
        phase: u8,
        available: f64,
        requested: f64,
    },

    /// A cluster index is out of range.
    #[error("cluster index {index} out of range (configuration has {len} clusters)")]
    IndexOutOfRange { index: usize, len: usize },

    /// Two balls that must be disjoint overlap.
    #[error("balls overlap: center distance {distance} < radius sum {radius_sum}")]
    OverlappingBalls { distance: f64, radius_sum: f64 },

    /// An iterative solve did not reach the requested residual.
    #[error("{context}: residual {residual} above tolerance {tolerance} after {iterations} iterations")]
    ConvergenceFailure {
        context: &'static str,
        residual: f64,
        tolerance: f64,
        iterations: usize,
    },

    /// A quadrature spec is unusable for the requested integral.
    #[error("invalid quadrature spec: {reason}")]
    InvalidQuadrature { reason: String },

    /// A competitor move was requested on a cluster with an empty phase.
    #[error("cluster {cluster} is not mixed (masses {m1}, {m2})")]
    NotMixed { cluster: usize, m1: f64, m2: f64 },

    /// A competitor construction's case hypothesis does not hold.
    #[error("competitor precondition violated: {reason}")]
    PreconditionViolated { reason: String },

    /// A cluster shape does not satisfy its own invariants.
    #[error("invalid cluster shape: {reason}")]
    InvalidShape { reason: String },

    /// Cluster masses do not add up to the prescribed totals.
    #[error("mass mismatch for phase {phase}: clusters sum to {sum}, expected {expected}")]
    MassMismatch { phase: u8, sum: f64, expected: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
