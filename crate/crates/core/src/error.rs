//! Error type shared across the crate.
//!
//! Conditions that are warnings rather than failures (an ill-conditioned
//! shift, a nearly defective eigenvector basis) are carried as flags on the
//! corresponding result types, not as errors.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("segment family is empty")]
    EmptyFamily,

    #[error("segment family has a single segment; gap structure is undefined")]
    NoGapStructure,

    #[error("segment [{alpha}, {beta}] has alpha > beta")]
    InvalidSegment { alpha: f64, beta: f64 },

    #[error("segments [{a0}, {b0}] and [{a1}, {b1}] overlap or touch")]
    OverlappingSegments { a0: f64, b0: f64, a1: f64, b1: f64 },

    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("eigenvalue {value} lies outside every segment")]
    SpectrumOutsideSegments { value: f64 },

    #[error("shift {re}{im:+}i is within {distance:.3e} of the spectrum")]
    LambdaOnSpectrum { re: f64, im: f64, distance: f64 },

    #[error("shifted matrix at {re}{im:+}i is numerically singular")]
    SingularShift { re: f64, im: f64 },

    #[error("point {re}{im:+}i lies inside the b-neighborhood: dist {delta:.3e} <= b = {b:.3e}")]
    InsideNeighborhood { re: f64, im: f64, delta: f64, b: f64 },

    #[error(
        "contour side comes within {distance:.3e} of the spectrum neighborhood (guard {guard:.3e})"
    )]
    ContourTouchesSpectrumNeighborhood { distance: f64, guard: f64 },

    #[error(
        "quadrature stalled at {nodes_per_edge} nodes/edge: residual {residual:.3e}, target {target:.3e}"
    )]
    QuadratureStalled {
        nodes_per_edge: usize,
        residual: f64,
        target: f64,
    },

    #[error("contour passes through the spectrum near {re}{im:+}i")]
    ContourHitsSpectrum { re: f64, im: f64 },

    #[error("eigenvalue {re}{im:+}i lies in no b-neighborhood of any segment")]
    UnassignedEigenvalue { re: f64, im: f64 },

    #[error("projection system incomplete: ||sum Q_j - I|| = {residual:.3e} exceeds {limit:.3e}")]
    IncompleteSystem { residual: f64, limit: f64 },

    #[error("Gram operator is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    IndefiniteGram { min_eigenvalue: f64 },

    #[error("projection range {index} yields rank {found}, expected {expected}")]
    RankDeficientBlock {
        index: usize,
        found: usize,
        expected: usize,
    },

    #[error("eigendecomposition did not converge")]
    EigDidNotConverge,

    #[error("invalid instance spec: {reason}")]
    InvalidSpec { reason: String },

    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
