//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by system construction, analysis, and simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("quadratic term is not lossless: defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    NotLossless { defect: f64, tol: f64 },

    #[error("A_s is not negative definite: largest eigenvalue {lambda1:.6e}")]
    NotNegativeDefinite { lambda1: f64 },

    #[error("ellipsoid is degenerate (zero drift in shifted coordinates)")]
    DegenerateEllipsoid,

    #[error("conic solver failed with status {status}: {detail}")]
    Solver { status: String, detail: String },

    #[error("solver output failed verification: {0}")]
    Verification(String),

    #[error("critical sphere inconsistency: R^2 - |center|^2 = {value:.3e} < 0")]
    InconsistentSphere { value: f64 },

    #[error("radius routes disagree: scalar {scalar:.9e} vs dual SDP {sdp:.9e}")]
    RouteMismatch { scalar: f64, sdp: f64 },

    #[error("trajectory diverged at t = {t}: |x| = {norm:.3e}")]
    Diverged { t: f64, norm: f64 },

    #[error("non-finite state encountered at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("lattice search refused for n = {n}: {points} points/axis is ~{evals:.2e} eigensolves")]
    LatticeTooLarge { n: usize, points: usize, evals: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
