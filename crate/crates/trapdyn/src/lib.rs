//! Trapping-region analysis for quadratic systems with lossless quadratic
//! nonlinearities.
//!
//! Systems of the form `dx/dt = c + L x + f(x)` with `x' f(x) = 0` (Lorenz,
//! many Galerkin fluid models) are bounded exactly when some coordinate
//! translation makes the symmetric shifted linear part negative definite.
//! This crate decides that question by a semidefinite program, computes the
//! tightest spherical trapping region and its critical boundary points by
//! two independent convex routes, and confirms the results with brute-force
//! sampling and numerical simulation.
//!
//! - [`model`]: exact system representation, coordinate translation, energy
//!   rates, and the ellipsoid of non-decreasing energy.
//! - [`opt`]: the existence SDP with infeasibility certificates, the tight
//!   radius via dual SDP and via scalar reduction, and KKT recovery of the
//!   critical sphere.
//! - [`oracle`]: sampling and lattice verifiers, independent of the solver.
//! - [`sim`]: fixed-step RK4 integration and trapping verdicts.
//! - [`systems`]: the example systems, including the stacked-rotated Lorenz
//!   family.

pub mod error;
pub mod model;
pub mod opt;
pub mod oracle;
pub mod sim;
pub mod systems;

pub use error::{Error, Result};
pub use model::{EnergyEllipsoid, LosslessQuadraticSystem, QuadraticTensor, ShiftedForm};
pub use opt::{
    analyze, conservative_radius, critical_sphere, solve_existence, tight_radius_scalar,
    tight_radius_sdp, Analysis, CenterPolicy, CriticalSphere, ExistenceResult, ExistenceStatus,
    SolverOptions, TrappingRegion,
};
pub use oracle::{brute_force_radius, lattice_search_shift, sample_e_boundary, SampleReport};
pub use sim::{check_ultimate_bound, energy_trace, integrate, monotonicity_outside, Trajectory};
