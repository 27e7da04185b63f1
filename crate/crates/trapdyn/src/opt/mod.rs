//! Convex trapping-region analysis.
//!
//! Existence is decided by the eigenvalue-minimization program
//!
//! ```text
//! a* = min_{m, a} a   s.t.   A_s(m) = L_s - sum_i m_i Q(i) <= a I
//! ```
//!
//! `a* < 0` iff some translation makes `A_s(m)` negative definite, i.e. iff
//! a monotonically attracting trapping region exists. When `a* >= 0` the
//! dual solution yields a matrix `Z >= 0` with `<Q(i), Z> = 0` and
//! `<L_s, Z> >= 0` that certifies infeasibility: for every `m`,
//! `<A_s(m), Z> = <L_s, Z> >= 0`, while negative definiteness would force
//! it negative.
//!
//! Given a valid center, the tightest spherical trapping region solves
//! `max |y|^2 s.t. d'y + y'A_s y >= 0`, a one-constraint QCQP whose dual
//!
//! ```text
//! min_{lambda >= 0, gamma} gamma
//! s.t. [[I + lambda A_s, lambda d / 2], [lambda d' / 2, -gamma]] <= 0
//! ```
//!
//! attains the same value. Two independent routes compute it: the dual SDP
//! above, and exact partial minimization to the scalar convex function
//! `g(lambda) = -(lambda^2/4) d'(I + lambda A_s)^+ d` on
//! `lambda >= 1/|lambda_1|`, minimized by golden-section search. Their
//! agreement is the library's primary self-check. The KKT stationarity
//! condition recovers the sphere of boundary states with non-decreasing
//! energy.

pub mod conic;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{LosslessQuadraticSystem, ShiftedForm};
use conic::{smat, svec, svec_sparse, ClarabelSolver, Cone, ConicProblem, ConicSolver};

/// Relative margin on `a*` below which existence is declared; see
/// [`SolverOptions::eps_neg`].
pub const EPS_NEG_REL: f64 = 1e-6;

/// Tolerance for re-verifying solver outputs against direct eigensolves.
pub const VERIFY_REL_TOL: f64 = 1e-7;

/// Required relative agreement between the scalar and dual-SDP radius routes.
pub const ROUTE_REL_TOL: f64 = 1e-6;

/// Relative eigenvalue threshold for the pseudoinverse and null space of
/// `I + lambda* A_s`.
pub const RANK_REL_TOL: f64 = 1e-8;

/// Certificate acceptance thresholds: smallest eigenvalue of the normalized
/// `Z`, tensor inner products, and `<L_s, Z>`.
pub const CERT_PSD_TOL: f64 = 1e-8;
pub const CERT_INNER_TOL: f64 = 1e-6;

/// Options threaded through every solver call.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Interior-point convergence tolerance.
    pub solver_tol: f64,
    /// Override for the strict-negativity margin; defaults to
    /// `EPS_NEG_REL * (1 + |L_s|_2)`.
    pub eps_neg: Option<f64>,
    pub max_iter: u32,
    pub verbose: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { solver_tol: 1e-9, eps_neg: None, max_iter: 200, verbose: false }
    }
}

impl SolverOptions {
    fn backend(&self) -> ClarabelSolver {
        ClarabelSolver { tol: self.solver_tol, max_iter: self.max_iter, verbose: self.verbose }
    }
}

/// Termination metadata reported alongside every solver-backed result.
#[derive(Debug, Clone, Serialize)]
pub struct SolverInfo {
    pub iterations: u32,
    pub status: String,
    pub wall_time_s: f64,
}

/// Outcome of the existence program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExistenceStatus {
    TrappingExists,
    NoTrappingRegion,
    NumericallyMarginal,
}

/// Optimal value and shift of the existence program, with the infeasibility
/// certificate when no trapping region exists.
#[derive(Debug, Clone)]
pub struct ExistenceResult {
    /// Optimal cost: the minimized largest eigenvalue of `A_s(m)`.
    pub a_star: f64,
    /// One optimal shift; the optimal set may be non-unique.
    pub m_star: DVector<f64>,
    pub status: ExistenceStatus,
    /// Frobenius-normalized dual certificate, present iff the
    /// theorem-of-alternatives conditions validate.
    pub certificate: Option<DMatrix<f64>>,
    pub solver: SolverInfo,
}

/// Spherical trapping region at a fixed center.
#[derive(Debug, Clone)]
pub struct TrappingRegion {
    pub m: DVector<f64>,
    /// Tightest radius (optimal value of the QCQP).
    pub r_tight: f64,
    /// `|d(m)| / |lambda_1|` from the eigenvalue bound.
    pub r_conservative: f64,
    /// Optimal dual multiplier; absent on the `d(m) = 0` equilibrium branch.
    pub lambda_star: Option<f64>,
    /// `|m| + R_tight`: ultimate bound in original coordinates.
    pub ultimate_bound_original: f64,
}

/// The set of QCQP maximizers: a sphere of dimension `n - rank` inside the
/// null space of `I + lambda* A_s`, in shifted coordinates.
#[derive(Debug, Clone)]
pub struct CriticalSphere {
    center: DVector<f64>,
    basis: DMatrix<f64>,
    radius: f64,
    rank: usize,
}

impl CriticalSphere {
    /// Sphere center `-(lambda*/2) (I + lambda* A_s)^+ d`.
    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    /// Orthonormal null-space basis `V` (n x (n - rank)).
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Sphere radius `sqrt(R*^2 - |center|^2)`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Rank of `I + lambda* A_s` under the pseudoinverse threshold.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Point `center + V w` for null-space coordinates `w`.
    pub fn point(&self, w: &DVector<f64>) -> DVector<f64> {
        &self.center + &self.basis * w
    }

    /// The axis-aligned representatives `center +- radius * v` for each
    /// basis column; just `center` when the null space is empty.
    pub fn representative_points(&self) -> Vec<DVector<f64>> {
        if self.basis.ncols() == 0 {
            return vec![self.center.clone()];
        }
        let mut out = Vec::with_capacity(2 * self.basis.ncols());
        for col in 0..self.basis.ncols() {
            let dir = self.basis.column(col) * self.radius;
            out.push(&self.center + &dir);
            out.push(&self.center - &dir);
        }
        out
    }
}

fn spectral_norm_sym(m: &DMatrix<f64>) -> f64 {
    let (eigs, _) = crate::model::sorted_symmetric_eigen(m);
    eigs[0].abs().max(eigs[eigs.len() - 1].abs())
}

fn tensor_inner(sys: &LosslessQuadraticSystem, i: usize, z: &DMatrix<f64>) -> f64 {
    // <Q(i), Z> over the sparse slice; off-diagonal triplets count twice.
    let mut acc = 0.0;
    for &(s, j, k, v) in sys.q().triplets() {
        if s == i {
            acc += if j == k { v * z[(j, k)] } else { 2.0 * v * z[(j, k)] };
        }
    }
    acc
}

/// Residuals of the theorem-of-alternatives conditions for a candidate
/// certificate (expects `Z` already Frobenius-normalized).
#[derive(Debug, Clone, Serialize)]
pub struct CertificateCheck {
    /// Smallest eigenvalue of `Z` (must be >= -CERT_PSD_TOL).
    pub min_eig: f64,
    /// `max_i |<Q(i), Z>|` (must be <= CERT_INNER_TOL).
    pub max_q_inner: f64,
    /// `<L_s, Z>` (must be >= -CERT_INNER_TOL).
    pub ls_inner: f64,
}

impl CertificateCheck {
    pub fn is_valid(&self) -> bool {
        self.min_eig >= -CERT_PSD_TOL
            && self.max_q_inner <= CERT_INNER_TOL
            && self.ls_inner >= -CERT_INNER_TOL
    }
}

/// Evaluates the certificate conditions for `Z` against `sys`.
pub fn check_certificate(sys: &LosslessQuadraticSystem, z: &DMatrix<f64>) -> CertificateCheck {
    let (eigs, _) = crate::model::sorted_symmetric_eigen(z);
    let max_q_inner = (0..sys.n())
        .map(|i| tensor_inner(sys, i, z).abs())
        .fold(0.0f64, f64::max);
    CertificateCheck {
        min_eig: eigs[eigs.len() - 1],
        max_q_inner,
        ls_inner: (sys.l_sym() * z).trace(),
    }
}

/// Solves the existence program `min a s.t. A_s(m) <= a I` and classifies
/// the outcome.
///
/// The optimal cost is re-verified against a direct eigensolve of
/// `A_s(m*)`; a disagreement beyond `VERIFY_REL_TOL` is an error rather
/// than a silently wrong answer. When `a*` is not clearly negative the
/// dual matrix is extracted, normalized, and attached as an infeasibility
/// certificate if it passes [`check_certificate`]; otherwise the result is
/// marked numerically marginal.
pub fn solve_existence(
    sys: &LosslessQuadraticSystem,
    opts: &SolverOptions,
) -> Result<ExistenceResult> {
    let n = sys.n();
    let l_s = sys.l_sym();
    let mut a_cols = Vec::with_capacity(n + 1);
    for i in 0..n {
        a_cols.push(svec_sparse(&(-sys.q().slice_dense(i))));
    }
    a_cols.push(svec_sparse(&(-DMatrix::<f64>::identity(n, n))));
    let mut q = vec![0.0; n + 1];
    q[n] = 1.0;
    let problem = ConicProblem {
        num_vars: n + 1,
        q,
        a_cols,
        b: svec(&(-&l_s)),
        cones: vec![Cone::PsdTriangle(n)],
    };
    let sol = opts.backend().solve(&problem)?;
    let m_star = DVector::from_column_slice(&sol.x[..n]);
    let a_star = sol.x[n];

    let ls_norm = spectral_norm_sym(&l_s);
    let shifted = sys.shift(&m_star)?;
    let direct = shifted.lambda1();
    if (a_star - direct).abs() > VERIFY_REL_TOL * (1.0 + ls_norm) {
        return Err(Error::Verification(format!(
            "existence SDP cost {a_star:.9e} disagrees with eig(A_s(m*)) = {direct:.9e}"
        )));
    }

    let eps_neg = opts.eps_neg.unwrap_or(EPS_NEG_REL * (1.0 + ls_norm));
    let solver = SolverInfo {
        iterations: sol.iterations,
        status: sol.status.clone(),
        wall_time_s: sol.solve_time,
    };
    if a_star < -eps_neg {
        return Ok(ExistenceResult {
            a_star,
            m_star,
            status: ExistenceStatus::TrappingExists,
            certificate: None,
            solver,
        });
    }

    // Not clearly negative: see whether the dual matrix certifies that no
    // feasible shift exists.
    let z_raw = smat(&sol.z, n);
    let fro = z_raw.norm();
    let (status, certificate) = if fro > 0.0 {
        let z = z_raw / fro;
        let check = check_certificate(sys, &z);
        if check.is_valid() {
            (ExistenceStatus::NoTrappingRegion, Some(z))
        } else {
            (ExistenceStatus::NumericallyMarginal, None)
        }
    } else {
        (ExistenceStatus::NumericallyMarginal, None)
    };
    Ok(ExistenceResult { a_star, m_star, status, certificate, solver })
}

/// `R_m = |d(m)| / |lambda_1|`, the eigenvalue-bound radius.
pub fn conservative_radius(sf: &ShiftedForm) -> Result<f64> {
    let lambda1 = sf.lambda1();
    if lambda1 >= 0.0 {
        return Err(Error::NotNegativeDefinite { lambda1 });
    }
    Ok(sf.d().norm() / lambda1.abs())
}

/// Width below which the golden-section bracket stops, relative to lambda.
const GOLDEN_REL_WIDTH: f64 = 1e-10;

/// Tightest radius by exact reduction of the dual SDP to one dimension.
///
/// Eliminating `gamma` through the generalized Schur complement of the
/// block constraint gives `gamma >= g(lambda)` with
/// `g(lambda) = -(lambda^2/4) d'(I + lambda A_s)^+ d`, convex on the dual
/// feasible set `lambda >= 1/|lambda_1|`. Components of `d` that are
/// numerically zero in an eigendirection (below `1e-10 |d|`) are projected
/// out; any remaining component in the `lambda_1` eigenspace sends
/// `g -> inf` at the left endpoint and the minimizer moves inside.
///
/// Returns `(0, None)` when `d(m)` is numerically zero: the center is then
/// a globally stable equilibrium and the region collapses to a point.
pub fn tight_radius_scalar(sf: &ShiftedForm) -> Result<(f64, Option<f64>)> {
    let lambda1 = sf.lambda1();
    if lambda1 >= 0.0 {
        return Err(Error::NotNegativeDefinite { lambda1 });
    }
    if sf.drift_is_zero() {
        return Ok((0.0, None));
    }
    let e = sf.eig_axes().transpose() * sf.d();
    let drop_tol = 1e-10 * sf.d().norm();
    let terms: Vec<(f64, f64)> = (0..e.len())
        .filter(|&i| e[i].abs() > drop_tol)
        .map(|i| (sf.eigs()[i].abs(), e[i] * e[i]))
        .collect();
    let g = |lam: f64| -> f64 {
        0.25 * lam * lam * terms.iter().map(|&(al, e2)| e2 / (lam * al - 1.0)).sum::<f64>()
    };

    let lam_lo = (1.0 / lambda1.abs()) * (1.0 + 1e-12);
    let mut hi = lam_lo * 2.0;
    let mut g_hi = g(hi);
    loop {
        let next = hi * 2.0;
        let g_next = g(next);
        if g_next > g_hi || !next.is_finite() {
            hi = next;
            break;
        }
        hi = next;
        g_hi = g_next;
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lam_lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..500 {
        if b - a <= GOLDEN_REL_WIDTH * b {
            break;
        }
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    let lam_star = 0.5 * (a + b);
    Ok((g(lam_star).max(0.0).sqrt(), Some(lam_star)))
}

/// Result of the dual-SDP radius route.
#[derive(Debug, Clone)]
pub struct SdpRadius {
    pub r_tight: f64,
    pub lambda_star: f64,
    pub gamma_star: f64,
    pub solver: SolverInfo,
}

/// Tightest radius by solving the dual SDP numerically.
///
/// Independent of [`tight_radius_scalar`]; the two must agree to
/// [`ROUTE_REL_TOL`] relative wherever both run. The returned point is
/// re-verified: the block LMI is rebuilt at `(lambda*, gamma*)` and its
/// largest eigenvalue checked by a direct eigensolve.
pub fn tight_radius_sdp(sf: &ShiftedForm, opts: &SolverOptions) -> Result<SdpRadius> {
    let lambda1 = sf.lambda1();
    if lambda1 >= 0.0 {
        return Err(Error::NotNegativeDefinite { lambda1 });
    }
    if sf.drift_is_zero() {
        return Err(Error::DegenerateEllipsoid);
    }
    let n = sf.d().len();
    let mut m_lam = DMatrix::zeros(n + 1, n + 1);
    m_lam.view_mut((0, 0), (n, n)).copy_from(sf.a_s());
    for i in 0..n {
        m_lam[(i, n)] = sf.d()[i] / 2.0;
        m_lam[(n, i)] = sf.d()[i] / 2.0;
    }
    let mut m_gam = DMatrix::zeros(n + 1, n + 1);
    m_gam[(n, n)] = -1.0;
    let mut m_zero = DMatrix::zeros(n + 1, n + 1);
    m_zero.view_mut((0, 0), (n, n)).copy_from(&DMatrix::identity(n, n));

    // Row 0: lambda >= 0. Rows 1..: svec of the (n+1)-block, shifted by one.
    let shift_rows = |col: Vec<(usize, f64)>| col.into_iter().map(|(r, v)| (r + 1, v)).collect();
    let a_cols = vec![
        {
            let mut col: Vec<(usize, f64)> = vec![(0, -1.0)];
            col.extend::<Vec<_>>(shift_rows(svec_sparse(&m_lam)));
            col
        },
        shift_rows(svec_sparse(&m_gam)),
    ];
    let mut b = vec![0.0];
    b.extend(svec(&(-&m_zero)));
    let problem = ConicProblem {
        num_vars: 2,
        q: vec![0.0, 1.0],
        a_cols,
        b,
        cones: vec![Cone::Nonnegative(1), Cone::PsdTriangle(n + 1)],
    };
    let sol = opts.backend().solve(&problem)?;
    let lambda_star = sol.x[0];
    let gamma_star = sol.x[1];

    let block = &m_zero + &m_lam * lambda_star + &m_gam * gamma_star;
    let (eigs, _) = crate::model::sorted_symmetric_eigen(&block);
    let scale = 1.0 + gamma_star.abs() + lambda_star.abs() * spectral_norm_sym(sf.a_s());
    if eigs[0] > 1e-6 * scale || lambda_star < -1e-9 {
        return Err(Error::Verification(format!(
            "dual SDP point infeasible: max eig {:.3e} at lambda = {lambda_star:.6e}",
            eigs[0]
        )));
    }
    Ok(SdpRadius {
        r_tight: gamma_star.max(0.0).sqrt(),
        lambda_star,
        gamma_star,
        solver: SolverInfo {
            iterations: sol.iterations,
            status: sol.status,
            wall_time_s: sol.solve_time,
        },
    })
}

/// Recovers the sphere of QCQP maximizers from the KKT stationarity
/// condition `2 (I + lambda* A_s) y* + lambda* d = 0`.
///
/// Eigenvalues of `I + lambda* A_s` with magnitude below
/// `RANK_REL_TOL * (1 + |lambda*| |A_s|_2)` are treated as zero for both
/// the pseudoinverse and the null-space basis.
pub fn critical_sphere(
    sf: &ShiftedForm,
    lambda_star: f64,
    r_tight: f64,
) -> Result<CriticalSphere> {
    let n = sf.d().len();
    let a_s_norm = spectral_norm_sym(sf.a_s());
    let threshold = RANK_REL_TOL * (1.0 + lambda_star.abs() * a_s_norm);
    let e = sf.eig_axes().transpose() * sf.d();

    let mut w = DVector::zeros(n);
    let mut null_cols = Vec::new();
    let mut rank = 0usize;
    for i in 0..n {
        let mu = 1.0 + lambda_star * sf.eigs()[i];
        if mu.abs() > threshold {
            w[i] = e[i] / mu;
            rank += 1;
        } else {
            null_cols.push(i);
        }
    }
    let center = sf.eig_axes() * w * (-lambda_star / 2.0);
    let mut basis = DMatrix::zeros(n, null_cols.len());
    for (col, &i) in null_cols.iter().enumerate() {
        basis.set_column(col, &sf.eig_axes().column(i));
    }
    let gap = r_tight * r_tight - center.norm_squared();
    if gap < -1e-6 * r_tight * r_tight {
        return Err(Error::InconsistentSphere { value: gap });
    }
    let radius = if basis.ncols() == 0 { 0.0 } else { gap.max(0.0).sqrt() };
    Ok(CriticalSphere { center, basis, radius, rank })
}

/// Which translation the radius computation is centered at.
#[derive(Debug, Clone, Default)]
pub enum CenterPolicy {
    /// The shift returned by the existence program.
    #[default]
    Auto,
    /// The origin (requires `L_s` negative definite).
    Zero,
    /// A caller-supplied shift (requires `A_s(m)` negative definite).
    Fixed(DVector<f64>),
}

/// Everything the two-step procedure produces for one system.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub existence: ExistenceResult,
    pub shifted: Option<ShiftedForm>,
    pub region: Option<TrappingRegion>,
    pub critical: Option<CriticalSphere>,
    pub sdp_route: Option<SdpRadius>,
}

/// Runs the full pipeline: existence program, then (when a trapping region
/// exists) conservative and tight radii by both routes at the chosen
/// center, the critical sphere, and the route-agreement self-check.
pub fn analyze(
    sys: &LosslessQuadraticSystem,
    policy: &CenterPolicy,
    opts: &SolverOptions,
) -> Result<Analysis> {
    let existence = solve_existence(sys, opts)?;
    if existence.status != ExistenceStatus::TrappingExists {
        return Ok(Analysis {
            existence,
            shifted: None,
            region: None,
            critical: None,
            sdp_route: None,
        });
    }
    let m = match policy {
        CenterPolicy::Auto => existence.m_star.clone(),
        CenterPolicy::Zero => DVector::zeros(sys.n()),
        CenterPolicy::Fixed(v) => v.clone(),
    };
    let sf = sys.shift(&m)?;
    let r_conservative = conservative_radius(&sf)?;
    let (r_scalar, lambda_scalar) = tight_radius_scalar(&sf)?;

    let (region, critical, sdp_route) = match lambda_scalar {
        None => {
            // d(m) = 0: the center is a globally stable equilibrium.
            let region = TrappingRegion {
                m: m.clone(),
                r_tight: 0.0,
                r_conservative,
                lambda_star: None,
                ultimate_bound_original: m.norm(),
            };
            (region, None, None)
        }
        Some(lambda_star) => {
            let sdp = tight_radius_sdp(&sf, opts)?;
            let denom = r_scalar.abs().max(sdp.r_tight.abs()).max(1e-12);
            if (r_scalar - sdp.r_tight).abs() > ROUTE_REL_TOL * denom {
                return Err(Error::RouteMismatch { scalar: r_scalar, sdp: sdp.r_tight });
            }
            let sphere = critical_sphere(&sf, lambda_star, r_scalar)?;
            let region = TrappingRegion {
                m: m.clone(),
                r_tight: r_scalar,
                r_conservative,
                lambda_star: Some(lambda_star),
                ultimate_bound_original: m.norm() + r_scalar,
            };
            (region, Some(sphere), Some(sdp))
        }
    };
    Ok(Analysis {
        existence,
        shifted: Some(sf),
        region: Some(region),
        critical,
        sdp_route,
    })
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct ExistenceJson {
    pub a_star: f64,
    pub m_star: Vec<f64>,
    pub status: ExistenceStatus,
    pub certificate: Option<Vec<Vec<f64>>>,
    pub solver: SolverInfo,
}

#[derive(Debug, Serialize)]
pub struct RegionJson {
    pub m: Vec<f64>,
    pub r_tight: f64,
    pub r_conservative: f64,
    pub lambda_star: Option<f64>,
    pub ultimate_bound_original: f64,
}

#[derive(Debug, Serialize)]
pub struct CriticalJson {
    pub center: Vec<f64>,
    /// Null-space basis, one inner vector per column of `V`.
    pub basis: Vec<Vec<f64>>,
    pub radius: f64,
    pub rank: usize,
}

#[derive(Debug, Serialize)]
pub struct SdpRouteJson {
    pub r_tight: f64,
    pub lambda_star: f64,
    pub gamma_star: f64,
    pub solver: SolverInfo,
}

/// Flat JSON mirror of an [`Analysis`].
#[derive(Debug, Serialize)]
pub struct ReportJson {
    pub existence: ExistenceJson,
    pub region: Option<RegionJson>,
    pub critical: Option<CriticalJson>,
    pub sdp_route: Option<SdpRouteJson>,
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect()).collect()
}

impl Analysis {
    pub fn to_report(&self) -> ReportJson {
        ReportJson {
            existence: ExistenceJson {
                a_star: self.existence.a_star,
                m_star: self.existence.m_star.iter().copied().collect(),
                status: self.existence.status,
                certificate: self.existence.certificate.as_ref().map(matrix_rows),
                solver: self.existence.solver.clone(),
            },
            region: self.region.as_ref().map(|r| RegionJson {
                m: r.m.iter().copied().collect(),
                r_tight: r.r_tight,
                r_conservative: r.r_conservative,
                lambda_star: r.lambda_star,
                ultimate_bound_original: r.ultimate_bound_original,
            }),
            critical: self.critical.as_ref().map(|c| CriticalJson {
                center: c.center().iter().copied().collect(),
                basis: (0..c.basis().ncols())
                    .map(|col| c.basis().column(col).iter().copied().collect())
                    .collect(),
                radius: c.radius(),
                rank: c.rank(),
            }),
            sdp_route: self.sdp_route.as_ref().map(|s| SdpRouteJson {
                r_tight: s.r_tight,
                lambda_star: s.lambda_star,
                gamma_star: s.gamma_star,
                solver: s.solver.clone(),
            }),
        }
    }

    pub fn to_report_json(&self) -> String {
        let mut s =
            serde_json::to_string_pretty(&self.to_report()).expect("report serializes");
        s.push('\n');
        s
    }
}
