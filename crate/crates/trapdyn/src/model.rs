//! Quadratic systems with lossless quadratic terms.
//!
//! A system is `dx/dt = c + L x + f(x)` with `f_i(x) = x' Q(i) x` for
//! symmetric slices `Q(1)..Q(n)`. The quadratic term is *lossless* when
//! `x' f(x) = 0` for every `x`, which holds exactly when
//! `Q(i)_jk + Q(j)_ik + Q(k)_ij = 0` for all index triples.
//!
//! This module owns the exact representation (sparse upper-triangle
//! triplets per slice), the coordinate translation `y = x - m`, the
//! energy rate `d' y + y' A_s y` along shifted trajectories, and the
//! ellipsoid of states where the energy is instantaneously
//! non-decreasing.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Relative tolerance on the lossless defect accepted by checked constructors.
pub const LOSSLESS_REL_TOL: f64 = 1e-12;

/// Relative threshold below which a shifted drift `d(m)` counts as zero
/// (the globally-stable-equilibrium branch).
pub const ZERO_DRIFT_REL_TOL: f64 = 1e-10;

/// Sparse symmetric 3-tensor: `n` symmetric `n x n` slices.
///
/// Entries are stored as `(i, j, k, v)` with `j <= k`, zero-based, sorted,
/// duplicate-free; each triplet denotes `Q(i)_jk = Q(i)_kj = v`, so slice
/// symmetry is enforced by the storage itself.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticTensor {
    n: usize,
    triplets: Vec<(usize, usize, usize, f64)>,
}

impl QuadraticTensor {
    /// Canonicalizes arbitrary `(i, j, k, v)` entries: orders `j <= k`,
    /// sums duplicates, drops exact zeros.
    pub fn from_triplets<I>(n: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, usize, f64)>,
    {
        let mut map: HashMap<(usize, usize, usize), f64> = HashMap::new();
        for (i, j, k, v) in entries {
            if i >= n || j >= n || k >= n {
                return Err(Error::InvalidSystem(format!(
                    "tensor index ({i},{j},{k}) out of range for n = {n}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidSystem(format!(
                    "non-finite tensor entry at ({i},{j},{k})"
                )));
            }
            let (j, k) = if j <= k { (j, k) } else { (k, j) };
            *map.entry((i, j, k)).or_insert(0.0) += v;
        }
        let mut triplets: Vec<_> = map
            .into_iter()
            .filter(|&(_, v)| v != 0.0)
            .map(|((i, j, k), v)| (i, j, k, v))
            .collect();
        triplets.sort_by_key(|&(i, j, k, _)| (i, j, k));
        Ok(Self { n, triplets })
    }

    pub fn zero(n: usize) -> Self {
        Self { n, triplets: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.triplets.is_empty()
    }

    /// Canonical triplets `(i, j, k, v)` with `j <= k`.
    pub fn triplets(&self) -> &[(usize, usize, usize, f64)] {
        &self.triplets
    }

    pub fn max_abs(&self) -> f64 {
        self.triplets.iter().fold(0.0, |acc, &(_, _, _, v)| acc.max(v.abs()))
    }

    fn lookup(&self) -> HashMap<(usize, usize, usize), f64> {
        self.triplets.iter().map(|&(i, j, k, v)| ((i, j, k), v)).collect()
    }

    /// `max_{i,j,k} |Q(i)_jk + Q(j)_ik + Q(k)_ij|`; zero iff lossless.
    ///
    /// Only triples touching a stored entry can contribute, so the scan is
    /// O(nnz) instead of O(n^3).
    pub fn lossless_defect(&self) -> f64 {
        let map = self.lookup();
        let get = |i: usize, j: usize, k: usize| -> f64 {
            let (j, k) = if j <= k { (j, k) } else { (k, j) };
            map.get(&(i, j, k)).copied().unwrap_or(0.0)
        };
        let mut seen: std::collections::HashSet<(usize, usize, usize)> =
            std::collections::HashSet::new();
        let mut worst: f64 = 0.0;
        for &(i, j, k, _) in &self.triplets {
            let mut t = [i, j, k];
            t.sort_unstable();
            if !seen.insert((t[0], t[1], t[2])) {
                continue;
            }
            let [a, b, c] = t;
            let sum = get(a, b, c) + get(b, a, c) + get(c, a, b);
            worst = worst.max(sum.abs());
        }
        worst
    }

    /// Quadratic map `f(x)` with `f_i = x' Q(i) x`.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for &(i, j, k, v) in &self.triplets {
            let term = v * x[j] * x[k];
            out[i] += if j == k { term } else { 2.0 * term };
        }
        out
    }

    /// Weighted slice sum `sum_k m_k Q(k)` (symmetric).
    pub fn weighted_sum(&self, m: &DVector<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        for &(i, j, k, v) in &self.triplets {
            let w = m[i] * v;
            out[(j, k)] += w;
            if j != k {
                out[(k, j)] += w;
            }
        }
        out
    }

    /// Matrix whose row `i` is `(Q(i) m)'`, the nonlinear half of `A(m)`.
    pub fn row_contractions(&self, m: &DVector<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        for &(i, j, k, v) in &self.triplets {
            out[(i, k)] += v * m[j];
            if j != k {
                out[(i, j)] += v * m[k];
            }
        }
        out
    }

    /// Dense copy of slice `Q(i)`.
    pub fn slice_dense(&self, i: usize) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        for &(s, j, k, v) in &self.triplets {
            if s == i {
                out[(j, k)] = v;
                out[(k, j)] = v;
            }
        }
        out
    }
}

/// An n-state system `dx/dt = c + L x + f(x)` whose quadratic term is
/// lossless. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LosslessQuadraticSystem {
    n: usize,
    c: DVector<f64>,
    l: DMatrix<f64>,
    q: QuadraticTensor,
}

impl LosslessQuadraticSystem {
    /// Checked constructor: rejects dimension mismatches, non-finite data,
    /// and tensors whose lossless defect exceeds
    /// `LOSSLESS_REL_TOL * (1 + max|Q|)`.
    pub fn new(c: DVector<f64>, l: DMatrix<f64>, q: QuadraticTensor) -> Result<Self> {
        let sys = Self::new_unchecked(c, l, q)?;
        let defect = sys.lossless_defect();
        let tol = LOSSLESS_REL_TOL * (1.0 + sys.q.max_abs());
        if defect > tol {
            return Err(Error::NotLossless { defect, tol });
        }
        Ok(sys)
    }

    /// Constructor that skips the lossless check; still validates shapes
    /// and finiteness. Needed to build deliberately broken tensors.
    pub fn new_unchecked(c: DVector<f64>, l: DMatrix<f64>, q: QuadraticTensor) -> Result<Self> {
        let n = q.n();
        if n == 0 {
            return Err(Error::InvalidSystem("state dimension must be positive".into()));
        }
        if c.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: c.len() });
        }
        if l.nrows() != n || l.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: l.nrows().max(l.ncols()) });
        }
        if c.iter().any(|v| !v.is_finite()) || l.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSystem("non-finite entry in c or L".into()));
        }
        Ok(Self { n, c, l, q })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn l(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn q(&self) -> &QuadraticTensor {
        &self.q
    }

    /// Symmetric part `L_s = (L + L') / 2`.
    pub fn l_sym(&self) -> DMatrix<f64> {
        (&self.l + self.l.transpose()) * 0.5
    }

    /// Maximum symmetrized-triple residual of the tensor; 0 iff lossless.
    pub fn lossless_defect(&self) -> f64 {
        self.q.lossless_defect()
    }

    /// Right-hand side `c + L x + f(x)`.
    pub fn eval_rhs(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        Ok(&self.c + &self.l * x + self.q.apply(x))
    }

    /// Translates coordinates by `m` and precomputes the shifted drift,
    /// linear part, symmetric part, and its eigendecomposition.
    pub fn shift(&self, m: &DVector<f64>) -> Result<ShiftedForm> {
        ShiftedForm::new(self, m)
    }
}

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted
/// descending and eigenvector columns permuted to match.
pub(crate) fn sorted_symmetric_eigen(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let sym = (a + a.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| {
        eig.eigenvalues[q]
            .partial_cmp(&eig.eigenvalues[p])
            .expect("symmetric eigenvalues are finite")
    });
    let values = DVector::from_iterator(n, order.iter().map(|&p| eig.eigenvalues[p]));
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &p) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(p));
    }
    (values, vectors)
}

/// The system after translation `y = x - m`:
/// `dy/dt = d(m) + A(m) y + f(y)` with the quadratic term unchanged.
#[derive(Debug, Clone)]
pub struct ShiftedForm {
    base: LosslessQuadraticSystem,
    m: DVector<f64>,
    d: DVector<f64>,
    a: DMatrix<f64>,
    a_s: DMatrix<f64>,
    eigs: DVector<f64>,
    axes: DMatrix<f64>,
}

impl ShiftedForm {
    fn new(sys: &LosslessQuadraticSystem, m: &DVector<f64>) -> Result<Self> {
        let n = sys.n();
        if m.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: m.len() });
        }
        let d = &sys.c + &sys.l * m + sys.q.apply(m);
        let a = &sys.l + sys.q.row_contractions(m) * 2.0;
        // The lossless identity makes (A + A')/2 equal L_s - sum_k m_k Q(k);
        // the latter is built from exactly symmetric pieces.
        let a_s = sys.l_sym() - sys.q.weighted_sum(m);
        let (eigs, axes) = sorted_symmetric_eigen(&a_s);
        Ok(Self { base: sys.clone(), m: m.clone(), d, a, a_s, eigs, axes })
    }

    pub fn base(&self) -> &LosslessQuadraticSystem {
        &self.base
    }

    pub fn m(&self) -> &DVector<f64> {
        &self.m
    }

    /// Shifted drift `d(m) = c + L m + f(m)`.
    pub fn d(&self) -> &DVector<f64> {
        &self.d
    }

    /// Shifted linear matrix `A(m)`.
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Symmetric part `A_s(m) = L_s - sum_k m_k Q(k)`.
    pub fn a_s(&self) -> &DMatrix<f64> {
        &self.a_s
    }

    /// Eigenvalues of `A_s(m)`, sorted descending.
    pub fn eigs(&self) -> &DVector<f64> {
        &self.eigs
    }

    /// Orthonormal eigenvectors of `A_s(m)`, columns aligned with `eigs`.
    pub fn eig_axes(&self) -> &DMatrix<f64> {
        &self.axes
    }

    /// Largest (least negative) eigenvalue of `A_s(m)`.
    pub fn lambda1(&self) -> f64 {
        self.eigs[0]
    }

    /// Scale against which `|d(m)|` is compared to decide degeneracy.
    pub fn drift_scale(&self) -> f64 {
        let lm = (&self.base.l * &self.m).norm();
        let fm = self.base.q.apply(&self.m).norm();
        1.0 + self.base.c.norm() + lm + fm
    }

    /// Whether the shifted drift is numerically zero (m is an equilibrium).
    pub fn drift_is_zero(&self) -> bool {
        self.d.norm() <= ZERO_DRIFT_REL_TOL * self.drift_scale()
    }

    /// Instantaneous rate of the shifted energy `K_m = |y|^2 / 2`:
    /// `d(m)' y + y' A_s(m) y`.
    pub fn energy_rate(&self, y: &DVector<f64>) -> Result<f64> {
        if y.len() != self.base.n {
            return Err(Error::DimensionMismatch { expected: self.base.n, got: y.len() });
        }
        Ok(self.d.dot(y) + (y.transpose() * &self.a_s * y)[(0, 0)])
    }

    /// Right-hand side of the shifted dynamics `d + A y + f(y)`.
    pub fn eval_rhs(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        if y.len() != self.base.n {
            return Err(Error::DimensionMismatch { expected: self.base.n, got: y.len() });
        }
        Ok(&self.d + &self.a * y + self.base.q.apply(y))
    }

    /// Boundary of the set `E` of states with non-decreasing energy.
    ///
    /// Requires `A_s` negative definite. When `d(m)` is numerically zero the
    /// set collapses to the origin and a flagged degenerate object is
    /// returned instead of an error, because the zero-radius branch of the
    /// trapping analysis consumes it.
    pub fn ellipsoid(&self) -> Result<EnergyEllipsoid> {
        let n = self.base.n;
        let lambda1 = self.lambda1();
        if lambda1 >= 0.0 {
            return Err(Error::NotNegativeDefinite { lambda1 });
        }
        if self.drift_is_zero() {
            return Ok(EnergyEllipsoid {
                center: DVector::zeros(n),
                axes: self.axes.clone(),
                semi_axes: DVector::zeros(n),
                peak_rate: 0.0,
                degenerate: true,
            });
        }
        // In the eigenbasis: e = U'd, A_s^{-1} d = U diag(1/lambda) e.
        let e = self.axes.transpose() * &self.d;
        let inv_scaled = DVector::from_iterator(n, (0..n).map(|i| e[i] / self.eigs[i]));
        let center = -0.5 * (&self.axes * &inv_scaled);
        let quad = e.dot(&inv_scaled); // d' A_s^{-1} d < 0
        let semi_axes = DVector::from_iterator(n, (0..n).map(|i| 0.5 * (quad / self.eigs[i]).sqrt()));
        Ok(EnergyEllipsoid {
            center,
            axes: self.axes.clone(),
            semi_axes,
            peak_rate: -0.25 * quad,
            degenerate: false,
        })
    }
}

/// Boundary of `E = { y : d'y + y'A_s y >= 0 }` for `A_s` negative definite:
/// an ellipsoid centered at the point of maximum energy growth.
#[derive(Debug, Clone)]
pub struct EnergyEllipsoid {
    center: DVector<f64>,
    axes: DMatrix<f64>,
    semi_axes: DVector<f64>,
    peak_rate: f64,
    degenerate: bool,
}

impl EnergyEllipsoid {
    /// Center `-A_s^{-1} d / 2`, the state of maximum energy growth.
    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    /// Orthonormal principal axes (eigenvectors of `A_s`, descending eigenvalues).
    pub fn axes(&self) -> &DMatrix<f64> {
        &self.axes
    }

    /// Semi-axis lengths `alpha_i = sqrt(d'A_s^{-1}d / lambda_i) / 2`,
    /// aligned with `axes`.
    pub fn semi_axes(&self) -> &DVector<f64> {
        &self.semi_axes
    }

    /// Maximum energy growth rate `-d'A_s^{-1}d / 4`, attained at the center.
    pub fn peak_rate(&self) -> f64 {
        self.peak_rate
    }

    /// True when `d = 0` and the ellipsoid collapses to the origin.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Maps a unit direction `u` to the boundary point
    /// `center + U diag(alpha) u`.
    pub fn boundary_point(&self, u: &DVector<f64>) -> DVector<f64> {
        &self.center + &self.axes * u.component_mul(&self.semi_axes)
    }

    /// Level of the defining quadratic at `y`: 1 on the boundary,
    /// < 1 inside, > 1 outside.
    pub fn level(&self, y: &DVector<f64>) -> f64 {
        let w = self.axes.transpose() * (y - &self.center);
        (0..self.dim()).map(|i| (w[i] / self.semi_axes[i]).powi(2)).sum()
    }
}

// ---------------------------------------------------------------------------
// On-disk system format
// ---------------------------------------------------------------------------

/// JSON document for a system: `n`, dense `c` and `L`, sparse 1-based `Q`
/// triplets with `j <= k`.
#[derive(Debug, Serialize, Deserialize)]
pub struct SystemFile {
    pub n: usize,
    pub c: Vec<f64>,
    #[serde(rename = "L")]
    pub l: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    pub q: Vec<SystemFileEntry>,
}

/// One tensor entry `Q(i)_jk = Q(i)_kj = v`, 1-based indices.
#[derive(Debug, Serialize, Deserialize)]
pub struct SystemFileEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub v: f64,
}

impl SystemFile {
    pub fn from_system(sys: &LosslessQuadraticSystem) -> Self {
        let n = sys.n();
        let l = (0..n).map(|r| (0..n).map(|c| sys.l()[(r, c)]).collect()).collect();
        let q = sys
            .q()
            .triplets()
            .iter()
            .map(|&(i, j, k, v)| SystemFileEntry { i: i + 1, j: j + 1, k: k + 1, v })
            .collect();
        Self { n, c: sys.c().iter().copied().collect(), l, q }
    }

    pub fn into_system(self) -> Result<LosslessQuadraticSystem> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidSystem("n must be positive".into()));
        }
        if self.c.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.c.len() });
        }
        if self.l.len() != n || self.l.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidSystem(format!("L must be {n} x {n}")));
        }
        for e in &self.q {
            if e.i == 0 || e.j == 0 || e.k == 0 {
                return Err(Error::InvalidSystem("Q indices are 1-based".into()));
            }
            if e.j > e.k {
                return Err(Error::InvalidSystem(format!(
                    "Q triplet ({}, {}, {}) violates j <= k",
                    e.i, e.j, e.k
                )));
            }
        }
        let c = DVector::from_vec(self.c);
        let l = DMatrix::from_fn(n, n, |r, col| self.l[r][col]);
        let q = QuadraticTensor::from_triplets(
            n,
            self.q.iter().map(|e| (e.i - 1, e.j - 1, e.k - 1, e.v)),
        )?;
        LosslessQuadraticSystem::new(c, l, q)
    }

    /// Canonical serialization: pretty JSON, shortest round-trip-exact
    /// decimal floats. Writing the same system twice is byte-identical.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("system file serializes");
        s.push('\n');
        s
    }
}

/// Parses a system from JSON text (validated, including the lossless check).
pub fn system_from_json(text: &str) -> std::result::Result<LosslessQuadraticSystem, String> {
    let file: SystemFile = serde_json::from_str(text).map_err(|e| {
        let mut msg = String::new();
        let _ = write!(msg, "JSON parse error at line {}, column {}: {e}", e.line(), e.column());
        msg
    })?;
    file.into_system().map_err(|e| e.to_string())
}

/// Serializes a system to the canonical JSON document.
pub fn system_to_json(sys: &LosslessQuadraticSystem) -> String {
    SystemFile::from_system(sys).to_json_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems;
    use approx::assert_relative_eq;

    #[test]
    fn defect_zero_for_lorenz_and_zero_system() {
        assert_eq!(systems::lorenz(10.0, 28.0, 8.0 / 3.0).lossless_defect(), 0.0);
        assert_eq!(systems::zero_system(4).lossless_defect(), 0.0);
    }

    #[test]
    fn defect_detects_flipped_lorenz_entry() {
        // Flip Q(3)_12 from +1/2 to -1/2: the (1,2,3) triple sums to -1.
        let sys = systems::lorenz(10.0, 28.0, 8.0 / 3.0);
        let q = QuadraticTensor::from_triplets(
            3,
            [(1usize, 0usize, 2usize, -0.5), (2, 0, 1, -0.5)],
        )
        .unwrap();
        let defect = q.lossless_defect();
        assert_relative_eq!(defect, 1.0, max_relative = 1e-15);
        let broken =
            LosslessQuadraticSystem::new(sys.c().clone(), sys.l().clone(), q.clone());
        assert!(matches!(broken, Err(Error::NotLossless { .. })));
        // The unchecked constructor accepts it so the defect can be reported.
        let broken =
            LosslessQuadraticSystem::new_unchecked(sys.c().clone(), sys.l().clone(), q).unwrap();
        assert_relative_eq!(broken.lossless_defect(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn lossless_consequence_on_unit_vectors() {
        let sys = systems::lorenz(10.0, 28.0, 8.0 / 3.0);
        let mut rng = crate::systems::seeded_rng(3);
        let scale = sys.q().max_abs();
        for _ in 0..100 {
            let x = crate::systems::random_unit_vector(3, &mut rng);
            let fx = sys.q().apply(&x);
            assert!(x.dot(&fx).abs() <= 1e-10 * x.norm().powi(3) * scale);
        }
    }

    #[test]
    fn eval_rhs_matches_known_points() {
        let two = systems::two_state();
        let eq = DVector::from_vec(vec![0.0, 0.25]);
        let rhs = two.eval_rhs(&eq).unwrap();
        assert!(rhs.norm() <= 1e-15);

        let lorenz = systems::lorenz(10.0, 28.0, 8.0 / 3.0);
        let rhs = lorenz.eval_rhs(&DVector::from_vec(vec![1.0, 1.0, 1.0])).unwrap();
        assert_relative_eq!(rhs[0], 0.0, epsilon = 1e-14);
        assert_relative_eq!(rhs[1], 26.0, max_relative = 1e-14);
        assert_relative_eq!(rhs[2], 1.0 - 8.0 / 3.0, max_relative = 1e-14);

        // x = 0 isolates the constant drift.
        let at_zero = two.eval_rhs(&DVector::zeros(2)).unwrap();
        assert_eq!(at_zero, *two.c());

        assert!(matches!(
            two.eval_rhs(&DVector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn shift_matches_lorenz_closed_form() {
        let sys = systems::lorenz(10.0, 28.0, 8.0 / 3.0);
        let sf = sys.shift(&DVector::from_vec(vec![0.0, 0.0, 38.0])).unwrap();
        let expect = DMatrix::from_diagonal(&DVector::from_vec(vec![-10.0, -1.0, -8.0 / 3.0]));
        assert!((sf.a_s() - expect).abs().max() <= 1e-12);
        assert_relative_eq!(sf.d()[2], -304.0 / 3.0, max_relative = 1e-14);
        assert!(sf.d()[0].abs() <= 1e-14 && sf.d()[1].abs() <= 1e-14);
        assert_relative_eq!(sf.lambda1(), -1.0, max_relative = 1e-13);
    }

    #[test]
    fn zero_shift_reduces_to_linear_part() {
        let sys = systems::two_state();
        let sf = sys.shift(&DVector::zeros(2)).unwrap();
        assert_eq!(sf.d(), sys.c());
        assert!((sf.a_s() - sys.l_sym()).abs().max() == 0.0);
        let eigs = sf.eigs();
        assert_relative_eq!(eigs[0], -1.0, max_relative = 1e-14);
        assert_relative_eq!(eigs[1], -4.0, max_relative = 1e-14);
    }

    /// Eq. check: (A(m)+A(m)')/2 agrees with L_s - sum_k m_k Q(k) on
    /// random lossless systems.
    #[test]
    fn shift_symmetric_part_consistency() {
        for seed in 0..50u64 {
            let sys = systems::random_lossless_system(3 + (seed as usize % 2), seed);
            let mut rng = systems::seeded_rng(seed ^ 0x5f5f);
            let m = systems::random_vector(sys.n(), 5.0, &mut rng);
            let sf = sys.shift(&m).unwrap();
            let sym_of_a = (sf.a() + sf.a().transpose()) * 0.5;
            let scale = 1.0 + sf.a().abs().max();
            assert!(
                (sym_of_a - sf.a_s()).abs().max() <= 1e-12 * scale,
                "seed {seed}: A-symmetrization disagrees with L_s - sum m_k Q(k)"
            );
        }
    }

    /// energy_rate equals y . (shifted rhs) because the quadratic term is
    /// lossless.
    #[test]
    fn energy_rate_matches_direct_derivative() {
        for seed in 0..20u64 {
            let sys = systems::random_lossless_system(3, seed);
            let mut rng = systems::seeded_rng(seed.wrapping_add(991));
            let m = systems::random_vector(3, 2.0, &mut rng);
            let sf = sys.shift(&m).unwrap();
            for _ in 0..5 {
                let y = systems::random_vector(3, 3.0, &mut rng);
                let direct = y.dot(&sf.eval_rhs(&y).unwrap());
                let rate = sf.energy_rate(&y).unwrap();
                let scale = 1.0 + direct.abs() + y.norm().powi(3) * sys.q().max_abs();
                assert!((direct - rate).abs() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn energy_rate_known_values() {
        let sys = systems::two_state();
        let sf = sys.shift(&DVector::zeros(2)).unwrap();
        assert_eq!(sf.energy_rate(&DVector::zeros(2)).unwrap(), 0.0);
        let center = DVector::from_vec(vec![0.0, 0.125]);
        assert_relative_eq!(sf.energy_rate(&center).unwrap(), 1.0 / 16.0, max_relative = 1e-14);
    }

    #[test]
    fn ellipsoid_two_state_closed_form() {
        let sys = systems::two_state();
        let sf = sys.shift(&DVector::zeros(2)).unwrap();
        let ee = sf.ellipsoid().unwrap();
        assert!(!ee.is_degenerate());
        assert_relative_eq!(ee.center()[0], 0.0, epsilon = 1e-14);
        assert_relative_eq!(ee.center()[1], 0.125, max_relative = 1e-14);
        assert_relative_eq!(ee.semi_axes()[0], 0.25, max_relative = 1e-14);
        assert_relative_eq!(ee.semi_axes()[1], 0.125, max_relative = 1e-14);
        assert_relative_eq!(ee.peak_rate(), 1.0 / 16.0, max_relative = 1e-14);
    }

    #[test]
    fn ellipsoid_requires_negative_definite_part() {
        let sys = systems::lorenz(10.0, 28.0, 8.0 / 3.0);
        // At m = 0 the symmetric part is indefinite.
        let sf = sys.shift(&DVector::zeros(3)).unwrap();
        assert!(matches!(sf.ellipsoid(), Err(Error::NotNegativeDefinite { .. })));
    }

    #[test]
    fn ellipsoid_degenerate_when_drift_vanishes() {
        // dx/dt = -x has d(0) = 0 and A_s = -I.
        let sys = LosslessQuadraticSystem::new(
            DVector::zeros(2),
            -DMatrix::identity(2, 2),
            QuadraticTensor::zero(2),
        )
        .unwrap();
        let ee = sys.shift(&DVector::zeros(2)).unwrap().ellipsoid().unwrap();
        assert!(ee.is_degenerate());
        assert_eq!(ee.peak_rate(), 0.0);
        assert_eq!(ee.semi_axes().max(), 0.0);
    }

    /// Sampled boundary points satisfy rate = 0; interior/exterior samples
    /// have strictly positive/negative rate.
    #[test]
    fn ellipsoid_boundary_interior_exterior() {
        for (sys, m) in [
            (systems::two_state(), DVector::zeros(2)),
            (systems::lorenz(10.0, 28.0, 8.0 / 3.0), DVector::from_vec(vec![0.0, 0.0, 38.0])),
        ] {
            let sf = sys.shift(&m).unwrap();
            let ee = sf.ellipsoid().unwrap();
            let mut rng = systems::seeded_rng(17);
            let rate_scale = |y: &DVector<f64>| 1.0 + sf.d().norm() * y.norm();
            for _ in 0..200 {
                let u = systems::random_unit_vector(sys.n(), &mut rng);
                let on = ee.boundary_point(&u);
                assert!(sf.energy_rate(&on).unwrap().abs() <= 1e-8 * rate_scale(&on));
                let inside = ee.center() + (&on - ee.center()) * 0.99;
                assert!(sf.energy_rate(&inside).unwrap() > 0.0);
                let outside = ee.center() + (&on - ee.center()) * 1.01;
                assert!(sf.energy_rate(&outside).unwrap() < 0.0);
            }
        }
    }

    /// Lorenz ellipsoid at m = (0,0,38): d'A_s^{-1}d = -(304/3)^2 * 3/8.
    #[test]
    fn ellipsoid_lorenz_semi_axes() {
        let sys = systems::lorenz(10.0, 28.0, 8.0 / 3.0);
        let sf = sys.shift(&DVector::from_vec(vec![0.0, 0.0, 38.0])).unwrap();
        let ee = sf.ellipsoid().unwrap();
        let quad = -(304.0f64 / 3.0).powi(2) * 3.0 / 8.0;
        assert_relative_eq!(ee.center()[2], -19.0, max_relative = 1e-12);
        assert_relative_eq!(ee.peak_rate(), -0.25 * quad, max_relative = 1e-12);
        for i in 0..3 {
            let expect = 0.5 * (quad / sf.eigs()[i]).sqrt();
            assert_relative_eq!(ee.semi_axes()[i], expect, max_relative = 1e-12);
        }
    }

    /// One finite-difference step of the full dynamics reproduces the energy
    /// rate at the starting point.
    #[test]
    fn chain_rule_oracle() {
        let h = 1e-6;
        for seed in 0..10u64 {
            let sys = systems::random_lossless_system(3, seed.wrapping_add(300));
            let mut rng = systems::seeded_rng(seed);
            let x0 = systems::random_vector(3, 2.0, &mut rng);
            let sf = sys.shift(&DVector::zeros(3)).unwrap();
            let rate = sf.energy_rate(&x0).unwrap();
            let traj = crate::sim::integrate(&sys, &x0, h, h).unwrap();
            let x1 = traj.states().last().unwrap();
            let fd = (0.5 * x1.norm_squared() - 0.5 * x0.norm_squared()) / h;
            let scale = 1.0 + rate.abs() + x0.norm().powi(3);
            assert!(
                (fd - rate).abs() <= 1e-3 * scale,
                "seed {seed}: fd {fd} vs rate {rate}"
            );
        }
    }

    #[test]
    fn system_json_round_trip_is_byte_identical() {
        let sys = systems::stacked_lorenz(2, 9).0;
        let text = system_to_json(&sys);
        let parsed = system_from_json(&text).unwrap();
        assert_eq!(system_to_json(&parsed), text);
    }

    #[test]
    fn system_json_rejects_malformed_input() {
        let truncated = "{\"n\": 2, \"c\": [0.0, 1.0]";
        let err = system_from_json(truncated).unwrap_err();
        assert!(err.contains("line"), "diagnostic should carry position: {err}");

        let bad_order = r#"{"n":2,"c":[0.0,0.0],"L":[[0.0,0.0],[0.0,0.0]],
            "Q":[{"i":1,"j":2,"k":1,"v":1.0}]}"#;
        assert!(system_from_json(bad_order).is_err());
    }
}
