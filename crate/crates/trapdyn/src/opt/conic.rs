//! Minimal conic-program interface and the interior-point backend.
//!
//! Problems are stated as `min q'x  s.t.  b - A x in K` with `K` a product
//! of nonnegative and PSD-triangle cones. The analysis layer never trusts a
//! solver blindly: every optimum it consumes is re-verified by direct
//! eigenvalue computations upstream.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Cones supported by the analysis layer.
#[derive(Debug, Clone, Copy)]
pub enum Cone {
    /// Componentwise nonnegative slack of the given length.
    Nonnegative(usize),
    /// Vectorized symmetric PSD matrices of the given side length.
    PsdTriangle(usize),
}

impl Cone {
    pub fn len(&self) -> usize {
        match *self {
            Cone::Nonnegative(k) => k,
            Cone::PsdTriangle(k) => k * (k + 1) / 2,
        }
    }
}

/// `min q'x  s.t.  b - A x in K`, with `A` stored as sparse columns.
#[derive(Debug, Clone)]
pub struct ConicProblem {
    pub num_vars: usize,
    pub q: Vec<f64>,
    /// Column `j` holds the nonzero `(row, value)` pairs of `A e_j`.
    pub a_cols: Vec<Vec<(usize, f64)>>,
    pub b: Vec<f64>,
    pub cones: Vec<Cone>,
}

/// Primal/dual point at termination.
#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub x: Vec<f64>,
    /// Dual variables, stacked in cone order.
    pub z: Vec<f64>,
    pub objective: f64,
    pub iterations: u32,
    pub solve_time: f64,
    pub status: String,
}

/// A reentrant conic solver. Implementations must be safe to call from
/// several threads on independent problems.
pub trait ConicSolver: Send + Sync {
    fn solve(&self, problem: &ConicProblem) -> Result<ConicSolution>;
}

/// Clarabel interior-point solver.
#[derive(Debug, Clone)]
pub struct ClarabelSolver {
    pub tol: f64,
    pub max_iter: u32,
    pub verbose: bool,
}

impl Default for ClarabelSolver {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 200, verbose: false }
    }
}

impl ConicSolver for ClarabelSolver {
    fn solve(&self, p: &ConicProblem) -> Result<ConicSolution> {
        let rows: usize = p.cones.iter().map(Cone::len).sum();
        debug_assert_eq!(rows, p.b.len(), "cone sizes must cover b");

        let mut colptr = vec![0usize];
        let mut rowval = Vec::new();
        let mut nzval = Vec::new();
        for col in &p.a_cols {
            for &(r, v) in col {
                rowval.push(r);
                nzval.push(v);
            }
            colptr.push(rowval.len());
        }
        let a = CscMatrix::new(rows, p.num_vars, colptr, rowval, nzval);
        let quad = CscMatrix::zeros((p.num_vars, p.num_vars));
        let cones: Vec<SupportedConeT<f64>> = p
            .cones
            .iter()
            .map(|c| match *c {
                Cone::Nonnegative(k) => SupportedConeT::NonnegativeConeT(k),
                Cone::PsdTriangle(k) => SupportedConeT::PSDTriangleConeT(k),
            })
            .collect();
        let settings = DefaultSettings {
            verbose: self.verbose,
            max_iter: self.max_iter,
            tol_gap_abs: self.tol,
            tol_gap_rel: self.tol,
            tol_feas: self.tol,
            ..DefaultSettings::default()
        };
        let mut solver = DefaultSolver::new(&quad, &p.q, &a, &p.b, &cones, settings)
            .map_err(|e| Error::Solver { status: "setup".into(), detail: format!("{e:?}") })?;
        solver.solve();
        let sol = &solver.solution;
        let status = format!("{:?}", sol.status);
        match sol.status {
            SolverStatus::Solved | SolverStatus::AlmostSolved => Ok(ConicSolution {
                x: sol.x.clone(),
                z: sol.z.clone(),
                objective: sol.obj_val,
                iterations: sol.iterations,
                solve_time: sol.solve_time,
                status,
            }),
            _ => Err(Error::Solver {
                status,
                detail: format!(
                    "iterations = {}, objective = {:.6e}",
                    sol.iterations, sol.obj_val
                ),
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Symmetric-matrix vectorization for the PSD triangle cone
// ---------------------------------------------------------------------------

/// Length of the vectorized upper triangle of an `n x n` matrix.
pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Upper triangle of a symmetric matrix, column-major, off-diagonal entries
/// scaled by sqrt(2) so that `svec(X) . svec(Y) = <X, Y>`.
pub fn svec(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let root2 = 2f64.sqrt();
    let mut out = Vec::with_capacity(svec_len(n));
    for j in 0..n {
        for i in 0..=j {
            out.push(if i == j { m[(i, j)] } else { m[(i, j)] * root2 });
        }
    }
    out
}

/// Inverse of [`svec`].
pub fn smat(v: &[f64], n: usize) -> DMatrix<f64> {
    debug_assert_eq!(v.len(), svec_len(n));
    let root2 = 2f64.sqrt();
    let mut m = DMatrix::zeros(n, n);
    let mut idx = 0;
    for j in 0..n {
        for i in 0..=j {
            if i == j {
                m[(i, j)] = v[idx];
            } else {
                m[(i, j)] = v[idx] / root2;
                m[(j, i)] = m[(i, j)];
            }
            idx += 1;
        }
    }
    m
}

/// Sparse svec of a matrix, as `(row, value)` pairs for a CSC column.
pub fn svec_sparse(m: &DMatrix<f64>) -> Vec<(usize, f64)> {
    svec(m)
        .into_iter()
        .enumerate()
        .filter(|&(_, v)| v != 0.0)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn svec_preserves_inner_products() {
        let x = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 5.0, -1.0, 3.0, -1.0, 4.0]);
        let y = DMatrix::from_row_slice(3, 3, &[0.5, 1.0, 0.0, 1.0, -2.0, 2.5, 0.0, 2.5, 1.5]);
        let frob = (&x * &y).trace();
        let dot: f64 = svec(&x).iter().zip(svec(&y)).map(|(a, b)| a * b).sum();
        approx::assert_relative_eq!(frob, dot, max_relative = 1e-14);
        assert_eq!(smat(&svec(&x), 3), x);
    }

    /// min t s.t. tI - C psd recovers the top eigenvalue of C.
    #[test]
    fn backend_solves_max_eigenvalue_program() {
        let c = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 5.0, 3.0, 5.0, 6.0]);
        let (eigs, _) = crate::model::sorted_symmetric_eigen(&c);
        let problem = ConicProblem {
            num_vars: 1,
            q: vec![1.0],
            a_cols: vec![svec_sparse(&(-DMatrix::<f64>::identity(3, 3)))],
            b: svec(&(-&c)),
            cones: vec![Cone::PsdTriangle(3)],
        };
        let sol = ClarabelSolver::default().solve(&problem).unwrap();
        approx::assert_relative_eq!(sol.x[0], eigs[0], max_relative = 1e-7);
        // Dual of the eigenvalue program: Z psd, trace one.
        let z = smat(&sol.z, 3);
        approx::assert_relative_eq!(z.trace(), 1.0, max_relative = 1e-6);
        let (zeigs, _) = crate::model::sorted_symmetric_eigen(&z);
        assert!(zeigs[2] >= -1e-8);
        let _ = DVector::<f64>::zeros(1);
    }
}
