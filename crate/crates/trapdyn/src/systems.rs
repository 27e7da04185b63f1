//! Constructors for the example systems: the bounded two-state system, the
//! Lorenz attractor, the all-zero system, and the stacked-and-rotated
//! Lorenz family used for scaling studies.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::model::{LosslessQuadraticSystem, QuadraticTensor};

/// Deterministic generator for a seed; identical seeds reproduce identical
/// streams bit for bit.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Vector with entries uniform in `[-half_width, half_width]`.
pub fn random_vector<R: Rng>(n: usize, half_width: f64, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-half_width..=half_width))
}

/// Uniform direction on the unit sphere (normalized Gaussian).
pub fn random_unit_vector<R: Rng>(n: usize, rng: &mut R) -> DVector<f64> {
    loop {
        let g = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = g.norm();
        if norm > 1e-12 {
            return g / norm;
        }
    }
}

/// The bounded two-state example:
/// `dx/dt = (0, 1) + diag(-1, -4) x + (-x1 x2, x1^2)`.
pub fn two_state() -> LosslessQuadraticSystem {
    let c = DVector::from_vec(vec![0.0, 1.0]);
    let l = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -4.0]));
    let q = QuadraticTensor::from_triplets(2, [(0usize, 0usize, 1usize, -0.5), (1, 0, 0, 1.0)])
        .expect("two-state tensor is well formed");
    LosslessQuadraticSystem::new(c, l, q).expect("two-state system is lossless")
}

/// The Lorenz system with parameters `(sigma, rho, alpha)`.
pub fn lorenz(sigma: f64, rho: f64, alpha: f64) -> LosslessQuadraticSystem {
    let c = DVector::zeros(3);
    let l = DMatrix::from_row_slice(
        3,
        3,
        &[-sigma, sigma, 0.0, rho, -1.0, 0.0, 0.0, 0.0, -alpha],
    );
    // f = (0, -x1 x3, x1 x2)
    let q = QuadraticTensor::from_triplets(3, [(1usize, 0usize, 2usize, -0.5), (2, 0, 1, 0.5)])
        .expect("lorenz tensor is well formed");
    LosslessQuadraticSystem::new(c, l, q).expect("lorenz system is lossless")
}

/// Lorenz with the standard chaotic parameters (10, 28, 8/3).
pub fn lorenz_default() -> LosslessQuadraticSystem {
    lorenz(10.0, 28.0, 8.0 / 3.0)
}

/// The trivial system `dx/dt = 0`, which is bounded but has no
/// monotonically attracting trapping region.
pub fn zero_system(n: usize) -> LosslessQuadraticSystem {
    LosslessQuadraticSystem::new(DVector::zeros(n), DMatrix::zeros(n, n), QuadraticTensor::zero(n))
        .expect("zero system is trivially lossless")
}

/// Haar-distributed random orthogonal matrix: QR of a standard Gaussian
/// matrix with the sign convention `R_ii > 0`. Deterministic per seed.
pub fn random_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = seeded_rng(seed);
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut w = qr.q();
    for i in 0..n {
        if r[(i, i)] < 0.0 {
            let col = -w.column(i);
            w.set_column(i, &col);
        }
    }
    w
}

/// `K` Lorenz subsystems (default parameters) stacked block-diagonally and
/// coupled by a random rotation `x = W z`. Returns the rotated system and
/// `W`. Seed 0 is reserved for `W = I` so that `K = 1` reproduces
/// [`lorenz_default`] exactly.
pub fn stacked_lorenz(k: usize, seed: u64) -> (LosslessQuadraticSystem, DMatrix<f64>) {
    assert!(k >= 1, "need at least one Lorenz block");
    let n = 3 * k;
    let block = lorenz_default();
    let mut l_z = DMatrix::zeros(n, n);
    for b in 0..k {
        l_z.view_mut((3 * b, 3 * b), (3, 3)).copy_from(block.l());
    }
    let mut q_z: Vec<(usize, usize, usize, f64)> = Vec::with_capacity(2 * k);
    for b in 0..k {
        let o = 3 * b;
        q_z.push((o + 1, o, o + 2, -0.5));
        q_z.push((o + 2, o, o + 1, 0.5));
    }

    let w = if seed == 0 { DMatrix::identity(n, n) } else { random_orthogonal(n, seed) };
    let l = &w * l_z * w.transpose();

    // f(x) = W f_z(W'x)  =>  Q(i) = sum_p W_ip * W Q_z(p) W'.
    // Each Q_z(p) slice has a single symmetric pair, so W Q_z(p) W' is the
    // rank-two matrix v (w_j w_k' + w_k w_j') built from columns of W.
    let mut slices: Vec<DMatrix<f64>> = vec![DMatrix::zeros(n, n); n];
    for &(p, j, kk, v) in &q_z {
        let wj = w.column(j);
        let wk = w.column(kk);
        let g = (&wj * wk.transpose() + &wk * wj.transpose()) * v;
        for i in 0..n {
            let wip = w[(i, p)];
            if wip != 0.0 {
                slices[i] += &g * wip;
            }
        }
    }
    let mut triplets = Vec::new();
    for (i, s) in slices.iter().enumerate() {
        for j in 0..n {
            for kk in j..n {
                let v = s[(j, kk)];
                if v != 0.0 {
                    triplets.push((i, j, kk, v));
                }
            }
        }
    }
    let q = QuadraticTensor::from_triplets(n, triplets).expect("rotated tensor is well formed");
    let sys = LosslessQuadraticSystem::new(DVector::zeros(n), l, q)
        .expect("rotation preserves the lossless identity");
    (sys, w)
}

/// Random lossless system for property tests: Gaussian `c`, a linear part
/// with `L_s` strictly negative definite, and a random tensor projected
/// onto the lossless subspace. Deterministic per seed.
pub fn random_lossless_system(n: usize, seed: u64) -> LosslessQuadraticSystem {
    let mut rng = seeded_rng(seed);
    let c = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let margin = 0.5 + g.abs().max() * (n as f64);
    let l = &g - DMatrix::identity(n, n) * margin;

    // Start from random symmetric slices T(i), then remove the symmetrized
    // part: Q(i)_jk = T(i)_jk - s with s = (T(i)_jk + T(j)_ik + T(k)_ij)/3.
    // Working per index multiset keeps slices exactly symmetric.
    let t: Vec<DMatrix<f64>> = (0..n)
        .map(|_| {
            let raw = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
            (&raw + raw.transpose()) * 0.5
        })
        .collect();
    let mut triplets = Vec::new();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let s = (t[i][(j, k)] + t[j][(i, k)] + t[k][(i, j)]) / 3.0;
                for (a, b, cc) in [(i, j, k), (j, i, k), (k, i, j)] {
                    let v = t[a][(b, cc)] - s;
                    if v != 0.0 {
                        triplets.push((a, b.min(cc), b.max(cc), v));
                    }
                }
            }
        }
    }
    let q = QuadraticTensor::from_triplets(n, dedup_multiset_writes(triplets))
        .expect("projected tensor is well formed");
    LosslessQuadraticSystem::new(c, l, q).expect("projection onto the lossless subspace")
}

/// The multiset loop above can emit the same slice position more than once
/// when indices repeat (e.g. i = j); keep the first write only.
fn dedup_multiset_writes(
    triplets: Vec<(usize, usize, usize, f64)>,
) -> Vec<(usize, usize, usize, f64)> {
    let mut seen = std::collections::HashSet::new();
    triplets
        .into_iter()
        .filter(|&(i, j, k, _)| seen.insert((i, j, k)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_state_matches_reported_data() {
        let sys = two_state();
        assert_eq!(sys.lossless_defect(), 0.0);
        assert!(sys.eval_rhs(&DVector::from_vec(vec![0.0, 0.25])).unwrap().norm() <= 1e-15);
        let eigs = sys.shift(&DVector::zeros(2)).unwrap().eigs().clone();
        assert_eq!((eigs[0], eigs[1]), (-1.0, -4.0));
    }

    #[test]
    fn lorenz_shift_is_negative_definite() {
        let sys = lorenz_default();
        assert_eq!(sys.lossless_defect(), 0.0);
        let sf = sys.shift(&DVector::from_vec(vec![0.0, 0.0, 38.0])).unwrap();
        assert!(sf.lambda1() < 0.0);
        assert_relative_eq!(sf.d()[2], -304.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn orthogonal_matrices_are_orthogonal_and_deterministic() {
        for n in [1usize, 3, 7, 12] {
            let w = random_orthogonal(n, 5);
            let residual = (w.transpose() * &w - DMatrix::identity(n, n)).abs().max();
            assert!(residual <= 1e-12, "n = {n}: residual {residual:.2e}");
        }
        assert_eq!(random_orthogonal(6, 11), random_orthogonal(6, 11));
        assert_ne!(random_orthogonal(6, 11), random_orthogonal(6, 12));
        let w1 = random_orthogonal(1, 3);
        assert!(w1[(0, 0)] == 1.0 || w1[(0, 0)] == -1.0);
    }

    #[test]
    fn stacked_identity_rotation_reproduces_lorenz() {
        let (sys, w) = stacked_lorenz(1, 0);
        let reference = lorenz_default();
        assert_eq!(w, DMatrix::identity(3, 3));
        assert_eq!(sys.l(), reference.l());
        assert_eq!(sys.q().triplets(), reference.q().triplets());
    }

    /// The definitive check on tensor assembly: the rotated vector field
    /// equals the stacked field conjugated by W.
    #[test]
    fn stacked_rotation_correctness() {
        for (k, seed) in [(1usize, 2u64), (2, 3), (3, 7)] {
            let (rotated, w) = stacked_lorenz(k, seed);
            let (stacked, _) = stacked_lorenz(k, 0);
            let mut rng = seeded_rng(seed.wrapping_mul(31));
            for _ in 0..20 {
                let x = random_vector(3 * k, 10.0, &mut rng);
                let lhs = rotated.eval_rhs(&x).unwrap();
                let rhs = &w * stacked.eval_rhs(&(w.transpose() * &x)).unwrap();
                let scale = 1.0 + rhs.norm();
                assert!((lhs - rhs).norm() <= 1e-10 * scale, "K={k} seed={seed}");
            }
        }
    }

    #[test]
    fn stacked_rotation_stays_lossless_and_preserves_spectrum() {
        for (k, seed) in [(2usize, 1u64), (4, 9)] {
            let (rotated, _) = stacked_lorenz(k, seed);
            let tol = 1e-12 * (1.0 + rotated.q().max_abs());
            assert!(rotated.lossless_defect() <= tol);

            let (stacked, _) = stacked_lorenz(k, 0);
            let (e_rot, _) = crate::model::sorted_symmetric_eigen(&rotated.l_sym());
            let (e_stk, _) = crate::model::sorted_symmetric_eigen(&stacked.l_sym());
            assert!((e_rot - e_stk).abs().max() <= 1e-10);
        }
    }

    #[test]
    fn random_lossless_systems_pass_the_checked_constructor() {
        for seed in 0..50u64 {
            let n = 2 + (seed as usize % 3);
            let sys = random_lossless_system(n, seed);
            let tol = 1e-12 * (1.0 + sys.q().max_abs());
            assert!(sys.lossless_defect() <= tol);
            // Energy neutrality of the quadratic term on random states.
            let mut rng = seeded_rng(seed.wrapping_add(77));
            for _ in 0..10 {
                let x = random_vector(n, 3.0, &mut rng);
                let fx = sys.q().apply(&x);
                assert!(x.dot(&fx).abs() <= 1e-10 * (1.0 + x.norm().powi(3)) * (1.0 + sys.q().max_abs()));
            }
        }
    }
}
