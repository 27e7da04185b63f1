//! Brute-force verifiers, deliberately independent of the convex machinery:
//! sampled maximization over the ellipsoid boundary and exhaustive lattice
//! search over shifts.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::model::{EnergyEllipsoid, LosslessQuadraticSystem};
use crate::systems::{random_unit_vector, seeded_rng};

/// Summary of a sampled maximization over the ellipsoid boundary.
#[derive(Debug, Clone)]
pub struct SampleReport {
    pub sample_count: usize,
    /// Exact maximum norm over the generated sample set; a lower bound on
    /// the tight radius.
    pub max_norm_found: f64,
    pub argmax_point: DVector<f64>,
    /// Worst deviation of the sampled level `sum (w_i/alpha_i)^2` from 1.
    pub max_constraint_violation: f64,
}

/// Draws `count` boundary points `center + U diag(alpha) u` with `u`
/// uniform on the unit sphere. Deterministic per seed.
pub fn sample_e_boundary(
    ee: &EnergyEllipsoid,
    count: usize,
    seed: u64,
) -> Result<Vec<DVector<f64>>> {
    if ee.is_degenerate() {
        return Err(Error::DegenerateEllipsoid);
    }
    let mut rng = seeded_rng(seed);
    Ok((0..count)
        .map(|_| ee.boundary_point(&random_unit_vector(ee.dim(), &mut rng)))
        .collect())
}

/// Sampled lower bound on the tight radius: the maximum norm over `count`
/// boundary points. Converges to the radius from below as the count grows.
pub fn brute_force_radius(
    ee: &EnergyEllipsoid,
    count: usize,
    seed: u64,
) -> Result<SampleReport> {
    if ee.is_degenerate() {
        return Err(Error::DegenerateEllipsoid);
    }
    let mut rng = seeded_rng(seed);
    let mut best_norm = f64::NEG_INFINITY;
    let mut best_point = DVector::zeros(ee.dim());
    let mut worst_level: f64 = 0.0;
    for _ in 0..count {
        let y = ee.boundary_point(&random_unit_vector(ee.dim(), &mut rng));
        worst_level = worst_level.max((ee.level(&y) - 1.0).abs());
        let norm = y.norm();
        if norm > best_norm {
            best_norm = norm;
            best_point = y;
        }
    }
    Ok(SampleReport {
        sample_count: count,
        max_norm_found: if count == 0 { 0.0 } else { best_norm },
        argmax_point: best_point,
        max_constraint_violation: worst_level,
    })
}

/// Exhaustively evaluates `lambda_1(A_s(m))` on a uniform lattice over
/// `[-box_halfwidth, box_halfwidth]^n` and returns the minimizer.
///
/// Refuses dimensions above 4: the cost grows as `points_per_axis^n`.
pub fn lattice_search_shift(
    sys: &LosslessQuadraticSystem,
    box_halfwidth: f64,
    points_per_axis: usize,
) -> Result<(DVector<f64>, f64)> {
    let n = sys.n();
    if n > 4 {
        let evals = (points_per_axis as f64).powi(n as i32);
        return Err(Error::LatticeTooLarge { n, points: points_per_axis, evals });
    }
    assert!(points_per_axis >= 1 && box_halfwidth >= 0.0);
    let coordinate = |idx: usize| -> f64 {
        if points_per_axis == 1 {
            0.0
        } else {
            -box_halfwidth
                + 2.0 * box_halfwidth * (idx as f64) / ((points_per_axis - 1) as f64)
        }
    };

    let l_s = sys.l_sym();
    let total = points_per_axis.pow(n as u32);
    let mut best_m = DVector::zeros(n);
    let mut best_lambda1 = f64::INFINITY;
    let mut m = DVector::zeros(n);
    for flat in 0..total {
        let mut rem = flat;
        for axis in 0..n {
            m[axis] = coordinate(rem % points_per_axis);
            rem /= points_per_axis;
        }
        let a_s = &l_s - sys.q().weighted_sum(&m);
        let (eigs, _) = crate::model::sorted_symmetric_eigen(&a_s);
        if eigs[0] < best_lambda1 {
            best_lambda1 = eigs[0];
            best_m.copy_from(&m);
        }
    }
    Ok((best_m, best_lambda1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems;
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    fn two_state_ellipsoid() -> EnergyEllipsoid {
        systems::two_state()
            .shift(&DVector::zeros(2))
            .unwrap()
            .ellipsoid()
            .unwrap()
    }

    #[test]
    fn boundary_parametrization_axis_points() {
        let ee = two_state_ellipsoid();
        // Axes are e1 (semi-axis 1/4) and e2 (semi-axis 1/8) around (0, 1/8).
        let cases = [
            (DVector::from_vec(vec![1.0, 0.0]), vec![0.25, 0.125]),
            (DVector::from_vec(vec![-1.0, 0.0]), vec![-0.25, 0.125]),
            (DVector::from_vec(vec![0.0, 1.0]), vec![0.0, 0.25]),
            (DVector::from_vec(vec![0.0, -1.0]), vec![0.0, 0.0]),
        ];
        for (u, expect) in cases {
            let p = ee.boundary_point(&u);
            let sign = ee.axes()[(0, 0)].signum(); // eigvec sign is arbitrary
            let q = if sign < 0.0 { ee.boundary_point(&(-u)) } else { p.clone() };
            for i in 0..2 {
                assert_relative_eq!(q[i], expect[i], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_on_boundary() {
        let ee = two_state_ellipsoid();
        let a = sample_e_boundary(&ee, 64, 7).unwrap();
        let b = sample_e_boundary(&ee, 64, 7).unwrap();
        assert_eq!(a, b);
        assert!(sample_e_boundary(&ee, 0, 7).unwrap().is_empty());

        let sf = systems::lorenz_default()
            .shift(&DVector::from_vec(vec![0.0, 0.0, 38.0]))
            .unwrap();
        let ee = sf.ellipsoid().unwrap();
        for y in sample_e_boundary(&ee, 1000, 7).unwrap() {
            let rate = sf.energy_rate(&y).unwrap();
            assert!(rate.abs() <= 1e-8 * (1.0 + sf.d().norm() * y.norm()));
        }
    }

    #[test]
    fn sampling_rejects_degenerate_ellipsoid() {
        let sys = crate::model::LosslessQuadraticSystem::new(
            DVector::zeros(2),
            -nalgebra::DMatrix::identity(2, 2),
            crate::model::QuadraticTensor::zero(2),
        )
        .unwrap();
        let ee = sys.shift(&DVector::zeros(2)).unwrap().ellipsoid().unwrap();
        assert!(matches!(
            brute_force_radius(&ee, 10, 0),
            Err(Error::DegenerateEllipsoid)
        ));
    }

    #[test]
    fn brute_force_brackets_tight_radius_from_below() {
        let ee = two_state_ellipsoid();
        let r_tight = 1.0 / 12f64.sqrt();
        let report = brute_force_radius(&ee, 20_000, 1).unwrap();
        assert!(report.max_norm_found <= r_tight * (1.0 + 1e-6));
        assert!(report.max_norm_found >= r_tight * (1.0 - 1e-3));
        assert!(report.max_constraint_violation <= 1e-8);
    }

    #[test]
    fn lattice_finds_lorenz_optimum_region() {
        // Step 2 lattice over [-50, 50]^3 contains m = (0, 0, 38).
        let (best_m, best) =
            lattice_search_shift(&systems::lorenz_default(), 50.0, 51).unwrap();
        assert!(best <= -0.99, "best lambda1 = {best} at m = {best_m:?}");
    }

    #[test]
    fn lattice_on_zero_and_two_state_systems() {
        let (_, best) = lattice_search_shift(&systems::zero_system(3), 1.0, 5).unwrap();
        assert_eq!(best, 0.0);

        let (_, best) = lattice_search_shift(&systems::two_state(), 2.0, 41).unwrap();
        assert!(best <= -1.0 + 1e-6);
    }

    #[test]
    fn lattice_refuses_large_dimensions() {
        let err = lattice_search_shift(&systems::zero_system(5), 1.0, 11).unwrap_err();
        assert!(matches!(err, Error::LatticeTooLarge { n: 5, .. }));
    }
}
