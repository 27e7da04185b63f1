//! Fixed-step integration of trajectories and empirical checks that a
//! computed trapping region actually traps.

use nalgebra::DVector;
use std::io::Write;

use crate::error::{Error, Result};
use crate::model::{LosslessQuadraticSystem, ShiftedForm};

/// Divergence guard: integration aborts once the state norm passes this.
pub const DIVERGENCE_NORM: f64 = 1e12;

/// Slack applied to the radius when classifying samples as inside/outside.
pub const RADIUS_SLACK: f64 = 1e-3;

/// A uniformly sampled solution of the system dynamics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<DVector<f64>>,
    step_size: f64,
    method: &'static str,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[DVector<f64>] {
        &self.states
    }

    pub fn step_size(&self) -> f64 {
        self.step_size
    }

    pub fn method(&self) -> &str {
        self.method
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Classical fourth-order Runge-Kutta with fixed step `dt` from `x0` to
/// `t_final`. Aborts with a divergence error once the state norm exceeds
/// [`DIVERGENCE_NORM`] or turns non-finite.
pub fn integrate(
    sys: &LosslessQuadraticSystem,
    x0: &DVector<f64>,
    t_final: f64,
    dt: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0) || t_final < dt {
        return Err(Error::InvalidSystem(format!(
            "need dt > 0 and t_final >= dt, got dt = {dt}, t_final = {t_final}"
        )));
    }
    if x0.len() != sys.n() {
        return Err(Error::DimensionMismatch { expected: sys.n(), got: x0.len() });
    }
    let steps = (t_final / dt).round() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut x = x0.clone();
    times.push(0.0);
    states.push(x.clone());
    for step in 0..steps {
        let k1 = sys.eval_rhs(&x)?;
        let k2 = sys.eval_rhs(&(&x + &k1 * (dt / 2.0)))?;
        let k3 = sys.eval_rhs(&(&x + &k2 * (dt / 2.0)))?;
        let k4 = sys.eval_rhs(&(&x + &k3 * dt))?;
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        let t = (step + 1) as f64 * dt;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t });
        }
        let norm = x.norm();
        if norm > DIVERGENCE_NORM {
            return Err(Error::Diverged { t, norm });
        }
        times.push(t);
        states.push(x.clone());
    }
    Ok(Trajectory { times, states, step_size: dt, method: "rk4" })
}

/// Distance to the center `m` at each sample: `|x(t_i) - m|`.
pub fn energy_trace(traj: &Trajectory, m: &DVector<f64>) -> Result<Vec<f64>> {
    if let Some(x) = traj.states.first() {
        if x.len() != m.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), got: m.len() });
        }
    }
    Ok(traj.states.iter().map(|x| (x - m).norm()).collect())
}

/// True iff `|x(t) - m| <= R (1 + RADIUS_SLACK)` for every sample with
/// `t >= settle_time`.
pub fn check_ultimate_bound(
    traj: &Trajectory,
    m: &DVector<f64>,
    radius: f64,
    settle_time: f64,
) -> bool {
    let bound = radius * (1.0 + RADIUS_SLACK);
    traj.times
        .iter()
        .zip(&traj.states)
        .filter(|(t, _)| **t >= settle_time)
        .all(|(_, x)| (x - m).norm() <= bound)
}

/// Largest energy rate observed strictly outside the ball of radius
/// `R (1 + RADIUS_SLACK)` around the center; `None` when the trajectory
/// never leaves the ball (vacuous).
pub fn monotonicity_outside(
    traj: &Trajectory,
    sf: &ShiftedForm,
    radius: f64,
) -> Result<Option<f64>> {
    let bound = radius * (1.0 + RADIUS_SLACK);
    let mut worst: Option<f64> = None;
    for x in &traj.states {
        let y = x - sf.m();
        if y.norm() > bound {
            let rate = sf.energy_rate(&y)?;
            worst = Some(worst.map_or(rate, |w: f64| w.max(rate)));
        }
    }
    Ok(worst)
}

/// Writes the plot-ready CSV: `t,x1,...,xn,dist_to_center`, one row per
/// sample, round-trip-exact decimals.
pub fn write_trajectory_csv<W: Write>(
    traj: &Trajectory,
    m: &DVector<f64>,
    out: &mut W,
) -> std::io::Result<()> {
    let n = traj.states.first().map_or(0, |x| x.len());
    write!(out, "t")?;
    for i in 1..=n {
        write!(out, ",x{i}")?;
    }
    writeln!(out, ",dist_to_center")?;
    for (t, x) in traj.times.iter().zip(&traj.states) {
        write!(out, "{t}")?;
        for v in x.iter() {
            write!(out, ",{v}")?;
        }
        writeln!(out, ",{}", (x - m).norm())?;
    }
    Ok(())
}
