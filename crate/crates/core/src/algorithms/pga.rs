use std::time::Instant;

use rand::Rng;

use super::{RunMeta, Trajectory};
use crate::error::{Error, Result};
use crate::objectives::{dr_diagnostic, Objective};
use crate::oracles::project;
use crate::point::Point;
use crate::polytope::Polytope;

#[derive(Debug, Clone, Copy)]
pub enum StepSchedule {
    /// `η_t = D / (G √t)`
    Diminishing { diameter: f64, gradient_bound: f64 },
    Constant(f64),
}

impl StepSchedule {
    pub fn step(&self, t: usize) -> f64 {
        match *self {
            StepSchedule::Diminishing {
                diameter,
                gradient_bound,
            } => diameter / (gradient_bound * (t as f64).sqrt()),
            StepSchedule::Constant(eta) => eta,
        }
    }
}

/// Sampled `max ‖∇F‖` over the box of `polytope`, never below `1e-12`.
pub fn estimate_gradient_bound<F, R>(f: &F, polytope: &Polytope, trials: usize, rng: &mut R) -> Result<f64>
where
    F: Objective + ?Sized,
    R: Rng + ?Sized,
{
    let report = dr_diagnostic(f, polytope.upper(), trials, rng)?;
    let at_start = f.gradient(&polytope.min_inf_norm_point()?)?.norm2();
    Ok(report.gradient_bound_estimate.max(at_start).max(1e-12))
}

/// Offline projected gradient ascent `x^{t+1} = Proj(x^t + η_t ∇F(x^t))`.
///
/// Records `x^1 … x^{T+1}` and their values.
pub fn projected_gradient_ascent<F: Objective + ?Sized>(
    f: &F,
    polytope: &Polytope,
    horizon: usize,
    schedule: StepSchedule,
    start: Option<&Point>,
) -> Result<Trajectory> {
    if horizon == 0 {
        return Err(Error::InvalidInput("projected gradient ascent needs T >= 1".into()));
    }
    if f.dim() != polytope.dim() {
        return Err(Error::DimensionMismatch {
            expected: polytope.dim(),
            found: f.dim(),
        });
    }
    let mut x = match start {
        Some(s) => project(polytope, s)?,
        None => polytope.min_inf_norm_point()?,
    };
    let (diameter, gradient_bound) = match schedule {
        StepSchedule::Diminishing {
            diameter,
            gradient_bound,
        } => (Some(diameter), Some(gradient_bound)),
        StepSchedule::Constant(_) => (None, None),
    };
    let mut traj = Trajectory {
        algorithm: "proj-gradient".into(),
        meta: RunMeta {
            horizon,
            diameter,
            gradient_bound,
            ..RunMeta::default()
        },
        ..Trajectory::default()
    };
    traj.values.push(f.value(&x)?);
    traj.iterates.push(x.clone());
    for t in 1..=horizon {
        let clock = Instant::now();
        let g = f.gradient(&x)?;
        if !g.is_finite() {
            return Err(Error::NonFiniteGradient { iteration: t });
        }
        let eta = schedule.step(t);
        x = project(polytope, &x.axpy(eta, &g)?)?;
        traj.values.push(f.value(&x)?);
        traj.iterates.push(x.clone());
        traj.oracle_outputs.push(g);
        traj.step_sizes.push(eta);
        traj.wall_times.push(clock.elapsed().as_secs_f64());
    }
    Ok(traj)
}
