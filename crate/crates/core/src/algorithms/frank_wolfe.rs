use std::time::Instant;

use super::{RunMeta, Trajectory};
use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::oracles::lmo;
use crate::point::Point;
use crate::polytope::Polytope;

/// `δ = ln(3)/2`, the step-size constant that balances the two exponential
/// factors of the guarantee at `1/(3√3)`.
pub const DEFAULT_DELTA: f64 = 0.549_306_144_334_054_9;

#[derive(Debug, Clone)]
pub struct FrankWolfeOptions {
    pub delta: f64,
    /// Defaults to the minimum-`‖x‖∞` point of the polytope.
    pub start: Option<Point>,
}

impl Default for FrankWolfeOptions {
    fn default() -> Self {
        FrankWolfeOptions {
            delta: DEFAULT_DELTA,
            start: None,
        }
    }
}

pub fn harmonic_number(t: usize) -> f64 {
    (1..=t).map(|k| 1.0 / k as f64).sum()
}

/// `η_t = δ / (t H_T)` for `t = 1..=T`.
pub fn fw_step_sizes(horizon: usize, delta: f64) -> Vec<f64> {
    let h = harmonic_number(horizon);
    (1..=horizon).map(|t| delta / (t as f64 * h)).collect()
}

/// Frank-Wolfe with harmonic step sizes.
///
/// `x⁰ = x¹` is the start point; step `t` solves the LMO at the current
/// iterate and moves `x ← (1 − η_t) x + η_t v^t`.
pub fn frank_wolfe<F: Objective + ?Sized>(
    f: &F,
    polytope: &Polytope,
    horizon: usize,
    opts: &FrankWolfeOptions,
) -> Result<Trajectory> {
    if horizon < 2 {
        return Err(Error::InvalidInput("Frank-Wolfe needs T >= 2".into()));
    }
    if f.dim() != polytope.dim() {
        return Err(Error::DimensionMismatch {
            expected: polytope.dim(),
            found: f.dim(),
        });
    }
    let mut x = match &opts.start {
        Some(s) => {
            if !polytope.contains(s, 1e-9)? {
                return Err(Error::InvalidInput("start point is not feasible".into()));
            }
            s.clone()
        }
        None => polytope.min_inf_norm_point()?,
    };
    let steps = fw_step_sizes(horizon, opts.delta);
    let mut traj = Trajectory {
        algorithm: "frank-wolfe".into(),
        iterates: Vec::with_capacity(horizon + 1),
        values: Vec::with_capacity(horizon + 1),
        oracle_outputs: Vec::with_capacity(horizon),
        step_sizes: steps.clone(),
        wall_times: Vec::with_capacity(horizon),
        meta: RunMeta {
            horizon,
            diameter: Some(polytope.diameter_bound()),
            delta: Some(opts.delta),
            ..RunMeta::default()
        },
    };
    traj.values.push(f.value(&x)?);
    traj.iterates.push(x.clone());
    for (t, &eta) in steps.iter().enumerate() {
        let clock = Instant::now();
        let grad = f.gradient(&x)?;
        if !grad.is_finite() {
            return Err(Error::NonFiniteGradient { iteration: t + 1 });
        }
        let v = lmo(polytope, &grad)?;
        x = x.lerp(eta, &v)?;
        traj.values.push(f.value(&x)?);
        traj.iterates.push(x.clone());
        traj.oracle_outputs.push(v);
        traj.wall_times.push(clock.elapsed().as_secs_f64());
    }
    Ok(traj)
}

/// Worst violation of `u_i − x_i^t ≥ (u_i − x_i^1) Π_{t'≤t}(1 − η_{t'})`,
/// normalized by `u_i`. With `u = 1` this is the literal product bound on
/// `1 − x_i^t`; a value ≤ 0 means the bound holds.
pub fn product_bound_violation(traj: &Trajectory, upper: &[f64]) -> f64 {
    let Some(start) = traj.iterates.first() else {
        return 0.0;
    };
    let mut product = 1.0;
    let mut worst = f64::NEG_INFINITY;
    for (x, eta) in traj.iterates.iter().skip(1).zip(&traj.step_sizes) {
        product *= 1.0 - eta;
        for i in 0..x.dim() {
            let lhs = 1.0 - x[i] / upper[i];
            let rhs = (1.0 - start[i] / upper[i]) * product;
            worst = worst.max(rhs - lhs);
        }
    }
    worst
}

/// `(1/(3√3)) · (1 − ‖x¹/u‖∞)`, the multiplicative floor of the offline
/// guarantee for a start point `x¹`.
pub fn approximation_floor(start: &Point, upper: &[f64]) -> f64 {
    let scaled = start
        .iter()
        .zip(upper)
        .fold(0.0f64, |acc, (x, u)| acc.max(x / u));
    (1.0 - scaled) / (3.0 * 3f64.sqrt())
}
