use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{RunMeta, Trajectory};
use crate::error::{Error, Result};
use crate::objectives::{stochastic_gradient, Objective};
use crate::oracles::project;
use crate::point::Point;
use crate::polytope::Polytope;

/// A replayable sequence of objectives `F^1, …, F^T`.
///
/// `objective_at(t)` must depend only on `t` and the stream's own seed so
/// that the benchmark can be evaluated after a run.
pub trait OnlineStream: Send + Sync {
    fn dim(&self) -> usize;

    fn horizon(&self) -> usize;

    /// The objective revealed at round `t` (1-based).
    fn objective_at(&self, t: usize) -> Result<Arc<dyn Objective>>;

    /// `(1/T) Σ_t F^t`; streams with linear structure can override this
    /// with a cheaper closed form.
    fn average_objective(&self) -> Result<Arc<dyn Objective>> {
        let parts = (1..=self.horizon())
            .map(|t| self.objective_at(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Arc::new(AverageObjective::new(parts)?))
    }
}

/// The same objective every round.
pub struct FixedStream {
    objective: Arc<dyn Objective>,
    horizon: usize,
}

impl FixedStream {
    pub fn new(objective: Arc<dyn Objective>, horizon: usize) -> Self {
        FixedStream { objective, horizon }
    }
}

impl OnlineStream for FixedStream {
    fn dim(&self) -> usize {
        self.objective.dim()
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn objective_at(&self, t: usize) -> Result<Arc<dyn Objective>> {
        if t == 0 || t > self.horizon {
            return Err(Error::InvalidInput(format!("round {t} outside 1..={}", self.horizon)));
        }
        Ok(Arc::clone(&self.objective))
    }

    fn average_objective(&self) -> Result<Arc<dyn Objective>> {
        Ok(Arc::clone(&self.objective))
    }
}

/// Arithmetic mean of several objectives of equal dimension.
pub struct AverageObjective {
    parts: Vec<Arc<dyn Objective>>,
}

impl AverageObjective {
    pub fn new(parts: Vec<Arc<dyn Objective>>) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::InvalidInput("cannot average zero objectives".into()));
        };
        let n = first.dim();
        if let Some(bad) = parts.iter().find(|p| p.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.dim(),
            });
        }
        Ok(AverageObjective { parts })
    }
}

impl Objective for AverageObjective {
    fn dim(&self) -> usize {
        self.parts[0].dim()
    }

    fn value(&self, x: &Point) -> Result<f64> {
        let mut total = 0.0;
        for p in &self.parts {
            total += p.value(x)?;
        }
        Ok(total / self.parts.len() as f64)
    }

    fn gradient(&self, x: &Point) -> Result<Point> {
        let mut total = vec![0.0; self.dim()];
        for p in &self.parts {
            for (acc, g) in total.iter_mut().zip(&p.gradient(x)?) {
                *acc += g;
            }
        }
        let k = self.parts.len() as f64;
        Point::new(total.into_iter().map(|v| v / k).collect())
    }

    fn family(&self) -> &'static str {
        "average"
    }
}

#[derive(Debug, Clone)]
pub struct OnlineOptions {
    pub diameter: f64,
    pub gradient_bound: f64,
    /// Standard deviation of the additive Gaussian gradient noise.
    pub sigma: f64,
    pub seed: u64,
    /// Defaults to the minimum-`‖x‖∞` point.
    pub start: Option<Point>,
    /// Run even if the polytope is not syntactically down-closed.
    pub assume_down_closed: bool,
}

/// Online stochastic gradient ascent with `η_t = D / (G √t)`.
///
/// Round `t` plays `x^t`, collects `F^t(x^t)`, draws `g^t` and moves to
/// `Proj(x^t + η_t g^t)`.
pub fn online_sga(
    stream: &dyn OnlineStream,
    polytope: &Polytope,
    opts: &OnlineOptions,
) -> Result<Trajectory> {
    let horizon = stream.horizon();
    if horizon == 0 {
        return Err(Error::InvalidInput("online horizon must be >= 1".into()));
    }
    if !(opts.diameter > 0.0 && opts.gradient_bound > 0.0) {
        return Err(Error::InvalidInput("D and G must be positive".into()));
    }
    if !opts.assume_down_closed && !polytope.down_closed_sufficient() {
        return Err(Error::InvalidInput(
            "online gradient ascent requires a down-closed polytope".into(),
        ));
    }
    if stream.dim() != polytope.dim() {
        return Err(Error::DimensionMismatch {
            expected: polytope.dim(),
            found: stream.dim(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x = match &opts.start {
        Some(s) => {
            if !polytope.contains(s, 1e-9)? {
                return Err(Error::InvalidInput("start point is not feasible".into()));
            }
            s.clone()
        }
        None => polytope.min_inf_norm_point()?,
    };
    let mut traj = Trajectory {
        algorithm: "online-sga".into(),
        meta: RunMeta {
            horizon,
            seed: Some(opts.seed),
            diameter: Some(opts.diameter),
            gradient_bound: Some(opts.gradient_bound),
            delta: None,
        },
        ..Trajectory::default()
    };
    for t in 1..=horizon {
        let clock = Instant::now();
        let f = stream.objective_at(t)?;
        traj.values.push(f.value(&x)?);
        let g = stochastic_gradient(f.as_ref(), &x, &mut rng, opts.sigma)?;
        if !g.is_finite() {
            return Err(Error::NonFiniteGradient { iteration: t });
        }
        let eta = opts.diameter / (opts.gradient_bound * (t as f64).sqrt());
        let next = project(polytope, &x.axpy(eta, &g)?)?;
        traj.iterates.push(std::mem::replace(&mut x, next));
        traj.oracle_outputs.push(g);
        traj.step_sizes.push(eta);
        traj.wall_times.push(clock.elapsed().as_secs_f64());
    }
    Ok(traj)
}

/// `[α · benchmark_avg_t − reward_avg_t] · √t` for each prefix `t`, where
/// the averages run over the first `t` rounds.
pub fn scaled_regret_gap(alpha: f64, rewards: &[f64], benchmark: &[f64]) -> Vec<f64> {
    let mut reward_sum = 0.0;
    let mut bench_sum = 0.0;
    rewards
        .iter()
        .zip(benchmark)
        .enumerate()
        .map(|(i, (r, b))| {
            reward_sum += r;
            bench_sum += b;
            let t = (i + 1) as f64;
            (alpha * bench_sum / t - reward_sum / t) * t.sqrt()
        })
        .collect()
}
