//! Offline Frank-Wolfe, online stochastic gradient ascent, the
//! projected-gradient baseline and a brute-force grid optimum.

mod frank_wolfe;
mod grid;
mod online;
mod pga;

pub use frank_wolfe::{
    frank_wolfe, fw_step_sizes, harmonic_number, product_bound_violation, approximation_floor,
    FrankWolfeOptions, DEFAULT_DELTA,
};
pub use grid::{grid_oracle, GridOptions, GridResult};
pub use online::{
    online_sga, scaled_regret_gap, AverageObjective, FixedStream, OnlineOptions, OnlineStream,
};
pub use pga::{estimate_gradient_bound, projected_gradient_ascent, StepSchedule};

use crate::point::Point;

#[derive(Debug, Clone, Default)]
pub struct RunMeta {
    pub horizon: usize,
    pub seed: Option<u64>,
    pub diameter: Option<f64>,
    pub gradient_bound: Option<f64>,
    pub delta: Option<f64>,
}

/// Per-iteration record of one algorithm run.
///
/// For Frank-Wolfe `iterates[0]` is the start point and `iterates[t]` the
/// point after step `t`, so there are `T + 1` iterates and `T` step sizes
/// and oracle outputs. Online runs store `x^1 … x^T` with the reward
/// `F^t(x^t)` of each round in `values`.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub algorithm: String,
    pub iterates: Vec<Point>,
    pub values: Vec<f64>,
    /// `v^t` for Frank-Wolfe, `g^t` for gradient methods.
    pub oracle_outputs: Vec<Point>,
    pub step_sizes: Vec<f64>,
    /// Seconds spent in each iteration.
    pub wall_times: Vec<f64>,
    pub meta: RunMeta,
}

impl Trajectory {
    pub fn final_point(&self) -> Option<&Point> {
        self.iterates.last()
    }

    pub fn final_value(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// Running sums `Σ_{s≤t} values[s]`.
    pub fn cumulative_values(&self) -> Vec<f64> {
        self.values
            .iter()
            .scan(0.0, |acc, v| {
                *acc += v;
                Some(*acc)
            })
            .collect()
    }
}
