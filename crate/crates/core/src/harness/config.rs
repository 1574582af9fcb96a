use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithms::DEFAULT_DELTA;
use crate::error::{Error, Result};
use crate::instances::GeneratorSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    OfflineQuadratic,
    OfflineSoftmax,
    OfflineRevenue,
    OnlineRevenue,
    /// Online gradient ascent on a stream repeating one generated objective.
    OnlineFixed,
    Verify,
    ProjectBench,
}

impl ExperimentKind {
    pub fn id(self) -> &'static str {
        match self {
            ExperimentKind::OfflineQuadratic => "offline-quadratic",
            ExperimentKind::OfflineSoftmax => "offline-softmax",
            ExperimentKind::OfflineRevenue => "offline-revenue",
            ExperimentKind::OnlineRevenue => "online-revenue",
            ExperimentKind::OnlineFixed => "online-fixed",
            ExperimentKind::Verify => "verify",
            ExperimentKind::ProjectBench => "project-bench",
        }
    }
}

/// One experiment, read from a TOML file.
///
/// ```toml
/// experiment = "offline-quadratic"
/// repeats = 20
/// master_seed = 1
/// output = "results/quadratic.csv"
///
/// [generator]
/// family = "quadratic_uniform"
/// n = 6
/// m = 6
///
/// [algorithm]
/// T = 100
/// ```
///
/// Unknown keys are rejected in every section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub generator: GeneratorSpec,
    #[serde(default)]
    pub algorithm: AlgorithmParams,
    #[serde(default)]
    pub verify: VerifyParams,
    #[serde(default)]
    pub bench: BenchParams,
}

fn default_repeats() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmParams {
    #[serde(rename = "T")]
    pub horizon: usize,
    /// Frank-Wolfe step constant.
    pub delta: f64,
    /// Gradient noise for the online runs.
    pub sigma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diameter: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gradient_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
    /// Run the projected-gradient baseline next to Frank-Wolfe.
    pub baseline: bool,
    pub grid_spacing: f64,
    /// Largest `n` for which the grid optimum is computed.
    pub grid_max_n: usize,
    pub grid_budget: u64,
    /// Online revenue batch size; defaults to `max(20, n/10)` capped at `n`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_vertices: Option<usize>,
    /// Projected-gradient steps spent on the online benchmark point.
    pub benchmark_steps: usize,
    /// Samples behind the gradient-bound estimate.
    pub gradient_trials: usize,
}

impl Default for AlgorithmParams {
    fn default() -> Self {
        AlgorithmParams {
            horizon: 100,
            delta: DEFAULT_DELTA,
            sigma: 0.0,
            diameter: None,
            gradient_bound: None,
            start: None,
            baseline: true,
            grid_spacing: 0.02,
            grid_max_n: 8,
            grid_budget: 10_000_000,
            batch_vertices: None,
            benchmark_steps: 1000,
            gradient_trials: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyParams {
    /// Random trials per property and family.
    pub trials: usize,
    /// Dimension of the generated test objectives.
    pub n: usize,
    /// Objective families checked by the lattice-inequality suites.
    pub families: Vec<ObjectiveFamily>,
    pub tolerance: f64,
    pub identity_tolerance: f64,
    /// Tolerance of the finite-difference gradient check (relative).
    pub gradient_tolerance: f64,
    /// Interior points per family for the finite-difference check.
    pub gradient_points: usize,
    /// Live Frank-Wolfe runs checked for the product bound.
    pub fw_runs: usize,
    pub fw_horizon: usize,
    pub lp_instances: usize,
    /// Add a quadratic with a positive Hessian entry; the DR suite must
    /// then fail.
    pub inject_violation: bool,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams {
            trials: 1000,
            n: 6,
            families: vec![
                ObjectiveFamily::Quadratic,
                ObjectiveFamily::Softmax,
                ObjectiveFamily::Revenue,
            ],
            tolerance: 1e-7,
            identity_tolerance: 1e-12,
            gradient_tolerance: 1e-4,
            gradient_points: 100,
            fw_runs: 5,
            fw_horizon: 200,
            lp_instances: 200,
            inject_violation: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveFamily {
    Quadratic,
    Softmax,
    Revenue,
}

impl ObjectiveFamily {
    pub fn name(self) -> &'static str {
        match self {
            ObjectiveFamily::Quadratic => "quadratic",
            ObjectiveFamily::Softmax => "softmax",
            ObjectiveFamily::Revenue => "revenue",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchParams {
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub radius: f64,
    /// Largest allowed disagreement between the projection routines.
    pub tolerance: f64,
}

impl Default for BenchParams {
    fn default() -> Self {
        BenchParams {
            sizes: vec![2, 10, 50],
            trials: 1000,
            radius: 1.0,
            tolerance: 1e-8,
        }
    }
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment,
            repeats: default_repeats(),
            master_seed: 0,
            output: None,
            generator: GeneratorSpec::default(),
            algorithm: AlgorithmParams::default(),
            verify: VerifyParams::default(),
            bench: BenchParams::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Output path, defaulting to `results/<experiment>.csv` (`.txt` for
    /// the verification report).
    pub fn output_path(&self) -> PathBuf {
        let ext = if self.experiment == ExperimentKind::Verify { "txt" } else { "csv" };
        self.output
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("results/{}.{ext}", self.experiment.id())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::Family;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = ExperimentConfig::from_toml("experiment = \"offline-softmax\"\n").unwrap();
        assert_eq!(cfg.repeats, 20);
        assert_eq!(cfg.algorithm.horizon, 100);
        assert_eq!(cfg.output_path(), PathBuf::from("results/offline-softmax.csv"));
    }

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::OnlineRevenue);
        cfg.generator.family = Family::RevenueSynthetic;
        cfg.generator.n = 50;
        cfg.algorithm.start = Some(vec![0.0; 50]);
        cfg.algorithm.sigma = 0.1;
        cfg.output = Some("out/x.csv".into());
        let text = cfg.to_toml();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_errors() {
        for text in [
            "experiment = \"verify\"\ncolour = 1\n",
            "experiment = \"verify\"\n[algorithm]\nTT = 3\n",
            "experiment = \"verify\"\n[generator]\nfamly = \"x\"\n",
            "experiment = \"nothing\"\n",
        ] {
            assert!(matches!(ExperimentConfig::from_toml(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn horizon_key_is_capital_t() {
        let cfg = ExperimentConfig::from_toml("experiment = \"offline-quadratic\"\n[algorithm]\nT = 7\n").unwrap();
        assert_eq!(cfg.algorithm.horizon, 7);
    }
}
