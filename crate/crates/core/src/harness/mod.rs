//! Experiment orchestration: TOML configs, offline and online runs, the
//! property suites and the projection benchmark.
//!
//! Every output file starts with `# ` lines holding the artifact version,
//! the schema name and the full config; the rest is plain CSV (or, for
//! `verify`, one `PASS`/`FAIL` line per suite). Instance `i` of an
//! experiment uses the seed `derive_seed(master_seed, experiment, i)`, and
//! the instance is regenerated for every repeat.

mod bench;
mod config;
mod output;
mod run;
mod verify;

use std::path::PathBuf;

pub use bench::{run_project_bench, BenchOutput, BenchRow, BenchTiming};
pub use config::{AlgorithmParams, BenchParams, ExperimentConfig, ExperimentKind, ObjectiveFamily, VerifyParams};
pub use output::{csv_body, header, timing_path, ResultRow, RowKind, TimingRow, SCHEMA, VERSION};
pub use run::{instance_seed, run_experiment, RunOutput};
pub use verify::{
    gradient_relative_error, identity_residual, first_order_violation, four_term_violation, lp_by_enumeration,
    join_bound_violation, random_feasible_point, random_polytope, run_verify, test_objective, SuiteResult,
    VerifyReport,
};

use crate::error::Result;

#[derive(Debug)]
pub enum Outcome {
    Run(RunOutput),
    Verify { report: VerifyReport, path: PathBuf },
    Bench(BenchOutput),
}

/// Runs the suites and writes the report (config header, then one line per
/// suite).
pub fn verify_to_file(cfg: &ExperimentConfig) -> Result<(VerifyReport, PathBuf)> {
    let report = run_verify(cfg)?;
    let path = cfg.output_path();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&path, format!("{}{}", header(cfg), report.to_text()))?;
    Ok((report, path))
}

/// Dispatches on `cfg.experiment`.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.experiment {
        ExperimentKind::Verify => verify_to_file(cfg).map(|(report, path)| Outcome::Verify { report, path }),
        ExperimentKind::ProjectBench => run_project_bench(cfg).map(Outcome::Bench),
        _ => run_experiment(cfg).map(Outcome::Run),
    }
}
