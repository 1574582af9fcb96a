use std::path::PathBuf;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::output::{header, timing_path, write_csv};
use crate::error::{Error, Result};
use crate::oracles::{project_dykstra, project_simplex_iterative, project_simplex_sorted};
use crate::point::Point;
use crate::polytope::Polytope;
use crate::seed::derive_seed;

/// Agreement of the three projection routines at one size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub trials: usize,
    pub radius: f64,
    pub max_diff_iterative: f64,
    pub max_diff_dykstra: f64,
}

/// Total seconds per routine; written to the timing sidecar.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchTiming {
    pub n: usize,
    pub trials: usize,
    pub sorted_seconds: f64,
    pub iterative_seconds: f64,
    pub dykstra_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct BenchOutput {
    pub rows: Vec<BenchRow>,
    pub timings: Vec<BenchTiming>,
    pub csv_path: PathBuf,
    pub timing_path: PathBuf,
}

/// Projects the same Gaussian points `radius · N(0, I)` onto
/// `{x ≥ 0, Σx ≤ radius}` with the sorting method, the iterative method and
/// Dykstra on the equivalent polytope. Any disagreement above
/// `bench.tolerance` is an error carrying the offending point.
pub fn run_project_bench(cfg: &ExperimentConfig) -> Result<BenchOutput> {
    let b = &cfg.bench;
    if b.sizes.is_empty() || b.sizes.contains(&0) || b.trials == 0 || !(b.radius > 0.0) {
        return Err(Error::Config(
            "project-bench needs nonempty positive sizes, trials >= 1 and radius > 0".into(),
        ));
    }
    let mut rows = Vec::new();
    let mut timings = Vec::new();
    for &n in &b.sizes {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.master_seed, "project-bench", n as u64));
        let points: Vec<Point> = (0..b.trials)
            .map(|_| {
                let v = (0..n).map(|_| b.radius * rng.sample::<f64, _>(StandardNormal)).collect();
                Point::new(v)
            })
            .collect::<Result<_>>()?;
        let poly = Polytope::new(DMatrix::from_element(1, n, 1.0), vec![b.radius], vec![b.radius; n])?;

        let clock = Instant::now();
        let sorted: Vec<Point> = points.iter().map(|x| project_simplex_sorted(x, b.radius)).collect();
        let sorted_seconds = clock.elapsed().as_secs_f64();
        let clock = Instant::now();
        let iterative = points
            .iter()
            .map(|x| project_simplex_iterative(x, b.radius))
            .collect::<Result<Vec<_>>>()?;
        let iterative_seconds = clock.elapsed().as_secs_f64();
        let clock = Instant::now();
        let dykstra = points.iter().map(|x| project_dykstra(&poly, x)).collect::<Result<Vec<_>>>()?;
        let dykstra_seconds = clock.elapsed().as_secs_f64();

        let mut row = BenchRow {
            n,
            trials: b.trials,
            radius: b.radius,
            max_diff_iterative: 0.0,
            max_diff_dykstra: 0.0,
        };
        for (k, x) in points.iter().enumerate() {
            let di = sorted[k].max_abs_diff(&iterative[k])?;
            let dd = sorted[k].max_abs_diff(&dykstra[k])?;
            if di.max(dd) > b.tolerance || di.is_nan() || dd.is_nan() {
                return Err(Error::Verification(format!(
                    "projections disagree at n={n}: |sorted-iterative|={di:.3e}, |sorted-dykstra|={dd:.3e} \
                     (tolerance {:e}) for x={x:?}",
                    b.tolerance
                )));
            }
            row.max_diff_iterative = row.max_diff_iterative.max(di);
            row.max_diff_dykstra = row.max_diff_dykstra.max(dd);
        }
        rows.push(row);
        timings.push(BenchTiming {
            n,
            trials: b.trials,
            sorted_seconds,
            iterative_seconds,
            dykstra_seconds,
        });
    }
    let head = header(cfg);
    let csv_path = cfg.output_path();
    let timing = timing_path(&csv_path);
    write_csv(&csv_path, &head, &rows, None)?;
    write_csv(&timing, &head, &timings, None)?;
    Ok(BenchOutput {
        rows,
        timings,
        csv_path,
        timing_path: timing,
    })
}
