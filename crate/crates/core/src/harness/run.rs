use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::output::{header, timing_path, write_csv, ResultRow, RowKind, TimingRow};
use crate::algorithms::{
    estimate_gradient_bound, frank_wolfe, grid_oracle, online_sga, projected_gradient_ascent, approximation_floor,
    FixedStream, FrankWolfeOptions, GridOptions, OnlineOptions, OnlineStream, StepSchedule, Trajectory,
};
use crate::error::{Error, Result};
use crate::instances::{generate, revenue_graph, revenue_polytopes, BatchStream, Family};
use crate::objectives::Objective;
use crate::point::Point;
use crate::polytope::Polytope;
use crate::seed::derive_seed;

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub timings: Vec<TimingRow>,
    pub csv_path: PathBuf,
    pub timing_path: PathBuf,
}

#[derive(Default)]
struct InstanceRows {
    rows: Vec<ResultRow>,
    timings: Vec<TimingRow>,
}

/// Seed of instance `index`: `derive_seed(master_seed, experiment id, index)`.
pub fn instance_seed(cfg: &ExperimentConfig, index: usize) -> u64 {
    derive_seed(cfg.master_seed, cfg.experiment.id(), index as u64)
}

/// Runs an offline or online experiment and writes its CSV and timing
/// sidecar.
///
/// Instances run in parallel; rows are merged in instance order. If an
/// instance fails, the rows of the instances before it are still written,
/// the files are marked partial, and the error is returned.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    validate(cfg)?;
    let results: Vec<Result<InstanceRows>> = (0..cfg.repeats)
        .into_par_iter()
        .map(|i| match cfg.experiment {
            ExperimentKind::OnlineRevenue | ExperimentKind::OnlineFixed => online_instance(cfg, i),
            _ => offline_instance(cfg, i),
        })
        .collect();

    let mut rows = Vec::new();
    let mut timings = Vec::new();
    let mut failure = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(part) => {
                rows.extend(part.rows);
                timings.extend(part.timings);
            }
            Err(e) => {
                failure = Some((i, e));
                break;
            }
        }
    }
    if failure.is_none() {
        let agg = aggregate(&rows);
        rows.extend(agg);
    }
    let head = header(cfg);
    let csv_path = cfg.output_path();
    let timing = timing_path(&csv_path);
    let status = failure.as_ref().map(|(i, e)| format!("partial, instance {i} failed: {e}"));
    write_csv(&csv_path, &head, &rows, status.as_deref())?;
    write_csv(&timing, &head, &timings, status.as_deref())?;
    if let Some((_, e)) = failure {
        return Err(e);
    }
    Ok(RunOutput {
        rows,
        timings,
        csv_path,
        timing_path: timing,
    })
}

fn validate(cfg: &ExperimentConfig) -> Result<()> {
    use ExperimentKind::*;
    let family = cfg.generator.family;
    let ok = match cfg.experiment {
        OfflineQuadratic => matches!(family, Family::QuadraticUniform | Family::QuadraticExponential),
        OfflineSoftmax => matches!(family, Family::SoftmaxUniform | Family::SoftmaxExponential),
        OfflineRevenue | OnlineRevenue => matches!(family, Family::RevenueSynthetic | Family::RevenueGraph),
        OnlineFixed => true,
        Verify | ProjectBench => {
            return Err(Error::Config(format!(
                "`{}` is not a run experiment; use `drsub {}`",
                cfg.experiment.id(),
                cfg.experiment.id()
            )))
        }
    };
    if !ok {
        return Err(Error::Config(format!(
            "generator family {} does not fit experiment {}",
            family.name(),
            cfg.experiment.id()
        )));
    }
    let alg = &cfg.algorithm;
    if cfg.repeats == 0 {
        return Err(Error::Config("repeats must be >= 1".into()));
    }
    if alg.horizon < 2 {
        return Err(Error::Config("T must be >= 2".into()));
    }
    if !(alg.sigma >= 0.0 && alg.delta > 0.0 && alg.grid_spacing > 0.0) {
        return Err(Error::Config("need sigma >= 0, delta > 0 and grid_spacing > 0".into()));
    }
    for (name, v) in [("diameter", alg.diameter), ("gradient_bound", alg.gradient_bound)] {
        if v.is_some_and(|v| !(v > 0.0)) {
            return Err(Error::Config(format!("{name} override must be positive")));
        }
    }
    Ok(())
}

fn start_point(cfg: &ExperimentConfig, n: usize) -> Result<Option<Point>> {
    match &cfg.algorithm.start {
        None => Ok(None),
        Some(v) if v.len() == n => Ok(Some(Point::new(v.clone())?)),
        Some(v) => Err(Error::DimensionMismatch {
            expected: n,
            found: v.len(),
        }),
    }
}

/// Builds rows that share the instance columns.
struct RowMaker<'a> {
    experiment: &'a str,
    instance: usize,
    seed: u64,
    n: usize,
    m: usize,
}

impl RowMaker<'_> {
    fn row(&self, kind: RowKind, algorithm: &str, t: usize, value: Option<f64>) -> ResultRow {
        ResultRow {
            kind,
            experiment: self.experiment.to_string(),
            instance: Some(self.instance),
            instance_seed: Some(self.seed),
            n: self.n,
            m: self.m,
            algorithm: algorithm.to_string(),
            t,
            value,
            ratio_vs_oracle: None,
            cumulative_reward: None,
            floor: None,
        }
    }

    fn timings(&self, traj: &Trajectory, first_t: usize) -> Vec<TimingRow> {
        traj.wall_times
            .iter()
            .enumerate()
            .map(|(k, &w)| TimingRow {
                experiment: self.experiment.to_string(),
                instance: self.instance,
                algorithm: traj.algorithm.clone(),
                t: first_t + k,
                wall_time: w,
            })
            .collect()
    }
}

fn gradient_bound<F: Objective + ?Sized>(
    cfg: &ExperimentConfig,
    f: &F,
    poly: &Polytope,
    seed: u64,
    label: &str,
) -> Result<f64> {
    match cfg.algorithm.gradient_bound {
        Some(g) => Ok(g),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, label, 0));
            estimate_gradient_bound(f, poly, cfg.algorithm.gradient_trials.max(1), &mut rng)
        }
    }
}

fn offline_instance(cfg: &ExperimentConfig, index: usize) -> Result<InstanceRows> {
    let alg = &cfg.algorithm;
    let seed = instance_seed(cfg, index);
    let mut spec = cfg.generator.clone();
    spec.seed = seed;
    let inst = generate(&spec)?;
    let (f, poly) = (&inst.objective, &inst.polytope);
    let maker = RowMaker {
        experiment: cfg.experiment.id(),
        instance: index,
        seed,
        n: poly.dim(),
        m: poly.num_constraints(),
    };
    let start = start_point(cfg, poly.dim())?;
    let mut out = InstanceRows::default();

    let fw = frank_wolfe(
        f,
        poly,
        alg.horizon,
        &FrankWolfeOptions {
            delta: alg.delta,
            start: start.clone(),
        },
    )?;
    let pga = if alg.baseline {
        let d = alg.diameter.unwrap_or_else(|| poly.diameter_bound());
        let g = gradient_bound(cfg, f, poly, seed, "gradient-bound")?;
        let schedule = StepSchedule::Diminishing {
            diameter: d,
            gradient_bound: g,
        };
        Some(projected_gradient_ascent(f, poly, alg.horizon, schedule, start.as_ref())?)
    } else {
        None
    };

    let mut oracle = None;
    if poly.dim() <= alg.grid_max_n {
        let opts = GridOptions {
            budget: alg.grid_budget,
            ..GridOptions::with_spacing(alg.grid_spacing)
        };
        let clock = Instant::now();
        match grid_oracle(f, poly, &opts) {
            Ok(r) => oracle = Some((r, clock.elapsed().as_secs_f64())),
            // too large a lattice: ratios stay empty
            Err(Error::GridBudget { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    // the grid optimum is a lower bound on OPT; any better value seen by an
    // algorithm is a tighter one
    let opt = oracle.as_ref().map(|(r, _)| {
        fw.values
            .iter()
            .chain(pga.iter().flat_map(|p| p.values.iter()))
            .fold(r.value, |a, &b| a.max(b))
    });
    let ratio = |v: f64| opt.filter(|&o| o > 0.0).map(|o| v / o);

    for traj in std::iter::once(&fw).chain(pga.as_ref()) {
        for (t, &v) in traj.values.iter().enumerate() {
            let mut row = maker.row(RowKind::Iter, &traj.algorithm, t, Some(v));
            row.ratio_vs_oracle = ratio(v);
            out.rows.push(row);
        }
        let last = *traj.values.last().expect("nonempty trajectory");
        let mut row = maker.row(RowKind::Summary, &traj.algorithm, alg.horizon, Some(last));
        row.ratio_vs_oracle = ratio(last);
        if traj.algorithm == "frank-wolfe" {
            row.floor = Some(approximation_floor(&fw.iterates[0], poly.upper()));
        }
        out.rows.push(row);
        out.timings.extend(maker.timings(traj, 1));
    }
    if let Some((r, secs)) = &oracle {
        let mut row = maker.row(RowKind::Summary, "grid-oracle", 0, Some(r.value));
        row.ratio_vs_oracle = ratio(r.value);
        out.rows.push(row);
        out.timings.push(TimingRow {
            experiment: maker.experiment.to_string(),
            instance: index,
            algorithm: "grid-oracle".into(),
            t: 0,
            wall_time: *secs,
        });
    }
    Ok(out)
}

/// Up to ten evenly spaced rounds in `1..=horizon`.
fn sample_rounds(horizon: usize) -> Vec<usize> {
    let k = horizon.min(10);
    let mut rounds: Vec<usize> = (0..k).map(|i| 1 + i * (horizon - 1) / (k - 1).max(1)).collect();
    rounds.dedup();
    rounds
}

fn online_instance(cfg: &ExperimentConfig, index: usize) -> Result<InstanceRows> {
    let alg = &cfg.algorithm;
    let seed = instance_seed(cfg, index);
    let mut spec = cfg.generator.clone();
    spec.seed = seed;
    let horizon = alg.horizon;
    let (stream, poly): (Box<dyn OnlineStream>, Polytope) = match cfg.experiment {
        ExperimentKind::OnlineRevenue => {
            let graph = Arc::new(revenue_graph(&spec)?);
            let (_, down) = revenue_polytopes(graph.n)?;
            let batch = alg.batch_vertices.unwrap_or((graph.n / 10).max(20)).min(graph.n);
            let stream = BatchStream::new(graph, batch, horizon, spec.p, derive_seed(seed, "stream", 0))?;
            (Box::new(stream), down)
        }
        _ => {
            let inst = generate(&spec)?;
            (Box::new(FixedStream::new(inst.objective.into_arc(), horizon)), inst.polytope)
        }
    };
    let n = poly.dim();
    let maker = RowMaker {
        experiment: cfg.experiment.id(),
        instance: index,
        seed,
        n,
        m: poly.num_constraints(),
    };
    let d = alg.diameter.unwrap_or_else(|| poly.diameter_bound());
    let g = match alg.gradient_bound {
        Some(g) => g,
        None => {
            let mut worst = 0.0f64;
            for t in sample_rounds(horizon) {
                let f = stream.objective_at(t)?;
                worst = worst.max(gradient_bound(cfg, &f, &poly, seed, &format!("gradient-bound/{t}"))?);
            }
            // noisy gradients are larger by about σ√n
            worst + 3.0 * alg.sigma * (n as f64).sqrt()
        }
    };
    let start = start_point(cfg, n)?;
    let traj = online_sga(
        stream.as_ref(),
        &poly,
        &OnlineOptions {
            diameter: d,
            gradient_bound: g,
            sigma: alg.sigma,
            seed: derive_seed(seed, "noise", 0),
            start: start.clone(),
            assume_down_closed: false,
        },
    )?;

    let clock = Instant::now();
    let avg = stream.average_objective()?;
    let g_avg = gradient_bound(cfg, &avg, &poly, seed, "gradient-bound/average")?;
    let bench = projected_gradient_ascent(
        &avg,
        &poly,
        alg.benchmark_steps.max(1),
        StepSchedule::Diminishing {
            diameter: d,
            gradient_bound: g_avg,
        },
        start.as_ref(),
    )?;
    // best iterate of the benchmark run, first one on ties
    let best_index = bench
        .values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
        .0;
    let x_star = &bench.iterates[best_index];
    let bench_values = (1..=horizon)
        .map(|t| stream.objective_at(t)?.value(x_star))
        .collect::<Result<Vec<f64>>>()?;
    let bench_secs = clock.elapsed().as_secs_f64();

    let mut cum = 0.0;
    let mut cum_bench = 0.0;
    let mut sga_rows = Vec::with_capacity(horizon);
    let mut bench_rows = Vec::with_capacity(horizon);
    for (k, (&r, &b)) in traj.values.iter().zip(&bench_values).enumerate() {
        cum += r;
        cum_bench += b;
        let t = k + 1;
        let mut row = maker.row(RowKind::Iter, "online-sga", t, Some(r));
        row.cumulative_reward = Some(cum);
        row.ratio_vs_oracle = (cum_bench > 0.0).then(|| cum / cum_bench);
        sga_rows.push(row);
        let mut row = maker.row(RowKind::Iter, "pga-benchmark", t, Some(b));
        row.cumulative_reward = Some(cum_bench);
        bench_rows.push(row);
    }
    let mut out = InstanceRows::default();
    let sga_summary = {
        let mut row = sga_rows.last().expect("horizon >= 1").clone();
        row.kind = RowKind::Summary;
        row
    };
    let bench_summary = {
        let mut row = maker.row(RowKind::Summary, "pga-benchmark", horizon, Some(avg.value(x_star)?));
        row.cumulative_reward = Some(cum_bench);
        row
    };
    out.rows.extend(sga_rows);
    out.rows.push(sga_summary);
    out.rows.extend(bench_rows);
    out.rows.push(bench_summary);
    out.timings.extend(maker.timings(&traj, 1));
    out.timings.push(TimingRow {
        experiment: maker.experiment.to_string(),
        instance: index,
        algorithm: "pga-benchmark".into(),
        t: horizon,
        wall_time: bench_secs,
    });
    Ok(out)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Means of the summary rows per algorithm, summed in instance order.
fn aggregate(rows: &[ResultRow]) -> Vec<ResultRow> {
    let summaries: Vec<&ResultRow> = rows.iter().filter(|r| r.kind == RowKind::Summary).collect();
    let mut algorithms: Vec<&str> = Vec::new();
    for r in &summaries {
        if !algorithms.contains(&r.algorithm.as_str()) {
            algorithms.push(&r.algorithm);
        }
    }
    algorithms
        .into_iter()
        .map(|alg| {
            let group: Vec<&&ResultRow> = summaries.iter().filter(|r| r.algorithm == alg).collect();
            let first = group[0];
            ResultRow {
                kind: RowKind::Aggregate,
                experiment: first.experiment.clone(),
                instance: None,
                instance_seed: None,
                n: first.n,
                m: first.m,
                algorithm: alg.to_string(),
                t: first.t,
                value: mean(group.iter().filter_map(|r| r.value)),
                ratio_vs_oracle: mean(group.iter().filter_map(|r| r.ratio_vs_oracle)),
                cumulative_reward: mean(group.iter().filter_map(|r| r.cumulative_reward)),
                floor: mean(group.iter().filter_map(|r| r.floor)),
            }
        })
        .collect()
}
