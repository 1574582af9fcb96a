//! Acceptance criteria, one test per criterion. Each test prints a single
//! `criterion N: PASS|FAIL ...` line before asserting.

mod common;

use std::sync::Arc;
use std::time::Instant;

use common::*;
use drsub::algorithms::{
    frank_wolfe, fw_step_sizes, grid_oracle, online_sga, FixedStream, FrankWolfeOptions, GridOptions, OnlineOptions,
};
use drsub::harness::{csv_body, run_experiment, ExperimentConfig, ExperimentKind, RowKind};
use drsub::instances::{gen_quadratic, gen_softmax, Family, GeneratorSpec, WeightedGraph};
use drsub::objectives::{Objective, RevenueObjective};
use drsub::oracles::{
    lp_solve, project, project_dykstra, project_simplex_iterative, project_simplex_sorted, Sense,
};
use drsub::Polytope;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const FLOOR: f64 = 0.192_450_089_729_875_26; // 1/(3√3)

/// The three families, each paired with a shift making it nonnegative on
/// the unit cube.
fn families(n: usize, seed: u64) -> Vec<(&'static str, Box<dyn Objective>, f64)> {
    let (q, _, _) = gen_quadratic(&GeneratorSpec::new(Family::QuadraticUniform, n, n, seed)).unwrap();
    let (s, _) = gen_softmax(&GeneratorSpec::new(Family::SoftmaxUniform, n, n, seed)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = WeightedGraph::random(n, 0.6, &mut rng).unwrap();
    let r = RevenueObjective::new(n, g.edges, 0.4).unwrap();
    let boxed: Vec<(&'static str, Box<dyn Objective>)> =
        vec![("quadratic", Box::new(q)), ("softmax", Box::new(s)), ("revenue", Box::new(r))];
    boxed
        .into_iter()
        .map(|(name, f)| {
            let shift = (-cube_minimum(f.as_ref())).max(0.0);
            (name, f, shift)
        })
        .collect()
}

#[test]
fn criterion_1_lattice_inequalities() {
    let clock = Instant::now();
    let n = 6;
    let trials = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = [f64::NEG_INFINITY; 3];
    let mut worst_identity = 0.0f64;
    for (name, f, shift) in families(n, 11) {
        let v = |x: &[f64]| value(f.as_ref(), x) + shift;
        let (mut w1, mut w2, mut w4) = (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for _ in 0..trials {
            // first inequality: F(x∨y) + F(x∧y) − 2F(x) ≤ ⟨∇F(x), y − x⟩
            let x = uniform(&mut rng, n, 1.0);
            let y = uniform(&mut rng, n, 1.0);
            let lhs = v(&join(&x, &y)) + v(&meet(&x, &y)) - 2.0 * v(&x);
            w1 = w1.max(lhs - dot(&gradient(f.as_ref(), &x), &sub(&y, &x)));

            // F(x∨y) ≥ (1 − ‖x‖∞) F(y)
            let xinf = x.iter().fold(0.0f64, |m, a| m.max(*a));
            w4 = w4.max((1.0 - xinf) * v(&y) - v(&join(&x, &y)));

            // four-term inequality with z* = x∨y − x; x + z stays in the cube
            let x = uniform(&mut rng, n, 0.5);
            let z = uniform(&mut rng, n, 0.5);
            let zs = sub(&join(&x, &y), &x);
            let four = v(&join(&x, &y)) + v(&meet(&x, &y)) + v(&join(&zs, &z)) + v(&meet(&zs, &z));
            w2 = w2.max(v(&y) - four);

            // x∨y − z* = (x+z)∨y − z∨z*
            let left = sub(&join(&x, &y), &zs);
            let right = sub(&join(&add(&x, &z), &y), &join(&z, &zs));
            worst_identity = worst_identity.max(max_abs_diff(&left, &right));
        }
        report(&format!("  {name}: first {w1:.3e}, four-term {w2:.3e}, join bound {w4:.3e}"));
        worst[0] = worst[0].max(w1);
        worst[1] = worst[1].max(w2);
        worst[2] = worst[2].max(w4);
    }
    let secs = clock.elapsed().as_secs_f64();
    let ok = worst.iter().all(|&w| w <= 1e-7) && worst_identity <= 1e-12 && secs < 30.0;
    report(&format!(
        "criterion 1: {} lattice inequalities, worst {:.3e}/{:.3e}/{:.3e}, identity {:.3e}, {secs:.1}s",
        verdict(ok),
        worst[0],
        worst[1],
        worst[2],
        worst_identity
    ));
    assert!(ok);
}

#[test]
fn criterion_2_gradients() {
    let clock = Instant::now();
    let n = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for (name, f, _) in families(n, 22) {
        let mut w = 0.0f64;
        for _ in 0..100 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.95)).collect();
            let g = gradient(f.as_ref(), &x);
            let fd = central_difference(f.as_ref(), &x, 1e-5);
            let scale = g.iter().fold(0.0f64, |m, a| m.max(a.abs())).max(1e-8);
            w = w.max(max_abs_diff(&g, &fd) / scale);
        }
        report(&format!("  {name}: relative error {w:.3e}"));
        worst = worst.max(w);
    }
    let secs = clock.elapsed().as_secs_f64();
    let ok = worst <= 1e-4 && secs < 10.0;
    report(&format!("criterion 2: {} gradients, worst relative error {worst:.3e}, {secs:.1}s", verdict(ok)));
    assert!(ok);
}

#[test]
fn criterion_3_projections() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst_agree = 0.0f64;
    for n in [2usize, 10, 50] {
        let poly = Polytope::new(DMatrix::from_element(1, n, 1.0), vec![1.0], vec![1.0; n]).unwrap();
        for k in 0..1000 {
            // mix of scales, including all-negative and already-feasible points
            let scale = [0.05, 0.5, 1.0, 3.0][k % 4];
            let mut x: Vec<f64> = (0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
            if k % 50 == 0 {
                x.iter_mut().for_each(|v| *v = -v.abs());
            }
            let p = pt(&x);
            let sorted = project_simplex_sorted(&p, 1.0).into_vec();
            let iterative = project_simplex_iterative(&p, 1.0).unwrap().into_vec();
            let dykstra = project_dykstra(&poly, &p).unwrap().into_vec();
            worst_agree = worst_agree.max(max_abs_diff(&sorted, &iterative)).max(max_abs_diff(&sorted, &dykstra));
        }
    }

    // Pythagorean: ‖P(x) − z‖ ≤ ‖x − z‖ for feasible z
    let mut worst_pyth = f64::NEG_INFINITY;
    let mut draws = 0;
    while draws < 1000 {
        let n = rng.gen_range(2..=8);
        let m = rng.gen_range(1..=n);
        let (poly, interior) = if draws % 2 == 0 {
            let a = DMatrix::from_fn(m, n, |_, _| 0.05 + rng.gen::<f64>());
            (Polytope::new(a, vec![1.0; m], vec![1.0; n]).unwrap(), vec![0.0; n])
        } else {
            let a = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..=1.0));
            let x0: Vec<f64> = uniform(&mut rng, n, 1.0);
            let b = (0..m)
                .map(|i| (0..n).map(|j| a[(i, j)] * x0[j]).sum::<f64>() + rng.gen_range(0.0..0.3))
                .collect();
            (Polytope::new(a, b, vec![1.0; n]).unwrap(), x0)
        };
        for _ in 0..10 {
            // a feasible z on the segment from a known feasible point to a
            // random box point
            let w = uniform(&mut rng, n, 1.0);
            let mut lambda = 1.0;
            let mut z = w.clone();
            while !is_feasible(&poly, &z, 0.0) {
                lambda *= 0.5;
                z = interior.iter().zip(&w).map(|(a, b)| a + lambda * (b - a)).collect();
            }
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..2.5)).collect();
            let px = project(&poly, &pt(&x)).unwrap().into_vec();
            assert!(is_feasible(&poly, &px, 1e-9));
            worst_pyth = worst_pyth.max(dist(&px, &z) - dist(&x, &z));
            draws += 1;
        }
    }
    let ok = worst_agree <= 1e-8 && worst_pyth <= 1e-7;
    report(&format!(
        "criterion 3: {} projections, disagreement {worst_agree:.3e}, Pythagorean worst {worst_pyth:.3e}",
        verdict(ok)
    ));
    assert!(ok);
}

#[test]
fn criterion_4_lp_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = 0.0f64;
    for k in 0..200 {
        let n = rng.gen_range(1..=6);
        let m = rng.gen_range(1..=6);
        let poly = if k % 2 == 0 {
            let a = DMatrix::from_fn(m, n, |_, _| rng.gen::<f64>());
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
            Polytope::new(a, (0..m).map(|_| rng.gen_range(0.3..1.5)).collect(), u).unwrap()
        } else {
            let a = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..=1.0));
            let x0 = uniform(&mut rng, n, 1.0);
            let b = (0..m)
                .map(|i| (0..n).map(|j| a[(i, j)] * x0[j]).sum::<f64>() + rng.gen_range(0.0..0.5))
                .collect();
            Polytope::new(a, b, vec![1.0; n]).unwrap()
        };
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let sol = lp_solve(poly.a(), poly.b(), &vec![0.0; n], poly.upper(), &c, Sense::Maximize).unwrap();
        let expected = enumerate_lp(&poly, &c).expect("feasible by construction");
        assert!(sol.is_optimal());
        worst = worst.max((sol.objective - expected).abs());
    }
    let ok = worst <= 1e-8;
    report(&format!("criterion 4: {} LP vs enumeration on 200 instances, worst gap {worst:.3e}", verdict(ok)));
    assert!(ok);
}

/// Worst violation of `1 − x_i^t/u_i ≥ (1 − x_i^1/u_i) Π_{t'≤t}(1 − η_{t'})`.
fn product_bound_violation(iterates: &[drsub::Point], steps: &[f64], upper: &[f64]) -> f64 {
    let start = iterates[0].as_slice();
    let mut product = 1.0;
    let mut worst = f64::NEG_INFINITY;
    for (x, eta) in iterates[1..].iter().zip(steps) {
        product *= 1.0 - eta;
        for ((xi, si), ui) in x.iter().zip(start).zip(upper) {
            worst = worst.max((1.0 - si / ui) * product - (1.0 - xi / ui));
        }
    }
    worst
}

#[test]
fn criteria_5_and_6_offline_floor_and_product_bound() {
    let clock = Instant::now();
    let mut worst_ratio = f64::INFINITY;
    let mut worst_product = f64::NEG_INFINITY;
    for k in 0..20u64 {
        let n = if k < 10 { 4 } else { 6 };
        let spec = GeneratorSpec::new(Family::QuadraticUniform, n, n, 5000 + k);
        let (f, poly, _) = gen_quadratic(&spec).unwrap();
        assert!(is_feasible(&poly, &vec![0.0; n], 0.0), "0 must be feasible");
        let traj = frank_wolfe(&f, &poly, 200, &FrankWolfeOptions::default()).unwrap();
        assert!(traj.iterates[0].iter().all(|&v| v == 0.0), "start is the origin");
        let opt = grid_oracle(&f, &poly, &GridOptions::with_spacing(0.02)).unwrap();
        let ratio = traj.final_value().unwrap() / opt.value;
        worst_ratio = worst_ratio.min(ratio);
        // recomputed steps, not the ones stored in the trajectory
        let steps = fw_step_sizes(200, 3f64.ln() / 2.0);
        assert_eq!(steps.len(), traj.step_sizes.len());
        worst_product = worst_product.max(product_bound_violation(&traj.iterates, &steps, poly.upper()));
    }
    let secs = clock.elapsed().as_secs_f64();
    let ok5 = worst_ratio >= FLOOR - 0.02 && secs < 300.0;
    let ok6 = worst_product <= 1e-9;
    report(&format!(
        "criterion 5: {} offline floor, worst ratio {worst_ratio:.4} vs {:.4}, {secs:.1}s",
        verdict(ok5),
        FLOOR - 0.02
    ));
    report(&format!("criterion 6: {} product bound, worst violation {worst_product:.3e}", verdict(ok6)));
    assert!(ok5 && ok6);
}

#[test]
fn criterion_7_online_regret() {
    let clock = Instant::now();
    let n = 6;
    let horizon = 2000;
    let seeds = 20;
    let mut worst_multiple = f64::NEG_INFINITY;
    let mut all_ok = true;
    for sigma in [0.0, 0.1] {
        // gap curves averaged over seeds, each normalized by its own D·G
        let mut gap_sum = vec![0.0; horizon];
        let mut dg_sum = 0.0;
        for s in 0..seeds {
            let mut spec = GeneratorSpec::new(Family::QuadraticUniform, n, 1, 7000 + s);
            spec.simplex = true;
            let (f, poly, _) = gen_quadratic(&spec).unwrap();
            let opt = grid_oracle(&f, &poly, &GridOptions::with_spacing(0.02)).unwrap().value;
            let d = poly.diameter_bound();
            // ‖Hx + h‖ is convex in x, so its maximum over the cube (which
            // contains K) sits at a cube vertex
            let g_exact = (0..1u32 << n)
                .map(|mask| {
                    let x: Vec<f64> = (0..n).map(|i| f64::from((mask >> i) & 1)).collect();
                    gradient(&f, &x).iter().map(|v| v * v).sum::<f64>().sqrt()
                })
                .fold(0.0f64, f64::max);
            let g = g_exact + 3.0 * sigma * (n as f64).sqrt();
            let stream = FixedStream::new(Arc::new(f), horizon);
            let traj = online_sga(
                &stream,
                &poly,
                &OnlineOptions {
                    diameter: d,
                    gradient_bound: g,
                    sigma,
                    seed: 90 + s,
                    start: None,
                    assume_down_closed: false,
                },
            )
            .unwrap();
            let mut reward = 0.0;
            for (t, r) in traj.values.iter().enumerate() {
                reward += r;
                let tt = (t + 1) as f64;
                gap_sum[t] += (0.25 * opt - reward / tt) * tt.sqrt();
            }
            dg_sum += d * g;
        }
        let dg = dg_sum / seeds as f64;
        let worst_gap = gap_sum[9..].iter().map(|v| v / seeds as f64).fold(f64::NEG_INFINITY, f64::max);
        let multiple = worst_gap / dg;
        worst_multiple = worst_multiple.max(multiple);
        all_ok &= multiple <= 8.0;
        report(&format!("  sigma {sigma}: max gap·√t = {multiple:.4}·D·G over t in [10, {horizon}]"));
    }
    let secs = clock.elapsed().as_secs_f64();
    let ok = all_ok && secs < 180.0;
    report(&format!(
        "criterion 7: {} online regret, worst {worst_multiple:.4}·D·G (limit 8, derived 2), {secs:.1}s",
        verdict(ok)
    ));
    assert!(ok);
}

fn final_aggregate(rows: &[drsub::harness::ResultRow], algorithm: &str) -> drsub::harness::ResultRow {
    rows.iter()
        .find(|r| r.kind == RowKind::Aggregate && r.algorithm == algorithm)
        .unwrap_or_else(|| panic!("no aggregate row for {algorithm}"))
        .clone()
}

#[test]
fn criterion_8_revenue_and_online_ratio() {
    let dir = tempfile::tempdir().unwrap();

    let mut offline = ExperimentConfig::new(ExperimentKind::OfflineRevenue);
    offline.generator.family = Family::RevenueSynthetic;
    offline.generator.n = 100;
    offline.generator.p = 1e-4;
    offline.repeats = 5;
    offline.master_seed = 8;
    offline.output = Some(dir.path().join("offline-revenue.csv"));
    let out = run_experiment(&offline).unwrap();
    let mut offline_ok = true;
    for r in out.rows.iter().filter(|r| r.kind == RowKind::Summary && r.algorithm == "frank-wolfe") {
        let pga = out
            .rows
            .iter()
            .find(|p| p.kind == RowKind::Summary && p.algorithm == "proj-gradient" && p.instance == r.instance)
            .unwrap();
        let (fw, base) = (r.value.unwrap(), pga.value.unwrap());
        report(&format!("  offline instance {:?}: frank-wolfe {fw:.6e}, proj-gradient {base:.6e}", r.instance));
        offline_ok &= fw >= 0.0 && fw >= 0.9 * base;
    }

    let mut online = ExperimentConfig::new(ExperimentKind::OnlineFixed);
    online.generator.family = Family::QuadraticUniform;
    online.generator.n = 6;
    online.generator.simplex = true;
    online.algorithm.horizon = 2000;
    online.algorithm.sigma = 0.0;
    online.repeats = 20;
    online.master_seed = 8;
    online.output = Some(dir.path().join("online-fixed.csv"));
    let out = run_experiment(&online).unwrap();
    let curve_rows = out
        .rows
        .iter()
        .filter(|r| r.kind == RowKind::Iter && r.algorithm == "online-sga" && r.ratio_vs_oracle.is_some())
        .count();
    let final_ratio = final_aggregate(&out.rows, "online-sga").ratio_vs_oracle.unwrap();
    let min_instance_ratio = out
        .rows
        .iter()
        .filter(|r| r.kind == RowKind::Summary && r.algorithm == "online-sga")
        .map(|r| r.ratio_vs_oracle.unwrap())
        .fold(f64::INFINITY, f64::min);
    let online_ok = curve_rows == 20 * 2000 && final_ratio >= 0.25 && min_instance_ratio >= 0.25;

    report(&format!(
        "criterion 8: {} offline revenue FW >= max(0, 0.9·PGA): {}; online ratio curve {} rows, final mean {final_ratio:.4}, min {min_instance_ratio:.4}: {}",
        verdict(offline_ok && online_ok),
        verdict(offline_ok),
        curve_rows,
        verdict(online_ok)
    ));
    assert!(online_ok, "online ratio");
    assert!(offline_ok, "offline revenue: Frank-Wolfe below 0.9 × projected gradient");
}

#[test]
fn criterion_9_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut configs = Vec::new();

    let mut c = ExperimentConfig::new(ExperimentKind::OfflineQuadratic);
    c.generator.n = 4;
    c.generator.m = 3;
    c.repeats = 4;
    c.algorithm.horizon = 30;
    configs.push(c);

    let mut c = ExperimentConfig::new(ExperimentKind::OnlineRevenue);
    c.generator.family = Family::RevenueSynthetic;
    c.generator.n = 60;
    c.generator.edge_prob = 0.2;
    c.repeats = 3;
    c.algorithm.horizon = 50;
    configs.push(c);

    let mut c = ExperimentConfig::new(ExperimentKind::OfflineSoftmax);
    c.generator.family = Family::SoftmaxExponential;
    c.generator.n = 5;
    c.generator.m = 2;
    c.repeats = 3;
    c.algorithm.horizon = 30;
    configs.push(c);

    let mut c = ExperimentConfig::new(ExperimentKind::Verify);
    c.verify.trials = 50;
    c.verify.gradient_points = 10;
    c.verify.fw_runs = 1;
    c.verify.lp_instances = 10;
    configs.push(c);

    let mut c = ExperimentConfig::new(ExperimentKind::ProjectBench);
    c.bench.trials = 100;
    configs.push(c);

    let mut ok = true;
    for (k, mut cfg) in configs.into_iter().enumerate() {
        cfg.master_seed = 3;
        cfg.output = Some(dir.path().join(format!("{k}.out")));
        let body = |cfg: &ExperimentConfig| {
            drsub::harness::execute(cfg).unwrap();
            csv_body(&std::fs::read_to_string(cfg.output_path()).unwrap())
        };
        let first = body(&cfg);
        let second = body(&cfg);
        cfg.master_seed = 4;
        let other = body(&cfg);
        let same = first == second && !first.is_empty();
        let differs = other != first;
        report(&format!(
            "  {}: identical rerun {same}, new seed changes body {differs}",
            cfg.experiment.id()
        ));
        ok &= same && differs;
    }
    report(&format!("criterion 9: {} determinism", verdict(ok)));
    assert!(ok);
}
