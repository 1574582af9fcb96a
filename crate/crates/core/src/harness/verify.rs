//! Property suites behind `drsub verify`.
//!
//! The lattice inequalities are checked on the unit cube with every
//! objective shifted so that it is nonnegative there; the two inequalities
//! that drop terms of the form `F(·) ≥ 0` need it. Four-term triples
//! draw `x, z ∈ [0, ½]^n` so that `x + z` stays in the cube.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, ObjectiveFamily, VerifyParams};
use crate::algorithms::{frank_wolfe, product_bound_violation, FrankWolfeOptions};
use crate::error::{Error, Result};
use crate::instances::{gen_quadratic, gen_softmax, Family, GeneratorSpec, WeightedGraph};
use crate::objectives::{dr_diagnostic, Objective, RevenueObjective, Shifted};
use crate::oracles::{lmo, lp_solve, project, Sense};
use crate::point::Point;
use crate::polytope::{tight_upper_bounds, Polytope};
use crate::seed::derive_seed;

/// Tolerance of the product bound on live Frank-Wolfe runs.
pub const PRODUCT_BOUND_TOL: f64 = 1e-9;
/// Agreement required between the simplex LP and vertex enumeration.
pub const LP_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    /// Largest violation seen; ≤ 0 means the inequality held with room.
    pub worst: f64,
    pub tolerance: f64,
    pub checks: usize,
    pub seed: u64,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &SuiteResult> {
        self.suites.iter().filter(|s| !s.passed)
    }

    /// One `PASS`/`FAIL` line per suite, witnesses indented below failures.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            let _ = writeln!(
                out,
                "{} {} worst={:.6e} tol={:e} checks={} seed={}",
                if s.passed { "PASS" } else { "FAIL" },
                s.name,
                s.worst,
                s.tolerance,
                s.checks,
                s.seed
            );
            if let (false, Some(w)) = (s.passed, &s.witness) {
                let _ = writeln!(out, "  witness {w}");
            }
        }
        out
    }
}

/// Tracks the worst violation of one suite.
struct Tally {
    name: String,
    seed: u64,
    tolerance: f64,
    worst: f64,
    checks: usize,
    witness: Option<String>,
}

impl Tally {
    fn new(name: impl Into<String>, seed: u64, tolerance: f64) -> Self {
        Tally {
            name: name.into(),
            seed,
            tolerance,
            worst: f64::NEG_INFINITY,
            checks: 0,
            witness: None,
        }
    }

    fn record(&mut self, violation: f64, witness: impl FnOnce() -> String) {
        self.checks += 1;
        // NaN counts as a violation
        let v = if violation.is_nan() { f64::INFINITY } else { violation };
        if v > self.worst {
            self.worst = v;
            if v > self.tolerance {
                self.witness = Some(witness());
            }
        }
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            passed: self.checks > 0 && self.worst <= self.tolerance,
            name: self.name,
            worst: self.worst,
            tolerance: self.tolerance,
            checks: self.checks,
            seed: self.seed,
            witness: self.witness,
        }
    }
}

/// Objective of `family`, shifted to be nonnegative on `[0,1]^n`.
pub fn test_objective(family: ObjectiveFamily, n: usize, seed: u64) -> Result<Box<dyn Objective>> {
    let ones = vec![1.0; n];
    Ok(match family {
        ObjectiveFamily::Quadratic => {
            let (f, _, _) = gen_quadratic(&GeneratorSpec::new(Family::QuadraticUniform, n, n, seed))?;
            let shift = (-f.box_lower_bound(&ones)).max(0.0);
            Box::new(Shifted { inner: f, shift })
        }
        ObjectiveFamily::Softmax => {
            let (f, _) = gen_softmax(&GeneratorSpec::new(Family::SoftmaxUniform, n, n, seed))?;
            let shift = (-f.unit_cube_minimum()?).max(0.0);
            Box::new(Shifted { inner: f, shift })
        }
        ObjectiveFamily::Revenue => {
            // dense graph and large p so the inequalities are not vacuous
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = WeightedGraph::random(n, 0.5, &mut rng)?;
            Box::new(RevenueObjective::new(n, g.edges, 0.5)?)
        }
    })
}

fn uniform_point<R: Rng>(rng: &mut R, n: usize, hi: f64) -> Point {
    Point::new((0..n).map(|_| rng.gen_range(0.0..=hi)).collect()).expect("finite")
}

fn suite_rng(master: u64, name: &str) -> (u64, ChaCha8Rng) {
    let seed = derive_seed(master, &format!("verify/{name}"), 0);
    (seed, ChaCha8Rng::seed_from_u64(seed))
}

/// `F(x∨y) + F(x∧y) − 2F(x) ≤ ⟨∇F(x), y − x⟩`
pub fn first_order_violation<F: Objective + ?Sized>(f: &F, x: &Point, y: &Point) -> Result<f64> {
    let lhs = f.value(&x.join(y)?)? + f.value(&x.meet(y)?)? - 2.0 * f.value(x)?;
    let rhs = f.gradient(x)?.dot(&y.sub(x)?)?;
    Ok(lhs - rhs)
}

/// `F(x∨y) + F(x∧y) + F(z*∨z) + F(z*∧z) ≥ F(y)` with `z* = x∨y − x`.
pub fn four_term_violation<F: Objective + ?Sized>(f: &F, x: &Point, y: &Point, z: &Point) -> Result<f64> {
    let xy = x.join(y)?;
    let zs = xy.sub(x)?;
    let lhs = f.value(&xy)? + f.value(&x.meet(y)?)? + f.value(&zs.join(z)?)? + f.value(&zs.meet(z)?)?;
    Ok(f.value(y)? - lhs)
}

/// `F(x∨y) ≥ (1 − ‖x‖∞) F(y)`
pub fn join_bound_violation<F: Objective + ?Sized>(f: &F, x: &Point, y: &Point) -> Result<f64> {
    Ok((1.0 - x.norm_inf()) * f.value(y)? - f.value(&x.join(y)?)?)
}

/// `‖(x∨y − z*) − ((x+z)∨y − z∨z*)‖∞`; both sides equal `x`.
pub fn identity_residual(x: &Point, y: &Point, z: &Point) -> Result<f64> {
    let xy = x.join(y)?;
    let zs = xy.sub(x)?;
    let left = xy.sub(&zs)?;
    let right = x.add(z)?.join(y)?.sub(&z.join(&zs)?)?;
    left.max_abs_diff(&right)
}

/// `max_i |fd_i − g_i| / max(‖g‖∞, 1e-8)` with central differences of step `h`.
pub fn gradient_relative_error<F: Objective + ?Sized>(f: &F, x: &Point, h: f64) -> Result<f64> {
    let g = f.gradient(x)?;
    let mut worst = 0.0f64;
    for i in 0..x.dim() {
        let mut plus = x.clone().into_vec();
        let mut minus = plus.clone();
        plus[i] += h;
        minus[i] -= h;
        let fd = (f.value(&Point::new(plus)?)? - f.value(&Point::new(minus)?)?) / (2.0 * h);
        worst = worst.max((fd - g[i]).abs());
    }
    Ok(worst / g.norm_inf().max(1e-8))
}

/// Random polytope for the geometric suites: either nonnegative rows with
/// `b = 1` and tightened box, or mixed-sign rows around a random interior
/// point with the unit box.
pub fn random_polytope<R: Rng>(rng: &mut R, n: usize, m: usize, mixed: bool) -> Result<Polytope> {
    if mixed {
        let a = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..=1.0));
        let x0: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let b = (0..m)
            .map(|i| (0..n).map(|j| a[(i, j)] * x0[j]).sum::<f64>() + rng.gen_range(0.0..0.5))
            .collect();
        Polytope::new(a, b, vec![1.0; n])
    } else {
        let a = DMatrix::from_fn(m, n, |_, _| rng.gen::<f64>());
        let b = vec![1.0; m];
        let u = tight_upper_bounds(&a, &b)?;
        Polytope::new(a, b, u)
    }
}

/// A random feasible point: a random convex combination of the anchor and
/// a few LMO vertices.
pub fn random_feasible_point<R: Rng>(rng: &mut R, polytope: &Polytope) -> Result<Point> {
    let n = polytope.dim();
    let mut pts = vec![polytope.min_inf_norm_point()?];
    for _ in 0..3 {
        let c = Point::new((0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect())?;
        pts.push(lmo(polytope, &c)?);
    }
    let w: Vec<f64> = pts.iter().map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = w.iter().sum();
    let mut z = Point::zeros(n);
    for (p, wi) in pts.iter().zip(&w) {
        z = z.axpy(wi / total, p)?;
    }
    Ok(z)
}

fn for_each_subset(k: usize, size: usize, mut visit: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..size).collect();
    if size > k {
        return;
    }
    loop {
        visit(&idx);
        let Some(pos) = (0..size).rev().find(|&i| idx[i] != i + k - size) else {
            return;
        };
        idx[pos] += 1;
        for j in pos + 1..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// `max cᵀx` over `{Ax ≤ b, 0 ≤ x ≤ u}` by enumerating every basic point:
/// each choice of `n` tight constraints with a nonsingular system. `None`
/// when no basic point is feasible.
pub fn lp_by_enumeration(a: &DMatrix<f64>, b: &[f64], upper: &[f64], c: &[f64]) -> Option<f64> {
    let (m, n) = a.shape();
    // constraint k: row_k · x ≤ rhs_k
    let mut rows: Vec<(Vec<f64>, f64)> = (0..m).map(|i| (a.row(i).iter().copied().collect(), b[i])).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = -1.0;
        rows.push((e.clone(), 0.0));
        e[j] = 1.0;
        rows.push((e, upper[j]));
    }
    let mut best: Option<f64> = None;
    for_each_subset(rows.len(), n, |subset| {
        let mat = DMatrix::from_fn(n, n, |r, col| rows[subset[r]].0[col]);
        let rhs = DVector::from_iterator(n, subset.iter().map(|&k| rows[k].1));
        let lu = mat.lu();
        let Some(x) = lu.solve(&rhs) else { return };
        if x.iter().any(|v| !v.is_finite()) {
            return;
        }
        let feasible = rows.iter().all(|(row, rhs)| {
            let lhs: f64 = row.iter().zip(x.iter()).map(|(p, q)| p * q).sum();
            lhs <= rhs + 1e-9 * (1.0 + rhs.abs())
        });
        if feasible {
            let value: f64 = c.iter().zip(x.iter()).map(|(p, q)| p * q).sum();
            best = Some(best.map_or(value, |v: f64| v.max(value)));
        }
    });
    best
}

/// Runs every suite; failures are reported, not returned as errors.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<VerifyReport> {
    let v = &cfg.verify;
    check_params(v)?;
    let master = cfg.master_seed;
    let n = v.n;
    let mut report = VerifyReport::default();

    for &family in &v.families {
        let fam = family.name();
        let f = test_objective(family, n, derive_seed(master, &format!("verify/objective/{fam}"), 0))?;

        let (seed, mut rng) = suite_rng(master, &format!("first-order/{fam}"));
        let mut t = Tally::new(format!("first-order/{fam}"), seed, v.tolerance);
        for _ in 0..v.trials {
            let (x, y) = (uniform_point(&mut rng, n, 1.0), uniform_point(&mut rng, n, 1.0));
            t.record(first_order_violation(&f, &x, &y)?, || format!("x={x:?} y={y:?}"));
        }
        report.suites.push(t.finish());

        let (seed, mut rng) = suite_rng(master, &format!("four-term/{fam}"));
        let mut t = Tally::new(format!("four-term/{fam}"), seed, v.tolerance);
        for _ in 0..v.trials {
            let x = uniform_point(&mut rng, n, 0.5);
            let y = uniform_point(&mut rng, n, 1.0);
            let z = uniform_point(&mut rng, n, 0.5);
            t.record(four_term_violation(&f, &x, &y, &z)?, || format!("x={x:?} y={y:?} z={z:?}"));
        }
        report.suites.push(t.finish());

        let (seed, mut rng) = suite_rng(master, &format!("join-bound/{fam}"));
        let mut t = Tally::new(format!("join-bound/{fam}"), seed, v.tolerance);
        for _ in 0..v.trials {
            let (x, y) = (uniform_point(&mut rng, n, 1.0), uniform_point(&mut rng, n, 1.0));
            t.record(join_bound_violation(&f, &x, &y)?, || format!("x={x:?} y={y:?}"));
        }
        report.suites.push(t.finish());

        let (seed, mut rng) = suite_rng(master, &format!("gradient/{fam}"));
        let mut t = Tally::new(format!("gradient/{fam}"), seed, v.gradient_tolerance);
        for _ in 0..v.gradient_points {
            let x = Point::new((0..n).map(|_| rng.gen_range(0.05..0.95)).collect())?;
            t.record(gradient_relative_error(&f, &x, 1e-5)?, || format!("x={x:?}"));
        }
        report.suites.push(t.finish());

        let (seed, mut rng) = suite_rng(master, &format!("dr/{fam}"));
        let dr = dr_diagnostic(&f, &vec![1.0; n], v.trials, &mut rng)?;
        report.suites.push(dr_suite(format!("dr/{fam}"), seed, v.tolerance, dr));
    }

    if v.inject_violation {
        let (seed, mut rng) = suite_rng(master, "dr/injected");
        let dim = n.max(2);
        let mut hessian = DMatrix::from_diagonal_element(dim, dim, -1.0);
        hessian[(0, 1)] = 0.5;
        hessian[(1, 0)] = 0.5;
        let f = Planted { hessian };
        let dr = dr_diagnostic(&f, &vec![1.0; dim], v.trials, &mut rng)?;
        report.suites.push(dr_suite("dr/injected".into(), seed, v.tolerance, dr));
    }

    let (seed, mut rng) = suite_rng(master, "identity");
    let mut t = Tally::new("identity", seed, v.identity_tolerance);
    for _ in 0..v.trials {
        let x = uniform_point(&mut rng, n, 0.5);
        let y = uniform_point(&mut rng, n, 1.0);
        let z = uniform_point(&mut rng, n, 0.5);
        t.record(identity_residual(&x, &y, &z)?, || format!("x={x:?} y={y:?} z={z:?}"));
    }
    report.suites.push(t.finish());

    report.suites.push(product_bound_suite(master, v)?);
    report.suites.push(pythagorean_suite(master, v)?);
    report.suites.push(lp_suite(master, v)?);
    Ok(report)
}

/// `½ xᵀHx` with a positive off-diagonal entry: not DR-submodular.
struct Planted {
    hessian: DMatrix<f64>,
}

impl Objective for Planted {
    fn dim(&self) -> usize {
        self.hessian.nrows()
    }
    fn value(&self, x: &Point) -> Result<f64> {
        let v = DVector::from_column_slice(x.as_slice());
        Ok(0.5 * v.dot(&(&self.hessian * &v)))
    }
    fn gradient(&self, x: &Point) -> Result<Point> {
        let v = DVector::from_column_slice(x.as_slice());
        Point::new((&self.hessian * v).iter().copied().collect())
    }
    fn family(&self) -> &'static str {
        "planted"
    }
}

fn check_params(v: &VerifyParams) -> Result<()> {
    if v.trials == 0 || v.gradient_points == 0 || v.fw_runs == 0 || v.lp_instances == 0 {
        return Err(Error::Config("verify needs at least one trial in every suite".into()));
    }
    if v.n == 0 {
        return Err(Error::Config("verify.n must be >= 1".into()));
    }
    if v.families.is_empty() {
        return Err(Error::Config("verify.families is empty".into()));
    }
    Ok(())
}

fn dr_suite(name: String, seed: u64, tolerance: f64, dr: crate::objectives::DrReport) -> SuiteResult {
    let passed = dr.max_violation <= tolerance;
    SuiteResult {
        name,
        passed,
        worst: dr.max_violation,
        tolerance,
        checks: dr.trials,
        seed,
        witness: dr.witness.filter(|_| !passed).map(|(x, y)| format!("x={x:?} y={y:?} (y <= x)")),
    }
}

fn product_bound_suite(master: u64, v: &VerifyParams) -> Result<SuiteResult> {
    let seed = derive_seed(master, "verify/product-bound", 0);
    let mut t = Tally::new("product-bound", seed, PRODUCT_BOUND_TOL);
    for run in 0..v.fw_runs {
        let spec = GeneratorSpec::new(
            Family::QuadraticUniform,
            v.n,
            v.n,
            derive_seed(master, "verify/product-bound", run as u64 + 1),
        );
        let (f, poly, _) = gen_quadratic(&spec)?;
        let traj = frank_wolfe(&f, &poly, v.fw_horizon.max(2), &FrankWolfeOptions::default())?;
        let worst = product_bound_violation(&traj, poly.upper());
        // record each t separately would be noisier; one check per run
        t.record(worst, || format!("run={run} instance_seed={}", spec.seed));
    }
    Ok(t.finish())
}

fn pythagorean_suite(master: u64, v: &VerifyParams) -> Result<SuiteResult> {
    let (seed, mut rng) = suite_rng(master, "pythagorean");
    let mut t = Tally::new("pythagorean", seed, v.tolerance);
    let n = v.n;
    let per_polytope = 20;
    let mut done = 0;
    while done < v.trials {
        let m = rng.gen_range(1..=n.max(1));
        let mixed = rng.gen_bool(0.5);
        let poly = random_polytope(&mut rng, n, m, mixed)?;
        for _ in 0..per_polytope.min(v.trials - done) {
            let x = Point::new((0..n).map(|_| rng.gen_range(-1.0..2.0)).collect())?;
            let z = random_feasible_point(&mut rng, &poly)?;
            let px = project(&poly, &x)?;
            let violation = px.distance(&z)? - x.distance(&z)?;
            t.record(violation.max(poly.violation(&px) - 1e-9), || {
                format!("x={x:?} z={z:?} polytope:\n{}", poly.to_text())
            });
            done += 1;
        }
    }
    Ok(t.finish())
}

fn lp_suite(master: u64, v: &VerifyParams) -> Result<SuiteResult> {
    let (seed, mut rng) = suite_rng(master, "lp");
    let mut t = Tally::new("lp-enumeration", seed, LP_TOL);
    for _ in 0..v.lp_instances {
        let n = rng.gen_range(1..=6);
        let m = rng.gen_range(1..=6);
        let mixed = rng.gen_bool(0.5);
        let poly = random_polytope(&mut rng, n, m, mixed)?;
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let lower = vec![0.0; n];
        let sol = lp_solve(poly.a(), poly.b(), &lower, poly.upper(), &c, Sense::Maximize)?;
        let gap = match (sol.is_optimal(), lp_by_enumeration(poly.a(), poly.b(), poly.upper(), &c)) {
            (true, Some(best)) => (sol.objective - best).abs() / (1.0 + best.abs()),
            _ => f64::INFINITY,
        };
        t.record(gap, || format!("c={c:?} polytope:\n{}", poly.to_text()));
    }
    Ok(t.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ExperimentKind;

    fn small() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Verify);
        cfg.verify.trials = 60;
        cfg.verify.gradient_points = 10;
        cfg.verify.fw_runs = 2;
        cfg.verify.fw_horizon = 30;
        cfg.verify.lp_instances = 20;
        cfg
    }

    #[test]
    fn default_suites_pass() {
        let report = run_verify(&small()).unwrap();
        assert!(report.passed(), "{}", report.to_text());
        // 5 per family + identity, product bound, pythagorean, lp
        assert_eq!(report.suites.len(), 5 * 3 + 4);
        assert!(report.to_text().lines().all(|l| l.starts_with("PASS ")));
    }

    #[test]
    fn planted_violation_is_caught() {
        let mut cfg = small();
        cfg.verify.inject_violation = true;
        let report = run_verify(&cfg).unwrap();
        let failed: Vec<_> = report.failures().map(|s| s.name.as_str()).collect();
        assert_eq!(failed, ["dr/injected"]);
        let text = report.to_text();
        assert!(text.contains("FAIL dr/injected"));
        assert!(text.contains("witness x="));
    }

    #[test]
    fn zero_trials_is_an_error() {
        let mut cfg = small();
        cfg.verify.trials = 0;
        assert!(matches!(run_verify(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn enumeration_on_square() {
        // max x + y over the unit square cut by x + y ≤ 1.5
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        assert_eq!(lp_by_enumeration(&a, &[1.5], &[1.0, 1.0], &[1.0, 1.0]), Some(1.5));
        assert_eq!(lp_by_enumeration(&a, &[1.5], &[1.0, 1.0], &[1.0, -1.0]), Some(1.0));
        // empty
        let a = DMatrix::from_row_slice(1, 1, &[-1.0]);
        assert_eq!(lp_by_enumeration(&a, &[-2.0], &[1.0], &[1.0]), None);
    }

    #[test]
    fn subsets_are_complete() {
        let mut count = 0;
        for_each_subset(6, 3, |_| count += 1);
        assert_eq!(count, 20);
        let mut empty = 0;
        for_each_subset(2, 3, |_| empty += 1);
        assert_eq!(empty, 0);
    }
}
