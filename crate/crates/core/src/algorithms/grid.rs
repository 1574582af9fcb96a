//! Brute-force optimum over a membership-filtered lattice.
//!
//! The lattice is `{0, s, 2s, …}^n ∩ P`. Enumeration is depth-first over
//! coordinates, cutting a prefix when
//!
//! * some row is already violated by more than the free coordinates can
//!   give back, or
//! * an upper bound on `F` over the prefix's subtree cannot beat the
//!   incumbent. DR-submodular `F` is concave along nonnegative directions,
//!   so tangent planes at the prefix and at the subtree's upper corner
//!   dominate `F` there; their maximum under the constraints is bounded by
//!   a fractional knapsack per row.
//!
//! The last coordinate is searched by bisection on the slope, again by
//! coordinate-wise concavity. Both shortcuts need the DR property and are
//! switched off with `prune = false`.
//!
//! With `s` the spacing, `β` the smoothness and `G` the gradient bound the
//! result is within `β n s²/2 + G s √n` of the true maximum.

use super::pga::{projected_gradient_ascent, StepSchedule};
use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::point::Point;
use crate::polytope::Polytope;

#[derive(Debug, Clone)]
pub struct GridOptions {
    pub spacing: f64,
    /// Maximum number of objective evaluations.
    pub budget: u64,
    /// Use the DR upper bound to skip subtrees.
    pub prune: bool,
    /// Projected-gradient steps from the best lattice point.
    pub polish_steps: usize,
    /// Subtrees that cannot beat the incumbent by more than
    /// `tolerance · max(1, |best|)` are skipped.
    pub tolerance: f64,
}

impl GridOptions {
    pub fn with_spacing(spacing: f64) -> Self {
        GridOptions {
            spacing,
            ..GridOptions::default()
        }
    }
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            spacing: 0.02,
            budget: 10_000_000,
            prune: true,
            polish_steps: 200,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridResult {
    pub x_best: Point,
    pub value: f64,
    /// Best value on the lattice itself, before polishing.
    pub lattice_value: f64,
    pub evaluations: u64,
}

struct Search<'a, F: ?Sized> {
    f: &'a F,
    poly: &'a Polytope,
    spacing: f64,
    steps: Vec<usize>,
    /// per row, `Σ_{j ≥ k} min(0, A_ij · x_j^max)` for every depth `k`
    slack_tail: Vec<Vec<f64>>,
    prune: bool,
    tolerance: f64,
    budget: u64,
    evaluations: u64,
    best_value: f64,
    best: Vec<f64>,
}

impl<F: Objective + ?Sized> Search<'_, F> {
    fn charge(&mut self) -> Result<()> {
        self.evaluations += 1;
        if self.evaluations > self.budget {
            return Err(Error::GridBudget {
                evaluations: self.evaluations,
                budget: self.budget,
            });
        }
        Ok(())
    }

    fn coordinate_max(&self, j: usize) -> f64 {
        self.steps[j] as f64 * self.spacing
    }

    /// Largest value each free coordinate can take given the fixed prefix.
    fn caps(&self, depth: usize, row_sums: &[f64]) -> Vec<f64> {
        let n = self.steps.len();
        let a = self.poly.a();
        let b = self.poly.b();
        let mut caps: Vec<f64> = (depth..n).map(|j| self.coordinate_max(j)).collect();
        for (i, &rs) in row_sums.iter().enumerate() {
            let room = b[i] - rs - self.slack_tail[i][depth];
            for (c, j) in caps.iter_mut().zip(depth..n) {
                if a[(i, j)] > 0.0 {
                    *c = c.min((room / a[(i, j)]).max(0.0));
                }
            }
        }
        caps
    }

    /// Upper bound on `Σ_{j ≥ depth} c_j d_j` over `0 ≤ d ≤ caps` with the
    /// rows' remaining room: the tightest single-row fractional knapsack.
    fn linear_bound(&self, depth: usize, coef: &[f64], caps: &[f64], row_sums: &[f64]) -> f64 {
        let a = self.poly.a();
        let b = self.poly.b();
        let mut best: f64 = coef.iter().zip(caps).map(|(g, c)| g.max(0.0) * c).sum();
        let mut items: Vec<(f64, f64, f64)> = Vec::with_capacity(coef.len());
        for (i, &rs) in row_sums.iter().enumerate() {
            let mut room = b[i] - rs;
            let mut gain = 0.0;
            items.clear();
            for (k, (&g, &c)) in coef.iter().zip(caps).enumerate() {
                let aij = a[(i, depth + k)];
                if aij <= 0.0 {
                    room -= aij * c;
                    gain += g.max(0.0) * c;
                } else if g > 0.0 {
                    items.push((g / aij, aij, c));
                }
            }
            items.sort_by(|p, q| q.0.total_cmp(&p.0));
            for &(ratio, aij, c) in &items {
                if room <= 0.0 {
                    break;
                }
                let take = c.min(room / aij);
                gain += ratio * aij * take;
                room -= aij * take;
            }
            best = best.min(gain);
            if best <= 0.0 {
                break;
            }
        }
        best
    }

    /// Bound on `max F` over the subtree below the prefix `l`.
    ///
    /// `F` is concave along nonnegative directions, so the tangent planes at
    /// `l` and at the subtree's upper corner `w` both dominate `F` on
    /// `[l, w]`; any convex combination does too.
    fn subtree_bound(&mut self, depth: usize, x: &mut [f64], row_sums: &[f64]) -> Result<f64> {
        self.charge()?;
        let n = x.len();
        let here = Point::from_vec_unchecked(x.to_vec());
        let f_low = self.f.value(&here)?;
        let g_low = self.f.gradient(&here)?;
        let caps = self.caps(depth, row_sums);
        let low_coef = &g_low.as_slice()[depth..];
        let low = f_low + self.linear_bound(depth, low_coef, &caps, row_sums);
        let target = self.best_value + self.tolerance * self.best_value.abs().max(1.0);
        if low <= target || depth == n {
            return Ok(low);
        }
        self.charge()?;
        x[depth..].copy_from_slice(&caps);
        let corner = Point::from_vec_unchecked(x.to_vec());
        x[depth..].iter_mut().for_each(|v| *v = 0.0);
        let f_high = self.f.value(&corner)?;
        let g_high = self.f.gradient(&corner)?;
        let high_coef = &g_high.as_slice()[depth..];
        // tangent at w written in d = x − l: F(w) − g_w·caps + g_w·d
        let high_const = f_high - high_coef.iter().zip(&caps).map(|(g, c)| g * c).sum::<f64>();
        let mut best = low;
        let mut coef = vec![0.0; n - depth];
        for step in 0..=10 {
            let theta = step as f64 / 10.0;
            for (k, c) in coef.iter_mut().enumerate() {
                *c = theta * low_coef[k] + (1.0 - theta) * high_coef[k];
            }
            let bound = theta * f_low
                + (1.0 - theta) * high_const
                + self.linear_bound(depth, &coef, &caps, row_sums);
            best = best.min(bound);
        }
        Ok(best)
    }

    fn leaf(&mut self, x: &mut [f64], k: usize) -> Result<f64> {
        self.charge()?;
        let last = x.len() - 1;
        x[last] = k as f64 * self.spacing;
        let v = self.f.value(&Point::from_vec_unchecked(x.to_vec()))?;
        if v > self.best_value {
            self.best_value = v;
            self.best.copy_from_slice(x);
        }
        Ok(v)
    }

    /// `F` is concave along each coordinate, so the best lattice value of
    /// the last coordinate is found by bisecting on the sign of the slope
    /// over its feasible interval.
    fn last_coordinate(&mut self, x: &mut [f64], row_sums: &[f64]) -> Result<()> {
        let j = x.len() - 1;
        let s = self.spacing;
        let (mut lo, mut hi) = (0usize, self.steps[j]);
        for (i, &rs) in row_sums.iter().enumerate() {
            let aij = self.poly.a()[(i, j)];
            let room = self.poly.b()[i] - rs;
            if aij > 0.0 {
                let k = ((room / aij) / s + 1e-9).floor();
                if k < 0.0 {
                    return Ok(());
                }
                hi = hi.min(k as usize);
            } else if aij < 0.0 {
                let k = ((room / aij) / s - 1e-9).ceil().max(0.0);
                lo = lo.max(k as usize);
            } else if room < -1e-12 {
                return Ok(());
            }
        }
        if lo > hi {
            return Ok(());
        }
        // smallest k in [lo, hi) with F(k+1) < F(k), else hi
        let (mut a, mut b) = (lo, hi);
        while a < b {
            let mid = a + (b - a) / 2;
            let here = self.leaf(x, mid)?;
            let next = self.leaf(x, mid + 1)?;
            if next < here {
                b = mid;
            } else {
                a = mid + 1;
            }
        }
        self.leaf(x, a)?;
        x[j] = 0.0;
        Ok(())
    }

    fn visit(&mut self, depth: usize, x: &mut Vec<f64>, row_sums: &mut Vec<f64>) -> Result<()> {
        let n = x.len();
        let m = row_sums.len();
        for i in 0..m {
            if row_sums[i] + self.slack_tail[i][depth] > self.poly.b()[i] + 1e-12 {
                return Ok(());
            }
        }
        if depth == n {
            self.charge()?;
            let v = self.f.value(&Point::from_vec_unchecked(x.clone()))?;
            if v > self.best_value {
                self.best_value = v;
                self.best.clone_from(x);
            }
            return Ok(());
        }
        if self.prune && self.best_value.is_finite() {
            let bound = self.subtree_bound(depth, x, row_sums)?;
            if bound <= self.best_value + self.tolerance * self.best_value.abs().max(1.0) {
                return Ok(());
            }
        }
        if self.prune && depth + 1 == n {
            return self.last_coordinate(x, row_sums);
        }
        // larger values first so good incumbents appear early
        for k in (0..=self.steps[depth]).rev() {
            let v = k as f64 * self.spacing;
            x[depth] = v;
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += self.poly.a()[(i, depth)] * v;
            }
            let r = self.visit(depth + 1, x, row_sums);
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= self.poly.a()[(i, depth)] * v;
            }
            r?;
        }
        x[depth] = 0.0;
        Ok(())
    }
}

/// Best objective value over the lattice of spacing `opts.spacing` inside
/// `polytope`, followed by a short projected-gradient polish.
pub fn grid_oracle<F: Objective + ?Sized>(
    f: &F,
    polytope: &Polytope,
    opts: &GridOptions,
) -> Result<GridResult> {
    if !(opts.spacing > 0.0) {
        return Err(Error::InvalidInput("grid spacing must be positive".into()));
    }
    if f.dim() != polytope.dim() {
        return Err(Error::DimensionMismatch {
            expected: polytope.dim(),
            found: f.dim(),
        });
    }
    let n = polytope.dim();
    let m = polytope.num_constraints();
    let steps: Vec<usize> = polytope
        .upper()
        .iter()
        .map(|u| (u / opts.spacing + 1e-9).floor() as usize)
        .collect();
    let mut slack_tail = vec![vec![0.0; n + 1]; m];
    for (i, tail) in slack_tail.iter_mut().enumerate() {
        for j in (0..n).rev() {
            let reach = polytope.a()[(i, j)] * steps[j] as f64 * opts.spacing;
            tail[j] = tail[j + 1] + reach.min(0.0);
        }
    }
    let mut search = Search {
        f,
        poly: polytope,
        spacing: opts.spacing,
        steps,
        slack_tail,
        prune: opts.prune,
        tolerance: opts.tolerance,
        budget: opts.budget,
        evaluations: 0,
        best_value: f64::NEG_INFINITY,
        best: vec![0.0; n],
    };
    // incumbent: the lattice point below the minimum-‖x‖∞ point, if feasible
    let start = polytope.min_inf_norm_point()?;
    let snapped = start.map(|v| (v / opts.spacing + 1e-9).floor() * opts.spacing);
    if polytope.contains(&snapped, 1e-12)? {
        search.charge()?;
        search.best_value = f.value(&snapped)?;
        search.best = snapped.into_vec();
    }
    let mut x = vec![0.0; n];
    let mut row_sums = vec![0.0; m];
    search.visit(0, &mut x, &mut row_sums)?;
    if !search.best_value.is_finite() {
        return Err(Error::InvalidInput(
            "no lattice point lies in the polytope; use a finer spacing".into(),
        ));
    }
    let lattice_value = search.best_value;
    let mut x_best = Point::new(search.best)?;
    let mut value = lattice_value;
    if opts.polish_steps > 0 {
        let g = f.gradient(&x_best)?.norm2().max(1e-12);
        let schedule = StepSchedule::Diminishing {
            diameter: opts.spacing,
            gradient_bound: g,
        };
        let polish = projected_gradient_ascent(f, polytope, opts.polish_steps, schedule, Some(&x_best))?;
        for (xi, vi) in polish.iterates.iter().zip(&polish.values) {
            if *vi > value {
                value = *vi;
                x_best = xi.clone();
            }
        }
    }
    Ok(GridResult {
        x_best,
        value,
        lattice_value,
        evaluations: search.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::QuadraticObjective;
    use nalgebra::DMatrix;

    #[test]
    fn linear_over_simplex_hits_vertex() {
        let f = QuadraticObjective::new(DMatrix::zeros(3, 3), vec![0.2, 0.9, 0.5], 0.0).unwrap();
        let poly = Polytope::capped_simplex(3, 1.0).unwrap();
        let r = grid_oracle(&f, &poly, &GridOptions::with_spacing(0.25)).unwrap();
        assert!((r.lattice_value - 0.9).abs() < 1e-12);
        assert!((r.value - 0.9).abs() < 1e-12);
    }

    #[test]
    fn stationary_point_of_concave_quadratic() {
        let f = QuadraticObjective::new(-DMatrix::identity(2, 2), vec![1.0, 1.0], 0.0).unwrap();
        let poly = Polytope::unit_box(2);
        let r = grid_oracle(&f, &poly, &GridOptions::with_spacing(1e-3)).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
        assert!(r.x_best.max_abs_diff(&Point::filled(2, 1.0)).unwrap() < 1e-6);
    }

    #[test]
    fn pruning_agrees_with_exhaustive_lattice() {
        let h = DMatrix::from_row_slice(3, 3, &[-1.0, -0.4, -0.1, -0.4, -0.7, -0.6, -0.1, -0.6, -0.9]);
        let f = QuadraticObjective::new(h, vec![0.7, 0.8, 0.6], 0.0).unwrap();
        let poly = Polytope::from_rows(&[&[0.5, 0.9, 0.4], &[1.0, 0.2, 0.7]], &[1.0, 1.0], &[1.0; 3])
            .unwrap();
        let mut opts = GridOptions::with_spacing(0.05);
        opts.polish_steps = 0;
        opts.tolerance = 0.0;
        let fast = grid_oracle(&f, &poly, &opts).unwrap();
        opts.prune = false;
        let slow = grid_oracle(&f, &poly, &opts).unwrap();
        assert_eq!(fast.lattice_value, slow.lattice_value);
        assert!(fast.evaluations < slow.evaluations);
    }

    #[test]
    fn refinement_never_decreases_value() {
        let h = DMatrix::from_row_slice(2, 2, &[-1.0, -0.8, -0.8, -1.2]);
        let f = QuadraticObjective::new(h, vec![0.73, 0.61], 0.0).unwrap();
        let poly = Polytope::from_rows(&[&[1.0, 0.6]], &[0.9], &[1.0, 1.0]).unwrap();
        let mut last = f64::NEG_INFINITY;
        for s in [0.1, 0.05, 0.025] {
            let r = grid_oracle(&f, &poly, &GridOptions::with_spacing(s)).unwrap();
            assert!(r.value >= last - 1e-15);
            assert!(r.lattice_value <= r.value);
            last = r.value;
        }
    }

    #[test]
    fn budget_is_enforced() {
        let f = QuadraticObjective::new(-DMatrix::identity(4, 4), vec![1.0; 4], 0.0).unwrap();
        let poly = Polytope::unit_box(4);
        let opts = GridOptions {
            spacing: 0.01,
            budget: 1000,
            prune: false,
            polish_steps: 0,
            tolerance: 0.0,
        };
        assert!(matches!(
            grid_oracle(&f, &poly, &opts),
            Err(Error::GridBudget { .. })
        ));
        assert!(grid_oracle(&f, &poly, &GridOptions::with_spacing(0.0)).is_err());
    }
}
