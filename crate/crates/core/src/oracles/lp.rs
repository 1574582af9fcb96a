//! Dense two-phase simplex for bounded-variable LPs.
//!
//! Solves `max/min cᵀx  s.t.  A x ≤ b,  lower ≤ x ≤ upper` with finite bounds.
//! The shift `y = x - lower` turns the box into `0 ≤ y ≤ upper - lower`; the
//! upper bounds become ordinary `≤` rows of the tableau. Pivoting follows
//! Bland's rule (lowest-index entering column, lowest-index leaving basic
//! variable on ratio ties), so the returned vertex is a deterministic function
//! of the inputs.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::point::Point;

const PIVOT_EPS: f64 = 1e-10;
const FEAS_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    /// Optimal vertex; `None` unless `status` is `Optimal`.
    pub x: Option<Point>,
    pub objective: f64,
    pub status: LpStatus,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// The optimal point, or the matching error for infeasible/unbounded LPs.
    pub fn into_point(self) -> Result<Point> {
        match self.status {
            LpStatus::Optimal => Ok(self.x.expect("optimal solution carries a point")),
            LpStatus::Infeasible => Err(Error::Infeasible),
            LpStatus::Unbounded => Err(Error::Unbounded),
        }
    }
}

struct Tableau {
    rows: usize,
    /// columns excluding the right-hand side
    cols: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let width = self.cols + 1;
        let inv = 1.0 / self.at(pr, pc);
        for v in &mut self.data[pr * width..(pr + 1) * width] {
            *v *= inv;
        }
        let pivot_row: Vec<f64> = self.data[pr * width..(pr + 1) * width].to_vec();
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let factor = self.at(r, pc);
            if factor == 0.0 {
                continue;
            }
            let row = &mut self.data[r * width..(r + 1) * width];
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
            row[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Maximizes `cost · vars` over the current basis, only letting columns
    /// with `allowed[c]` enter.
    fn optimize(
        &mut self,
        cost: &[f64],
        allowed: &[bool],
        max_iter: usize,
        phase: u8,
    ) -> Result<Outcome> {
        for _ in 0..max_iter {
            let entering = (0..self.cols).find(|&c| {
                if !allowed[c] || self.basis.contains(&c) {
                    return false;
                }
                let reduced = cost[c]
                    - (0..self.rows)
                        .map(|r| cost[self.basis[r]] * self.at(r, c))
                        .sum::<f64>();
                reduced > PIVOT_EPS
            });
            let Some(pc) = entering else {
                return Ok(Outcome::Optimal);
            };
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a <= PIVOT_EPS {
                    continue;
                }
                let ratio = self.rhs(r).max(0.0) / a;
                leaving = match leaving {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        let tie = (ratio - lratio).abs() <= 1e-12 * (1.0 + lratio.abs());
                        if ratio < lratio && !tie || tie && self.basis[r] < self.basis[lr] {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
            let Some((pr, _)) = leaving else {
                return Ok(Outcome::Unbounded);
            };
            self.pivot(pr, pc);
        }
        Err(Error::LpIterationLimit {
            iterations: max_iter,
            rows: self.rows,
            cols: self.cols,
            phase,
        })
    }
}

/// Solves the bounded-variable LP `sense cᵀx s.t. A x ≤ b, lower ≤ x ≤ upper`.
pub fn lp_solve(
    a: &DMatrix<f64>,
    b: &[f64],
    lower: &[f64],
    upper: &[f64],
    c: &[f64],
    sense: Sense,
) -> Result<LpSolution> {
    let (m, n) = a.shape();
    for (len, what) in [(b.len(), m), (lower.len(), n), (upper.len(), n), (c.len(), n)] {
        if len != what {
            return Err(Error::DimensionMismatch {
                expected: what,
                found: len,
            });
        }
    }
    if lower
        .iter()
        .chain(upper)
        .chain(b)
        .chain(c)
        .any(|v| !v.is_finite())
        || a.iter().any(|v| !v.is_finite())
    {
        return Err(Error::InvalidInput(
            "LP data and bounds must be finite".into(),
        ));
    }
    if lower.iter().zip(upper).any(|(l, u)| l > u) {
        return Ok(LpSolution {
            x: None,
            objective: f64::NAN,
            status: LpStatus::Infeasible,
        });
    }

    // rows: m general constraints then n box rows; columns: y, slacks, artificials
    let rows = m + n;
    let mut rhs = vec![0.0; rows];
    for i in 0..m {
        let shift: f64 = (0..n).map(|j| a[(i, j)] * lower[j]).sum();
        rhs[i] = b[i] - shift;
    }
    for j in 0..n {
        rhs[m + j] = upper[j] - lower[j];
    }
    let negative: Vec<usize> = (0..rows).filter(|&r| rhs[r] < 0.0).collect();
    let n_art = negative.len();
    let cols = n + rows + n_art;
    let width = cols + 1;
    let mut data = vec![0.0; rows * width];
    let mut basis = vec![0; rows];
    let mut art_idx = 0;
    for r in 0..rows {
        let row = &mut data[r * width..(r + 1) * width];
        if r < m {
            for j in 0..n {
                row[j] = a[(r, j)];
            }
        } else {
            row[r - m] = 1.0;
        }
        row[n + r] = 1.0;
        row[cols] = rhs[r];
        if rhs[r] < 0.0 {
            for v in row.iter_mut() {
                *v = -*v;
            }
            let ac = n + rows + art_idx;
            row[ac] = 1.0;
            basis[r] = ac;
            art_idx += 1;
        } else {
            basis[r] = n + r;
        }
    }
    let mut tab = Tableau {
        rows,
        cols,
        data,
        basis,
    };
    let max_iter = 50 * (rows + cols) + 1000;

    if n_art > 0 {
        let mut cost = vec![0.0; cols];
        for v in &mut cost[n + rows..] {
            *v = -1.0;
        }
        let allowed = vec![true; cols];
        tab.optimize(&cost, &allowed, max_iter, 1)?;
        let infeasibility: f64 = (0..rows)
            .filter(|&r| tab.basis[r] >= n + rows)
            .map(|r| tab.rhs(r))
            .sum();
        if infeasibility > FEAS_EPS {
            return Ok(LpSolution {
                x: None,
                objective: f64::NAN,
                status: LpStatus::Infeasible,
            });
        }
        // drive zero-level artificials out of the basis where possible
        for r in 0..rows {
            if tab.basis[r] >= n + rows {
                if let Some(pc) = (0..n + rows).find(|&c| tab.at(r, c).abs() > 1e-9) {
                    tab.pivot(r, pc);
                }
            }
        }
    }

    let mut cost = vec![0.0; cols];
    let sign = match sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    for j in 0..n {
        cost[j] = sign * c[j];
    }
    let allowed: Vec<bool> = (0..cols).map(|col| col < n + rows).collect();
    match tab.optimize(&cost, &allowed, max_iter, 2)? {
        Outcome::Optimal => {}
        Outcome::Unbounded => {
            return Ok(LpSolution {
                x: None,
                objective: f64::INFINITY * sign,
                status: LpStatus::Unbounded,
            })
        }
    }

    let mut y = vec![0.0; n];
    for r in 0..rows {
        if tab.basis[r] < n {
            y[tab.basis[r]] = tab.rhs(r);
        }
    }
    let x: Vec<f64> = (0..n)
        .map(|j| (lower[j] + y[j]).clamp(lower[j], upper[j]))
        .collect();
    let objective = x.iter().zip(c).map(|(xi, ci)| xi * ci).sum();
    Ok(LpSolution {
        x: Some(Point::from_vec_unchecked(x)),
        objective,
        status: LpStatus::Optimal,
    })
}
