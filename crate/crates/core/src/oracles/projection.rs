//! Euclidean projections: onto the capped simplex `{y ≥ 0, Σy ≤ r}` by
//! sorting or by iterated mean-shifting, and onto a general polytope either
//! exactly by a primal active-set method or by Dykstra's alternating
//! projections.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::point::Point;
use crate::polytope::Polytope;

/// Movement threshold between Dykstra sweeps.
pub const DYKSTRA_TOL: f64 = 1e-10;

/// Projection onto `{y ≥ 0, Σy ≤ radius}` in `O(n log n)`.
///
/// After sorting the positive part in decreasing order, the shift is
/// `δ_j = (x_(1) + … + x_(j) − r) / j` for the largest `j` with
/// `x_(j) > δ_j`; every coordinate is then lowered by `δ_j` and clamped at 0.
pub fn project_simplex_sorted(x: &Point, radius: f64) -> Point {
    assert!(radius > 0.0, "radius must be positive");
    let clamped = x.map(|v| v.max(0.0));
    if clamped.iter().sum::<f64>() <= radius {
        return clamped;
    }
    let mut sorted: Vec<f64> = clamped.iter().copied().filter(|&v| v > 0.0).collect();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut prefix = 0.0;
    let mut shift = 0.0;
    for (j, &v) in sorted.iter().enumerate() {
        prefix += v;
        let delta = (prefix - radius) / (j + 1) as f64;
        if v > delta {
            shift = delta;
        } else {
            break;
        }
    }
    clamped.map(|v| (v - shift).max(0.0))
}

/// Projection onto `{y ≥ 0, Σy ≤ radius}` by repeated clamp-and-shift.
///
/// Each pass clamps negatives to zero and subtracts from the positive
/// entries the common amount that would bring their sum to `radius`. The
/// support only shrinks, so at most `n + 1` passes are needed.
pub fn project_simplex_iterative(x: &Point, radius: f64) -> Result<Point> {
    assert!(radius > 0.0, "radius must be positive");
    let mut y: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    if y.iter().sum::<f64>() <= radius {
        return Ok(Point::from_vec_unchecked(y));
    }
    let cap = y.len() + 1;
    for _ in 0..cap {
        let (count, total) = y
            .iter()
            .filter(|&&v| v > 0.0)
            .fold((0usize, 0.0), |(c, s), &v| (c + 1, s + v));
        let delta = (total - radius) / count as f64;
        let mut clipped = false;
        for v in y.iter_mut().filter(|v| **v > 0.0) {
            *v -= delta;
            if *v <= 0.0 {
                *v = 0.0;
                clipped = true;
            }
        }
        if !clipped {
            return Ok(Point::from_vec_unchecked(y));
        }
    }
    let residual = y.iter().sum::<f64>() - radius;
    Err(Error::NotConverged {
        what: "iterative simplex projection",
        iterations: cap,
        residual,
    })
}

fn project_box(y: &mut [f64], upper: &[f64]) {
    for (v, &u) in y.iter_mut().zip(upper) {
        *v = v.clamp(0.0, u);
    }
}

/// Sweep cap `10·n·(m+1)·⌈log10(1/tol)⌉`.
pub fn dykstra_iteration_cap(n: usize, m: usize) -> usize {
    let digits = (1.0 / DYKSTRA_TOL).log10().ceil() as usize;
    10 * n.max(1) * (m + 1) * digits
}

/// Dykstra's alternating projections over the rows of `A x ≤ b` and the box.
///
/// Stops once neither any set's projection nor any correction vector moves
/// by [`DYKSTRA_TOL`] or more between consecutive sweeps.
pub fn project_dykstra(polytope: &Polytope, x: &Point) -> Result<Point> {
    let n = polytope.dim();
    let m = polytope.num_constraints();
    if x.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.dim(),
        });
    }
    let a = polytope.a();
    let b = polytope.b();
    let upper = polytope.upper();
    let rows: Vec<Vec<f64>> = (0..m).map(|i| a.row(i).iter().copied().collect()).collect();
    let row_norms: Vec<f64> = rows.iter().map(|r| r.iter().map(|v| v * v).sum()).collect();

    let mut cur: Vec<f64> = x.as_slice().to_vec();
    // one correction vector per set: m halfspaces then the box
    let mut corrections = vec![vec![0.0; n]; m + 1];
    // iterate produced by each set in the previous sweep; convergence needs
    // all of them and all corrections to settle, since outputs can repeat
    // for several sweeps while a correction is still drifting
    let mut previous = vec![vec![f64::NAN; n]; m + 1];
    let mut y = vec![0.0; n];
    let cap = dykstra_iteration_cap(n, m);
    let mut movement = f64::INFINITY;
    for _ in 0..cap {
        movement = 0.0;
        for (k, corr) in corrections.iter_mut().enumerate() {
            for ((yi, ci), pi) in y.iter_mut().zip(&cur).zip(corr.iter()) {
                *yi = ci + pi;
            }
            let mut proj = y.clone();
            if k < m {
                if row_norms[k] > 0.0 {
                    let excess: f64 =
                        rows[k].iter().zip(&proj).map(|(a, v)| a * v).sum::<f64>() - b[k];
                    if excess > 0.0 {
                        let scale = excess / row_norms[k];
                        for (v, a) in proj.iter_mut().zip(&rows[k]) {
                            *v -= scale * a;
                        }
                    }
                }
            } else {
                project_box(&mut proj, upper);
            }
            let mut shift = 0.0;
            for ((c, yi), pi) in corr.iter_mut().zip(&y).zip(&proj) {
                let next = yi - pi;
                shift += (next - *c) * (next - *c);
                *c = next;
            }
            movement = movement.max(shift.sqrt());
            let moved = proj
                .iter()
                .zip(&previous[k])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            movement = if moved.is_nan() { f64::INFINITY } else { movement.max(moved) };
            previous[k].copy_from_slice(&proj);
            cur = proj;
        }
        if movement < DYKSTRA_TOL {
            return Ok(Point::from_vec_unchecked(cur));
        }
    }
    Err(Error::NotConverged {
        what: "Dykstra projection",
        iterations: cap,
        residual: movement,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Bound {
    Free,
    Lower,
    Upper,
}

/// Exact projection by a primal active-set method for
/// `min ½‖y − x‖²  s.t.  A y ≤ b,  0 ≤ y ≤ u`.
///
/// Box constraints are handled by fixing variables, so each iteration only
/// solves a system in the active general rows. The start is the farthest
/// point from the polytope's anchor toward the box-clamped `x` that keeps
/// every row satisfied. Terminates in finitely many steps barring
/// degenerate cycling, which the iteration cap turns into an error.
pub fn project_active_set(polytope: &Polytope, x: &Point) -> Result<Point> {
    let n = polytope.dim();
    let m = polytope.num_constraints();
    if x.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.dim(),
        });
    }
    let a = polytope.a();
    let b = polytope.b();
    let upper = polytope.upper();
    let xs = x.as_slice();
    let scale = 1.0 + x.norm_inf() + upper.iter().copied().fold(0.0, f64::max);

    let anchor = polytope.min_inf_norm_point()?.into_vec();
    let mut target = xs.to_vec();
    project_box(&mut target, upper);
    let mut theta: f64 = 1.0;
    for i in 0..m {
        let at: f64 = (0..n).map(|j| a[(i, j)] * anchor[j]).sum();
        let tt: f64 = (0..n).map(|j| a[(i, j)] * target[j]).sum();
        if tt > b[i] && tt > at {
            theta = theta.min(((b[i] - at) / (tt - at)).max(0.0));
        }
    }
    let mut y: Vec<f64> = anchor
        .iter()
        .zip(&target)
        .map(|(p, t)| p + theta * (t - p))
        .collect();
    project_box(&mut y, upper);
    let mut status: Vec<Bound> = y
        .iter()
        .zip(upper)
        .map(|(&v, &u)| {
            if v <= 0.0 {
                Bound::Lower
            } else if v >= u {
                Bound::Upper
            } else {
                Bound::Free
            }
        })
        .collect();
    let mut working: Vec<usize> = Vec::new();

    let cap = 50 * (n + m) + 100;
    for _ in 0..cap {
        let free: Vec<usize> = (0..n).filter(|&j| status[j] == Bound::Free).collect();
        let r: Vec<f64> = (0..n).map(|j| y[j] - xs[j]).collect();
        let k = working.len();
        // z solves (B Bᵀ) z = B r_F with B = A[W, F]
        let z = if k == 0 {
            DVector::zeros(0)
        } else {
            let bmat = DMatrix::from_fn(k, free.len(), |i, c| a[(working[i], free[c])]);
            let rf = DVector::from_iterator(free.len(), free.iter().map(|&j| r[j]));
            let gram = &bmat * bmat.transpose();
            let rhs = &bmat * rf;
            match gram.clone().cholesky() {
                Some(ch) => ch.solve(&rhs),
                None => gram
                    .svd(true, true)
                    .solve(&rhs, 1e-14)
                    .map_err(|e| Error::InvalidInput(format!("active-set solve: {e}")))?,
            }
        };
        // step on the free coordinates: p = −(r − Bᵀ z)
        let mut step = vec![0.0; n];
        for &j in &free {
            let back: f64 = working.iter().zip(z.iter()).map(|(&i, zi)| a[(i, j)] * zi).sum();
            step[j] = -(r[j] - back);
        }
        let step_norm = free.iter().fold(0.0f64, |acc, &j| acc.max(step[j].abs()));
        if step_norm <= 1e-13 * scale {
            // multipliers: λ = −z on rows; fixed variables from stationarity
            let mut worst = -1e-12 * scale;
            let mut release: Option<(bool, usize)> = None;
            for (pos, zi) in z.iter().enumerate() {
                if -zi < worst {
                    worst = -zi;
                    release = Some((true, pos));
                }
            }
            for j in 0..n {
                if status[j] == Bound::Free {
                    continue;
                }
                let s_j = r[j] - working.iter().zip(z.iter()).map(|(&i, zi)| a[(i, j)] * zi).sum::<f64>();
                let mult = if status[j] == Bound::Upper { -s_j } else { s_j };
                if mult < worst {
                    worst = mult;
                    release = Some((false, j));
                }
            }
            match release {
                None => {
                    project_box(&mut y, upper);
                    return Ok(Point::from_vec_unchecked(y));
                }
                Some((true, pos)) => {
                    working.remove(pos);
                }
                Some((false, j)) => status[j] = Bound::Free,
            }
            continue;
        }
        let mut alpha = 1.0;
        let mut blocker: Option<(bool, usize, Bound)> = None;
        for &j in &free {
            let ratio = if step[j] < 0.0 {
                Some(((0.0 - y[j]) / step[j], Bound::Lower))
            } else if step[j] > 0.0 {
                Some(((upper[j] - y[j]) / step[j], Bound::Upper))
            } else {
                None
            };
            if let Some((t, side)) = ratio {
                let t = t.max(0.0);
                if t < alpha {
                    alpha = t;
                    blocker = Some((false, j, side));
                }
            }
        }
        for i in 0..m {
            if working.contains(&i) {
                continue;
            }
            let ap: f64 = free.iter().map(|&j| a[(i, j)] * step[j]).sum();
            if ap > 1e-14 * scale {
                let slack = b[i] - (0..n).map(|j| a[(i, j)] * y[j]).sum::<f64>();
                let t = (slack / ap).max(0.0);
                if t < alpha {
                    alpha = t;
                    blocker = Some((true, i, Bound::Free));
                }
            }
        }
        for &j in &free {
            y[j] += alpha * step[j];
        }
        match blocker {
            Some((true, i, _)) => working.push(i),
            Some((false, j, side)) => {
                status[j] = side;
                y[j] = if side == Bound::Upper { upper[j] } else { 0.0 };
            }
            None => {}
        }
    }
    Err(Error::NotConverged {
        what: "active-set projection",
        iterations: cap,
        residual: polytope.violation(&Point::from_vec_unchecked(y)),
    })
}
