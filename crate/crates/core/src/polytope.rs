//! Polytopes `{x : A x ≤ b, 0 ≤ x ≤ u}`.
//!
//! Lower-bound constraints such as `Σx ≥ 0.25` are stored as negated rows.
//! Construction certifies nonemptiness with one LP phase-one solve.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::oracles::lp::{lp_solve, LpStatus, Sense};
use crate::point::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    a: DMatrix<f64>,
    b: Vec<f64>,
    upper: Vec<f64>,
    /// feasible point of minimum `‖x‖∞`, found at construction
    anchor: Point,
}

/// Structural summary of a polytope.
#[derive(Debug, Clone)]
pub struct PolytopeReport {
    pub diameter_bound: f64,
    pub is_down_closed_sufficient: bool,
    pub contains_origin: bool,
    pub min_inf_norm_point: Point,
}

impl Polytope {
    pub fn new(a: DMatrix<f64>, b: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let (m, n) = a.shape();
        if n == 0 {
            return Err(Error::InvalidInput("polytope dimension must be positive".into()));
        }
        if b.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: b.len(),
            });
        }
        if upper.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: upper.len(),
            });
        }
        if upper.iter().any(|u| !u.is_finite() || *u <= 0.0) {
            return Err(Error::InvalidInput(
                "box upper bounds must be finite and strictly positive".into(),
            ));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("A and b must be finite".into()));
        }
        let anchor = min_inf_norm(&a, &b, &upper)?;
        Ok(Polytope { a, b, upper, anchor })
    }

    /// Builds from row slices; convenient for small literal polytopes.
    pub fn from_rows(rows: &[&[f64]], b: &[f64], upper: &[f64]) -> Result<Self> {
        let n = upper.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        let a = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
        Polytope::new(a, b.to_vec(), upper.to_vec())
    }

    /// The box `[0, upper]` with no further constraints.
    pub fn box_only(upper: Vec<f64>) -> Result<Self> {
        let n = upper.len();
        Polytope::new(DMatrix::zeros(0, n), Vec::new(), upper)
    }

    pub fn unit_box(n: usize) -> Self {
        Polytope::box_only(vec![1.0; n]).expect("unit box is nonempty")
    }

    /// `{x ∈ [0,1]^n : Σx ≤ radius}`.
    pub fn capped_simplex(n: usize, radius: f64) -> Result<Self> {
        Polytope::new(DMatrix::from_element(1, n, 1.0), vec![radius], vec![1.0; n])
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn num_constraints(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// `A x ≤ b + tol` and `-tol ≤ x ≤ u + tol`.
    pub fn contains(&self, x: &Point, tol: f64) -> Result<bool> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        if tol < 0.0 {
            return Err(Error::InvalidInput("tolerance must be nonnegative".into()));
        }
        let in_box = x
            .iter()
            .zip(&self.upper)
            .all(|(&v, &u)| v >= -tol && v <= u + tol);
        if !in_box {
            return Ok(false);
        }
        Ok((0..self.num_constraints()).all(|i| {
            let lhs: f64 = self.a.row(i).iter().zip(x).map(|(a, v)| a * v).sum();
            lhs <= self.b[i] + tol
        }))
    }

    /// Largest violation of any constraint (0 when feasible).
    pub fn violation(&self, x: &Point) -> f64 {
        let mut worst: f64 = 0.0;
        for (&v, &u) in x.iter().zip(&self.upper) {
            worst = worst.max(-v).max(v - u);
        }
        for i in 0..self.num_constraints() {
            let lhs: f64 = self.a.row(i).iter().zip(x).map(|(a, v)| a * v).sum();
            worst = worst.max(lhs - self.b[i]);
        }
        worst
    }

    /// `‖u‖₂`, an upper bound on the diameter of the region.
    pub fn diameter_bound(&self) -> f64 {
        self.upper.iter().map(|u| u * u).sum::<f64>().sqrt()
    }

    /// Nonnegative `A` and `b` together with the zero lower bound make the
    /// region down-closed. This is sufficient, not necessary.
    pub fn down_closed_sufficient(&self) -> bool {
        self.a.iter().all(|&v| v >= 0.0) && self.b.iter().all(|&v| v >= 0.0)
    }

    /// If the polytope is `{Σ c·x ≤ b} ∩ [0,u]` with `c > 0` and the box
    /// redundant (`b/c ≤ min u`), the simplex radius `b/c`.
    pub fn simplex_radius(&self) -> Option<f64> {
        if self.num_constraints() != 1 {
            return None;
        }
        let row = self.a.row(0);
        let c = row[0];
        if c <= 0.0 || row.iter().any(|&v| v != c) || self.b[0] <= 0.0 {
            return None;
        }
        let radius = self.b[0] / c;
        let min_upper = self.upper.iter().copied().fold(f64::INFINITY, f64::min);
        (radius <= min_upper).then_some(radius)
    }

    /// A feasible point of minimum `‖x‖∞` (computed once, at construction).
    pub fn min_inf_norm_point(&self) -> Result<Point> {
        Ok(self.anchor.clone())
    }

    pub fn report(&self) -> Result<PolytopeReport> {
        Ok(PolytopeReport {
            diameter_bound: self.diameter_bound(),
            is_down_closed_sufficient: self.down_closed_sufficient(),
            contains_origin: self.contains(&Point::zeros(self.dim()), 0.0)?,
            min_inf_norm_point: self.min_inf_norm_point()?,
        })
    }

    /// Plain-text form:
    ///
    /// ```text
    /// polytope <n> <m>
    /// A
    /// <m lines of n numbers>
    /// b
    /// <m numbers on one line>
    /// u
    /// <n numbers on one line>
    /// ```
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let (m, n) = self.a.shape();
        writeln!(out, "polytope {n} {m}").unwrap();
        out.push_str("A\n");
        for i in 0..m {
            out.push_str(&join_numbers(self.a.row(i).iter()));
            out.push('\n');
        }
        out.push_str("b\n");
        out.push_str(&join_numbers(self.b.iter()));
        out.push('\n');
        out.push_str("u\n");
        out.push_str(&join_numbers(self.upper.iter()));
        out.push('\n');
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });
        let err = |line: usize, message: &str| Error::Parse {
            path: "<polytope>".into(),
            line: line + 1,
            message: message.into(),
        };
        let (ln, header) = lines.next().ok_or_else(|| err(0, "missing header"))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 || parts[0] != "polytope" {
            return Err(err(ln, "expected `polytope <n> <m>`"));
        }
        let n: usize = parts[1].parse().map_err(|_| err(ln, "bad n"))?;
        let m: usize = parts[2].parse().map_err(|_| err(ln, "bad m"))?;
        let mut expect_tag = |tag: &str| -> Result<()> {
            match lines.next() {
                Some((_, l)) if l.trim() == tag => Ok(()),
                Some((ln, _)) => Err(err(ln, &format!("expected `{tag}`"))),
                None => Err(err(0, &format!("missing `{tag}` section"))),
            }
        };
        expect_tag("A")?;
        let mut a = DMatrix::zeros(m, n);
        for i in 0..m {
            let (ln, l) = lines.next().ok_or_else(|| err(0, "truncated A"))?;
            let row = parse_numbers(l, n).map_err(|e| err(ln, &e))?;
            for (j, v) in row.into_iter().enumerate() {
                a[(i, j)] = v;
            }
        }
        let mut read_vec = |tag: &str, len: usize| -> Result<Vec<f64>> {
            match lines.next() {
                Some((_, l)) if l.trim() == tag => {}
                Some((ln, _)) => return Err(err(ln, &format!("expected `{tag}`"))),
                None => return Err(err(0, &format!("missing `{tag}` section"))),
            }
            if len == 0 {
                // an empty vector may be written as an empty line, which the
                // line filter drops
                return Ok(Vec::new());
            }
            let (ln, l) = lines.next().ok_or_else(|| err(0, "truncated vector"))?;
            parse_numbers(l, len).map_err(|e| err(ln, &e))
        };
        let b = read_vec("b", m)?;
        let upper = read_vec("u", n)?;
        Polytope::new(a, b, upper)
    }
}

/// `min t  s.t.  A x ≤ b,  x_i − t ≤ 0,  0 ≤ x ≤ u,  0 ≤ t ≤ max u`;
/// infeasibility of this LP is infeasibility of the polytope.
fn min_inf_norm(a_orig: &DMatrix<f64>, b_orig: &[f64], upper_orig: &[f64]) -> Result<Point> {
    let (m, n) = a_orig.shape();
    let mut a = DMatrix::zeros(m + n, n + 1);
    a.view_mut((0, 0), (m, n)).copy_from(a_orig);
    for i in 0..n {
        a[(m + i, i)] = 1.0;
        a[(m + i, n)] = -1.0;
    }
    let mut b = b_orig.to_vec();
    b.extend(std::iter::repeat(0.0).take(n));
    let lower = vec![0.0; n + 1];
    let mut upper = upper_orig.to_vec();
    upper.push(upper_orig.iter().copied().fold(0.0, f64::max));
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let sol = lp_solve(&a, &b, &lower, &upper, &c, Sense::Minimize)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Infeasible);
    }
    let mut x = sol.into_point()?.into_vec();
    x.truncate(n);
    Ok(Point::from_vec_unchecked(x))
}

pub(crate) fn join_numbers<'a>(values: impl Iterator<Item = &'a f64>) -> String {
    values
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub(crate) fn parse_numbers(line: &str, expected: usize) -> std::result::Result<Vec<f64>, String> {
    let values = line
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| format!("bad number `{t}`")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if values.len() != expected {
        return Err(format!("expected {expected} numbers, found {}", values.len()));
    }
    Ok(values)
}

/// `u_j = min_i b_i / A_ij`, the tightest box implied by a positive system.
pub fn tight_upper_bounds(a: &DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: b.len(),
        });
    }
    if m == 0 {
        return Err(Error::InvalidInput("tight upper bounds need at least one row".into()));
    }
    if a.iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidInput(
            "tight upper bounds require strictly positive A".into(),
        ));
    }
    if b.iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidInput("tight upper bounds require b > 0".into()));
    }
    Ok((0..n)
        .map(|j| {
            (0..m)
                .map(|i| b[i] / a[(i, j)])
                .fold(f64::INFINITY, f64::min)
        })
        .collect())
}
