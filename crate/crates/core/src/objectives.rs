//! DR-submodular objectives: quadratic, softmax extension of a DPP, and
//! expected word-of-mouth revenue on a weighted graph.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::point::Point;

/// A differentiable objective over a box in `R^n`.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &Point) -> Result<f64>;

    fn gradient(&self, x: &Point) -> Result<Point>;

    /// Known bound `G` on `‖∇F‖`, if any.
    fn gradient_bound(&self) -> Option<f64> {
        None
    }

    /// Known smoothness constant `β`, if any.
    fn smoothness(&self) -> Option<f64> {
        None
    }

    fn family(&self) -> &'static str;
}

impl<T: Objective + ?Sized> Objective for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &Point) -> Result<f64> {
        (**self).value(x)
    }
    fn gradient(&self, x: &Point) -> Result<Point> {
        (**self).gradient(x)
    }
    fn gradient_bound(&self) -> Option<f64> {
        (**self).gradient_bound()
    }
    fn smoothness(&self) -> Option<f64> {
        (**self).smoothness()
    }
    fn family(&self) -> &'static str {
        (**self).family()
    }
}

impl<T: Objective + ?Sized> Objective for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &Point) -> Result<f64> {
        (**self).value(x)
    }
    fn gradient(&self, x: &Point) -> Result<Point> {
        (**self).gradient(x)
    }
    fn gradient_bound(&self) -> Option<f64> {
        (**self).gradient_bound()
    }
    fn smoothness(&self) -> Option<f64> {
        (**self).smoothness()
    }
    fn family(&self) -> &'static str {
        (**self).family()
    }
}

fn check_dim(expected: usize, x: &Point) -> Result<()> {
    if x.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: x.dim(),
        });
    }
    Ok(())
}

fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    m.is_square()
        && (0..m.nrows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol))
}

/// `f(x) = ½ xᵀHx + hᵀx + c` with `H` symmetric and entrywise nonpositive.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    hessian: DMatrix<f64>,
    linear: Vec<f64>,
    offset: f64,
}

impl QuadraticObjective {
    pub fn new(hessian: DMatrix<f64>, linear: Vec<f64>, offset: f64) -> Result<Self> {
        if !is_symmetric(&hessian, 0.0) {
            return Err(Error::InvalidInput("H must be square and exactly symmetric".into()));
        }
        if hessian.iter().any(|&v| v > 0.0 || !v.is_finite()) {
            return Err(Error::InvalidInput(
                "H must have finite nonpositive entries".into(),
            ));
        }
        if linear.len() != hessian.nrows() {
            return Err(Error::DimensionMismatch {
                expected: hessian.nrows(),
                found: linear.len(),
            });
        }
        if !offset.is_finite() || linear.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("h and c must be finite".into()));
        }
        Ok(QuadraticObjective {
            hessian,
            linear,
            offset,
        })
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.hessian
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn with_offset(&self, offset: f64) -> Self {
        QuadraticObjective {
            offset,
            ..self.clone()
        }
    }

    fn hx(&self, x: &Point) -> Vec<f64> {
        let n = self.linear.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.hessian[(i, j)] * x[j]).sum())
            .collect()
    }

    /// `min f` over the box `[0, upper]` is at least `½ upperᵀ H upper + c`
    /// when `h ≥ 0`, because every quadratic term is nonpositive and
    /// `x_i x_j ≤ u_i u_j`.
    pub fn box_lower_bound(&self, upper: &[f64]) -> f64 {
        let n = self.linear.len();
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += self.hessian[(i, j)] * upper[i] * upper[j];
            }
        }
        let lin: f64 = self
            .linear
            .iter()
            .zip(upper)
            .map(|(h, u)| h.min(0.0) * u)
            .sum();
        0.5 * quad + lin + self.offset
    }

    /// Largest eigenvalue magnitude of `H`, the exact smoothness constant.
    pub fn spectral_radius(&self) -> f64 {
        SymmetricEigen::new(self.hessian.clone())
            .eigenvalues
            .iter()
            .fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }
}

impl Objective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.linear.len()
    }

    fn value(&self, x: &Point) -> Result<f64> {
        check_dim(self.dim(), x)?;
        let hx = self.hx(x);
        let quad: f64 = hx.iter().zip(x).map(|(a, b)| a * b).sum();
        let lin: f64 = self.linear.iter().zip(x).map(|(a, b)| a * b).sum();
        Ok(0.5 * quad + lin + self.offset)
    }

    fn gradient(&self, x: &Point) -> Result<Point> {
        check_dim(self.dim(), x)?;
        let mut g = self.hx(x);
        for (gi, hi) in g.iter_mut().zip(&self.linear) {
            *gi += hi;
        }
        Point::new(g)
    }

    fn smoothness(&self) -> Option<f64> {
        Some(self.spectral_radius())
    }

    fn family(&self) -> &'static str {
        "quadratic"
    }
}

/// Softmax extension `log det(diag(x)(L − I) + I)` of a DPP with kernel `L`.
#[derive(Debug, Clone)]
pub struct SoftmaxObjective {
    kernel: DMatrix<f64>,
    /// `L − I`
    shifted: DMatrix<f64>,
}

/// `|det|` below this is treated as singular.
const DET_FLOOR: f64 = 1e-300;

impl SoftmaxObjective {
    pub fn new(kernel: DMatrix<f64>) -> Result<Self> {
        if !is_symmetric(&kernel, 1e-12) {
            return Err(Error::InvalidInput("kernel must be symmetric".into()));
        }
        if kernel.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("kernel must be finite".into()));
        }
        let min_eig = SymmetricEigen::new(kernel.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-9 {
            return Err(Error::InvalidInput(format!(
                "kernel is not positive semidefinite (eigenvalue {min_eig:.3e})"
            )));
        }
        let n = kernel.nrows();
        let shifted = &kernel - DMatrix::identity(n, n);
        Ok(SoftmaxObjective { kernel, shifted })
    }

    pub fn kernel(&self) -> &DMatrix<f64> {
        &self.kernel
    }

    fn system(&self, x: &Point) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::identity(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += x[i] * self.shifted[(i, j)];
            }
        }
        m
    }

    /// `min_S log det(L_S)` over all principal submatrices (the empty one
    /// counts as 1). The softmax extension is the log of a multilinear
    /// polynomial, so this is its minimum over `[0,1]^n`.
    pub fn unit_cube_minimum(&self) -> Result<f64> {
        let n = self.dim();
        if n > 20 {
            return Err(Error::InvalidInput(
                "subset enumeration is limited to n <= 20".into(),
            ));
        }
        let mut best: f64 = 0.0;
        for mask in 1u32..(1 << n) {
            let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let sub = DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.kernel[(idx[a], idx[b])]);
            let det = sub.determinant();
            if det <= DET_FLOOR {
                return Err(Error::Singular {
                    point: (0..n).map(|i| f64::from(mask >> i & 1)).collect(),
                });
            }
            best = best.min(det.ln());
        }
        Ok(best)
    }
}

impl Objective for SoftmaxObjective {
    fn dim(&self) -> usize {
        self.kernel.nrows()
    }

    fn value(&self, x: &Point) -> Result<f64> {
        check_dim(self.dim(), x)?;
        let lu = self.system(x).lu();
        let u = lu.u();
        let parity: f64 = lu.p().determinant();
        let mut sign = parity;
        let mut log_abs = 0.0;
        for i in 0..self.dim() {
            let d = u[(i, i)];
            if d == 0.0 {
                return Err(Error::Singular {
                    point: x.as_slice().to_vec(),
                });
            }
            sign *= d.signum();
            log_abs += d.abs().ln();
        }
        if sign <= 0.0 || log_abs < DET_FLOOR.ln() {
            return Err(Error::Singular {
                point: x.as_slice().to_vec(),
            });
        }
        Ok(log_abs)
    }

    /// `∂/∂x_i log det M(x) = [(L − I) M(x)⁻¹]_{ii}`.
    fn gradient(&self, x: &Point) -> Result<Point> {
        check_dim(self.dim(), x)?;
        let n = self.dim();
        let inv = self
            .system(x)
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Singular {
                point: x.as_slice().to_vec(),
            })?;
        let g: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|k| self.shifted[(i, k)] * inv[(k, i)]).sum())
            .collect();
        Point::new(g).map_err(|_| Error::Singular {
            point: x.as_slice().to_vec(),
        })
    }

    fn family(&self) -> &'static str {
        "softmax"
    }
}

/// `Σ_i Σ_{j≠i} w_ij (1 − (1−p)^{x_i}) (1−p)^{x_j}` over an undirected graph.
///
/// Each undirected edge `{i, j}` contributes both ordered terms, which sum to
/// `w (q^{x_i} + q^{x_j} − 2 q^{x_i} q^{x_j})` with `q = 1 − p`.
#[derive(Debug, Clone)]
pub struct RevenueObjective {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    p: f64,
}

impl RevenueObjective {
    /// `edges` holds `(i, j, w)` with `i ≠ j`, `w ≥ 0`; each undirected edge
    /// must appear once.
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>, p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidInput(format!("p must lie in (0,1), got {p}")));
        }
        for &(i, j, w) in &edges {
            if i == j {
                return Err(Error::InvalidInput(format!("self-loop at vertex {i}")));
            }
            if i >= n || j >= n {
                return Err(Error::InvalidInput(format!(
                    "edge ({i}, {j}) out of range for {n} vertices"
                )));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidInput(format!("edge weight {w} must be finite and >= 0")));
            }
        }
        Ok(RevenueObjective { n, edges, p })
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    fn powers(&self, x: &Point) -> Vec<f64> {
        let log_q = (1.0 - self.p).ln();
        x.iter().map(|&v| (v * log_q).exp()).collect()
    }
}

impl Objective for RevenueObjective {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &Point) -> Result<f64> {
        check_dim(self.n, x)?;
        let q = self.powers(x);
        Ok(self
            .edges
            .iter()
            .map(|&(i, j, w)| w * (q[i] + q[j] - 2.0 * q[i] * q[j]))
            .sum())
    }

    fn gradient(&self, x: &Point) -> Result<Point> {
        check_dim(self.n, x)?;
        let q = self.powers(x);
        let log_q = (1.0 - self.p).ln();
        let mut g = vec![0.0; self.n];
        for &(i, j, w) in &self.edges {
            g[i] += w * log_q * q[i] * (1.0 - 2.0 * q[j]);
            g[j] += w * log_q * q[j] * (1.0 - 2.0 * q[i]);
        }
        Point::new(g)
    }

    fn family(&self) -> &'static str {
        "revenue"
    }
}

/// `F + shift`; used to make an objective nonnegative on a region.
#[derive(Debug, Clone)]
pub struct Shifted<F> {
    pub inner: F,
    pub shift: f64,
}

impl<F: Objective> Objective for Shifted<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &Point) -> Result<f64> {
        Ok(self.inner.value(x)? + self.shift)
    }
    fn gradient(&self, x: &Point) -> Result<Point> {
        self.inner.gradient(x)
    }
    fn gradient_bound(&self) -> Option<f64> {
        self.inner.gradient_bound()
    }
    fn smoothness(&self) -> Option<f64> {
        self.inner.smoothness()
    }
    fn family(&self) -> &'static str {
        self.inner.family()
    }
}

/// Unbiased gradient estimate `∇F(x) + σζ` with `ζ ~ N(0, I)`.
pub fn stochastic_gradient<F, R>(f: &F, x: &Point, rng: &mut R, sigma: f64) -> Result<Point>
where
    F: Objective + ?Sized,
    R: Rng + ?Sized,
{
    if !(sigma >= 0.0) {
        return Err(Error::InvalidInput("sigma must be nonnegative".into()));
    }
    let g = f.gradient(x)?;
    if sigma == 0.0 {
        return Ok(g);
    }
    let noisy: Vec<f64> = g
        .iter()
        .map(|&gi| gi + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Point::new(noisy)
}

/// Sampled evidence for the DR property and estimates of `β` and `G`.
#[derive(Debug, Clone)]
pub struct DrReport {
    /// `max_i (∇F(x)_i − ∇F(y)_i)` over sampled `y ≤ x`; ≤ 0 means no
    /// violation was seen.
    pub max_violation: f64,
    /// The pair `(x, y)` achieving `max_violation`.
    pub witness: Option<(Point, Point)>,
    pub smoothness_estimate: f64,
    pub gradient_bound_estimate: f64,
    pub trials: usize,
}

/// Samples `y` uniformly in `[0, upper]` and `x` uniformly in `[y, upper]`.
pub fn dr_diagnostic<F, R>(f: &F, upper: &[f64], trials: usize, rng: &mut R) -> Result<DrReport>
where
    F: Objective + ?Sized,
    R: Rng + ?Sized,
{
    if trials == 0 {
        return Err(Error::InvalidInput("dr_diagnostic needs at least one trial".into()));
    }
    if upper.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: upper.len(),
        });
    }
    let mut report = DrReport {
        max_violation: f64::NEG_INFINITY,
        witness: None,
        smoothness_estimate: 0.0,
        gradient_bound_estimate: 0.0,
        trials,
    };
    for _ in 0..trials {
        let y: Vec<f64> = upper.iter().map(|&u| rng.gen_range(0.0..=u)).collect();
        let x: Vec<f64> = y
            .iter()
            .zip(upper)
            .map(|(&lo, &u)| rng.gen_range(lo..=u))
            .collect();
        let (x, y) = (Point::new(x)?, Point::new(y)?);
        let (gx, gy) = (f.gradient(&x)?, f.gradient(&y)?);
        let diff = gx.sub(&gy)?;
        let violation = diff.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if violation > report.max_violation {
            report.max_violation = violation;
            report.witness = Some((x.clone(), y.clone()));
        }
        let step = x.distance(&y)?;
        if step > 0.0 {
            report.smoothness_estimate = report.smoothness_estimate.max(diff.norm2() / step);
        }
        report.gradient_bound_estimate = report
            .gradient_bound_estimate
            .max(gx.norm2())
            .max(gy.norm2());
    }
    Ok(report)
}
