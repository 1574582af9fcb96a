//! Seeded instance generators, graph ingestion and the online batch stream.
//!
//! Every instance is a pure function of its [`GeneratorSpec`]; the seed
//! drives a ChaCha8 generator and draws happen in a fixed order
//! (documented per generator).

mod graph;
mod stream;

pub use graph::{load_graph, revenue_polytopes, IndexBase, WeightedGraph};
pub use stream::BatchStream;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::{Objective, QuadraticObjective, RevenueObjective, SoftmaxObjective};
use crate::oracles::project;
use crate::point::Point;
use crate::polytope::{join_numbers, parse_numbers, tight_upper_bounds, Polytope};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    QuadraticUniform,
    QuadraticExponential,
    SoftmaxUniform,
    SoftmaxExponential,
    RevenueSynthetic,
    RevenueGraph,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::QuadraticUniform => "quadratic_uniform",
            Family::QuadraticExponential => "quadratic_exponential",
            Family::SoftmaxUniform => "softmax_uniform",
            Family::SoftmaxExponential => "softmax_exponential",
            Family::RevenueSynthetic => "revenue_synthetic",
            Family::RevenueGraph => "revenue_graph",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RevenuePolytope {
    /// `0.25 ≤ Σx ≤ 1`
    #[default]
    General,
    /// `Σx ≤ 1`
    DownClosed,
}

/// Everything needed to rebuild an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
    /// Constraint rows; ignored by the revenue families.
    pub m: usize,
    pub seed: u64,
    /// Offset of the constraint-matrix entries.
    pub mu: f64,
    /// Rate of the exponential constraint entries.
    pub lambda: f64,
    /// Advocacy probability of the revenue model.
    pub p: f64,
    /// Softmax kernel eigenvalues are uniform in `[0, eig_max]`.
    pub eig_max: f64,
    /// Right-hand side `b = b_scale · 1`; defaults to 1 (quadratic) or
    /// 2 (softmax).
    pub b_scale: Option<f64>,
    /// Edge probability of synthetic revenue graphs.
    pub edge_prob: f64,
    pub graph: Option<PathBuf>,
    pub index_base: IndexBase,
    pub revenue_polytope: RevenuePolytope,
    /// Quadratic and softmax families only: use the single row
    /// `Σx ≤ b_scale` instead of `m` random rows.
    pub simplex: bool,
    /// Multi-start projected gradient descent used to estimate the
    /// quadratic's minimizer.
    pub minimizer_starts: usize,
    pub minimizer_steps: usize,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            family: Family::QuadraticUniform,
            n: 6,
            m: 6,
            seed: 0,
            mu: 0.01,
            lambda: 0.25,
            p: 1e-4,
            eig_max: 1.5,
            b_scale: None,
            edge_prob: 0.1,
            graph: None,
            index_base: IndexBase::Auto,
            revenue_polytope: RevenuePolytope::General,
            simplex: false,
            minimizer_starts: 20,
            minimizer_steps: 2000,
        }
    }
}

impl GeneratorSpec {
    pub fn new(family: Family, n: usize, m: usize, seed: u64) -> Self {
        GeneratorSpec {
            family,
            n,
            m,
            seed,
            ..GeneratorSpec::default()
        }
    }

    /// Parses a standalone spec; unknown keys are errors.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone)]
pub enum InstanceObjective {
    Quadratic(QuadraticObjective),
    Softmax(SoftmaxObjective),
    Revenue(RevenueObjective),
}

impl InstanceObjective {
    fn inner(&self) -> &dyn Objective {
        match self {
            InstanceObjective::Quadratic(q) => q,
            InstanceObjective::Softmax(s) => s,
            InstanceObjective::Revenue(r) => r,
        }
    }

    pub fn into_arc(self) -> Arc<dyn Objective> {
        match self {
            InstanceObjective::Quadratic(q) => Arc::new(q),
            InstanceObjective::Softmax(s) => Arc::new(s),
            InstanceObjective::Revenue(r) => Arc::new(r),
        }
    }
}

impl Objective for InstanceObjective {
    fn dim(&self) -> usize {
        self.inner().dim()
    }

    fn value(&self, x: &Point) -> Result<f64> {
        self.inner().value(x)
    }

    fn gradient(&self, x: &Point) -> Result<Point> {
        self.inner().gradient(x)
    }

    fn gradient_bound(&self) -> Option<f64> {
        self.inner().gradient_bound()
    }

    fn smoothness(&self) -> Option<f64> {
        self.inner().smoothness()
    }

    fn family(&self) -> &'static str {
        self.inner().family()
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub objective: InstanceObjective,
    pub polytope: Polytope,
    /// Quadratic families: the estimated minimizer `x̂` used for the offset.
    pub minimizer: Option<Point>,
}

pub fn generate(spec: &GeneratorSpec) -> Result<Instance> {
    match spec.family {
        Family::QuadraticUniform | Family::QuadraticExponential => {
            let (q, poly, xhat) = gen_quadratic(spec)?;
            Ok(Instance {
                objective: InstanceObjective::Quadratic(q),
                polytope: poly,
                minimizer: Some(xhat),
            })
        }
        Family::SoftmaxUniform | Family::SoftmaxExponential => {
            let (s, poly) = gen_softmax(spec)?;
            Ok(Instance {
                objective: InstanceObjective::Softmax(s),
                polytope: poly,
                minimizer: None,
            })
        }
        Family::RevenueSynthetic | Family::RevenueGraph => {
            let g = revenue_graph(spec)?;
            let r = RevenueObjective::new(g.n, g.edges, spec.p)?;
            let (general, down) = revenue_polytopes(g.n)?;
            let polytope = match spec.revenue_polytope {
                RevenuePolytope::General => general,
                RevenuePolytope::DownClosed => down,
            };
            Ok(Instance {
                objective: InstanceObjective::Revenue(r),
                polytope,
                minimizer: None,
            })
        }
    }
}

/// The graph behind a revenue spec: loaded from `spec.graph`, or an
/// Erdős–Rényi graph drawn from the seed.
pub fn revenue_graph(spec: &GeneratorSpec) -> Result<WeightedGraph> {
    match spec.family {
        Family::RevenueGraph => {
            let path = spec
                .graph
                .as_ref()
                .ok_or_else(|| Error::Config("revenue_graph needs `graph = <path>`".into()))?;
            load_graph(path, spec.index_base)
        }
        Family::RevenueSynthetic => {
            check_sizes(spec.n, 1)?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            WeightedGraph::random(spec.n, spec.edge_prob, &mut rng)
        }
        other => Err(Error::Config(format!("{} is not a revenue family", other.name()))),
    }
}

fn check_sizes(n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidInput(format!("need n, m >= 1, got n={n}, m={m}")));
    }
    Ok(())
}

fn exponential(rate: f64) -> Result<Exp<f64>> {
    Exp::new(rate).map_err(|_| Error::InvalidInput(format!("exponential rate {rate} must be positive")))
}

/// `m × n` constraint matrix: uniform in `[μ, μ+1]` or `Exp(λ) + μ`.
/// With `spec.simplex` it is a single row of ones and nothing is drawn.
fn constraint_matrix(spec: &GeneratorSpec, exponential_entries: bool, rng: &mut ChaCha8Rng) -> Result<DMatrix<f64>> {
    let (m, n) = (spec.m, spec.n);
    if spec.simplex {
        return Ok(DMatrix::from_element(1, n, 1.0));
    }
    let mut a = DMatrix::zeros(m, n);
    if exponential_entries {
        let dist = exponential(spec.lambda)?;
        for i in 0..m {
            for j in 0..n {
                a[(i, j)] = dist.sample(rng) + spec.mu;
            }
        }
    } else {
        for i in 0..m {
            for j in 0..n {
                a[(i, j)] = spec.mu + rng.gen::<f64>();
            }
        }
    }
    Ok(a)
}

/// Quadratic instance: draws `H` (upper triangle, row-major, mirrored),
/// then `A` (row-major), then the minimizer starts.
///
/// `u` is the tight box of `Ax ≤ b`, `h = −0.2 Hᵀu`, and the offset
/// `c = −f(x̂) + 0.1 |f(x̂)|` with `f = ½xᵀHx + hᵀx` and `x̂` the best of
/// several projected-gradient-descent runs on `f` over the polytope.
pub fn gen_quadratic(spec: &GeneratorSpec) -> Result<(QuadraticObjective, Polytope, Point)> {
    check_sizes(spec.n, spec.m)?;
    let exponential_entries = match spec.family {
        Family::QuadraticUniform => false,
        Family::QuadraticExponential => true,
        other => return Err(Error::Config(format!("{} is not a quadratic family", other.name()))),
    };
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut h = DMatrix::zeros(n, n);
    let hdist = exponential(1.0)?;
    for i in 0..n {
        for j in i..n {
            let v = if exponential_entries {
                -hdist.sample(&mut rng)
            } else {
                -rng.gen::<f64>()
            };
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let a = constraint_matrix(spec, exponential_entries, &mut rng)?;
    let b = vec![spec.b_scale.unwrap_or(1.0); a.nrows()];
    let u = tight_upper_bounds(&a, &b)?;
    let linear: Vec<f64> = (0..n)
        .map(|i| -0.2 * (0..n).map(|j| h[(j, i)] * u[j]).sum::<f64>())
        .collect();
    let polytope = Polytope::new(a, b, u)?;
    let raw = QuadraticObjective::new(h, linear, 0.0)?;
    let (xhat, fmin) = minimize_over(&raw, &polytope, spec.minimizer_starts, spec.minimizer_steps, &mut rng)?;
    let offset = -fmin + 0.1 * fmin.abs();
    Ok((raw.with_offset(offset), polytope, xhat))
}

/// Projected gradient descent from the minimum-`‖x‖∞` point and
/// `starts − 1` uniform box points, step `1/ρ(H)`; a run stops early once
/// an update moves less than `1e-12`.
fn minimize_over(
    f: &QuadraticObjective,
    polytope: &Polytope,
    starts: usize,
    steps: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Point, f64)> {
    let eta = 1.0 / f.spectral_radius().max(1e-12);
    let mut best: Option<(Point, f64)> = None;
    for s in 0..starts.max(1) {
        let mut x = if s == 0 {
            polytope.min_inf_norm_point()?
        } else {
            let raw = Point::new(polytope.upper().iter().map(|&u| u * rng.gen::<f64>()).collect())?;
            project(polytope, &raw)?
        };
        for _ in 0..steps {
            let next = project(polytope, &x.axpy(-eta, &f.gradient(&x)?)?)?;
            let moved = next.max_abs_diff(&x)?;
            x = next;
            if moved < 1e-12 {
                break;
            }
        }
        let v = f.value(&x)?;
        if best.as_ref().map_or(true, |(_, b)| v < *b) {
            best = Some((x, v));
        }
    }
    Ok(best.expect("at least one start"))
}

/// Softmax instance: draws `d` (n uniforms on `[0, eig_max]`), then an
/// `n × n` standard normal matrix (column-major) for `U`, then `A`.
///
/// `U` is the `Q` factor with columns sign-flipped so `R` has a
/// nonnegative diagonal. The box is the tight bound capped at 1, since the
/// objective lives on `[0, 1]^n`.
pub fn gen_softmax(spec: &GeneratorSpec) -> Result<(SoftmaxObjective, Polytope)> {
    check_sizes(spec.n, spec.m)?;
    let exponential_entries = match spec.family {
        Family::SoftmaxUniform => false,
        Family::SoftmaxExponential => true,
        other => return Err(Error::Config(format!("{} is not a softmax family", other.name()))),
    };
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let d: Vec<f64> = (0..n).map(|_| spec.eig_max * rng.gen::<f64>()).collect();
    let g = DMatrix::from_fn(n, n, |_, _| 0.0);
    let g = g.map(|_: f64| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..n {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    let l = &q * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d)) * q.transpose();
    let l = (&l + l.transpose()) * 0.5;
    let kernel = SoftmaxObjective::new(l)?;
    let a = constraint_matrix(spec, exponential_entries, &mut rng)?;
    let b = vec![spec.b_scale.unwrap_or(2.0); a.nrows()];
    let u: Vec<f64> = tight_upper_bounds(&a, &b)?.into_iter().map(|v| v.min(1.0)).collect();
    Ok((kernel, Polytope::new(a, b, u)?))
}

impl Instance {
    /// Plain-text dump: an objective block followed by the polytope block.
    ///
    /// ```text
    /// objective quadratic <n>        objective softmax <n>    objective revenue <n> <p> <k>
    /// H / <n rows> / h / <row> / c / <value>     L / <n rows>     <k lines `i j w`>
    /// polytope <n> <m> ...
    /// ```
    pub fn to_text(&self) -> String {
        let mut out = String::from("# drsub instance v1\n");
        match &self.objective {
            InstanceObjective::Quadratic(q) => {
                let n = q.dim();
                writeln!(out, "objective quadratic {n}").unwrap();
                out.push_str("H\n");
                for i in 0..n {
                    writeln!(out, "{}", join_numbers(q.hessian().row(i).iter())).unwrap();
                }
                writeln!(out, "h\n{}", join_numbers(q.linear().iter())).unwrap();
                writeln!(out, "c\n{:?}", q.offset()).unwrap();
            }
            InstanceObjective::Softmax(s) => {
                let n = s.dim();
                writeln!(out, "objective softmax {n}").unwrap();
                out.push_str("L\n");
                for i in 0..n {
                    writeln!(out, "{}", join_numbers(s.kernel().row(i).iter())).unwrap();
                }
            }
            InstanceObjective::Revenue(r) => {
                writeln!(out, "objective revenue {} {:?} {}", r.dim(), r.p(), r.edges().len()).unwrap();
                for &(i, j, w) in r.edges() {
                    writeln!(out, "{i} {j} {w:?}").unwrap();
                }
            }
        }
        out.push_str(&self.polytope.to_text());
        out
    }

    pub fn from_text(text: &str) -> Result<Instance> {
        let mut lines = Cursor::new(text);
        let (ln, header) = lines.next("objective header")?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() < 3 || parts[0] != "objective" {
            return Err(lines.error(ln, "expected `objective <kind> <n> ...`"));
        }
        let n: usize = parts[2].parse().map_err(|_| lines.error(ln, "bad n"))?;
        let objective = match parts[1] {
            "quadratic" => {
                let h = lines.matrix("H", n)?;
                let linear = lines.vector("h", n)?;
                let c = lines.vector("c", 1)?[0];
                InstanceObjective::Quadratic(QuadraticObjective::new(h, linear, c)?)
            }
            "softmax" => InstanceObjective::Softmax(SoftmaxObjective::new(lines.matrix("L", n)?)?),
            "revenue" => {
                if parts.len() != 5 {
                    return Err(lines.error(ln, "expected `objective revenue <n> <p> <edges>`"));
                }
                let p: f64 = parts[3].parse().map_err(|_| lines.error(ln, "bad p"))?;
                let k: usize = parts[4].parse().map_err(|_| lines.error(ln, "bad edge count"))?;
                let mut edges = Vec::with_capacity(k);
                for _ in 0..k {
                    let (ln, l) = lines.next("edge")?;
                    let f: Vec<&str> = l.split_whitespace().collect();
                    let parsed = match f.as_slice() {
                        [i, j, w] => i.parse().ok().zip(j.parse().ok()).zip(w.parse().ok()),
                        _ => None,
                    };
                    let ((i, j), w) = parsed.ok_or_else(|| lines.error(ln, "expected `i j w`"))?;
                    edges.push((i, j, w));
                }
                InstanceObjective::Revenue(RevenueObjective::new(n, edges, p)?)
            }
            other => return Err(lines.error(ln, &format!("unknown objective kind `{other}`"))),
        };
        let polytope = Polytope::from_text(&lines.rest())?;
        if polytope.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: polytope.dim(),
            });
        }
        Ok(Instance {
            objective,
            polytope,
            minimizer: None,
        })
    }
}

/// Non-blank, non-comment lines with their 1-based numbers.
struct Cursor<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        Cursor { lines, pos: 0 }
    }

    fn error(&self, line: usize, message: &str) -> Error {
        Error::Parse {
            path: "<instance>".into(),
            line,
            message: message.into(),
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let item = self
            .lines
            .get(self.pos)
            .copied()
            .ok_or_else(|| self.error(0, &format!("truncated before {what}")))?;
        self.pos += 1;
        Ok(item)
    }

    fn tag(&mut self, tag: &str) -> Result<()> {
        let (ln, t) = self.next(tag)?;
        if t != tag {
            return Err(self.error(ln, &format!("expected `{tag}`")));
        }
        Ok(())
    }

    fn row(&mut self, what: &str, len: usize) -> Result<Vec<f64>> {
        let (ln, l) = self.next(what)?;
        parse_numbers(l, len).map_err(|e| self.error(ln, &e))
    }

    fn vector(&mut self, tag: &str, len: usize) -> Result<Vec<f64>> {
        self.tag(tag)?;
        self.row(tag, len)
    }

    fn matrix(&mut self, tag: &str, n: usize) -> Result<DMatrix<f64>> {
        self.tag(tag)?;
        let mut mat = DMatrix::zeros(n, n);
        for i in 0..n {
            for (j, v) in self.row(tag, n)?.into_iter().enumerate() {
                mat[(i, j)] = v;
            }
        }
        Ok(mat)
    }

    fn rest(&self) -> String {
        self.lines[self.pos..]
            .iter()
            .map(|(_, l)| *l)
            .collect::<Vec<_>>()
            .join("\n")
    }
}
