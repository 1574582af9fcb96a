use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::Polytope;

/// Undirected weighted graph; every edge is stored once with `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    /// Self-loops dropped while building the graph.
    pub dropped_self_loops: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexBase {
    Zero,
    One,
    /// One-based if no index 0 appears, else zero-based.
    #[default]
    Auto,
}

impl WeightedGraph {
    /// Symmetrizes, sums duplicate edges and drops self-loops. `n` is
    /// raised to cover every endpoint.
    pub fn from_edges(n: usize, raw: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut loops = 0;
        let mut n = n;
        for (i, j, w) in raw {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidInput(format!("edge weight {w} must be finite and >= 0")));
            }
            n = n.max(i + 1).max(j + 1);
            if i == j {
                loops += 1;
                continue;
            }
            *merged.entry((i.min(j), i.max(j))).or_insert(0.0) += w;
        }
        Ok(WeightedGraph {
            n,
            edges: merged.into_iter().map(|((i, j), w)| (i, j, w)).collect(),
            dropped_self_loops: loops,
        })
    }

    /// Erdős–Rényi graph with edge probability `edge_prob` and weights
    /// uniform in `(0, 1]`.
    pub fn random<R: Rng + ?Sized>(n: usize, edge_prob: f64, rng: &mut R) -> Result<Self> {
        if !(0.0..=1.0).contains(&edge_prob) {
            return Err(Error::InvalidInput(format!("edge probability {edge_prob} outside [0,1]")));
        }
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen::<f64>() < edge_prob {
                    edges.push((i, j, 1.0 - rng.gen::<f64>()));
                }
            }
        }
        Ok(WeightedGraph {
            n,
            edges,
            dropped_self_loops: 0,
        })
    }

    pub fn parse(text: &str, base: IndexBase, origin: &str) -> Result<Self> {
        let mut raw = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
                continue;
            }
            let bad = |message: String| Error::Parse {
                path: origin.to_string(),
                line: lineno + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if !(2..=3).contains(&fields.len()) {
                return Err(bad(format!("expected `i j [w]`, found {} fields", fields.len())));
            }
            let i: usize = fields[0].parse().map_err(|_| bad(format!("bad vertex `{}`", fields[0])))?;
            let j: usize = fields[1].parse().map_err(|_| bad(format!("bad vertex `{}`", fields[1])))?;
            let w: f64 = match fields.get(2) {
                Some(s) => s.parse().map_err(|_| bad(format!("bad weight `{s}`")))?,
                None => 1.0,
            };
            if !(w >= 0.0 && w.is_finite()) {
                return Err(bad(format!("weight {w} must be finite and >= 0")));
            }
            raw.push((i, j, w, lineno + 1));
        }
        if raw.is_empty() {
            return Err(Error::InvalidInput(format!("{origin}: graph has no edges")));
        }
        let has_zero = raw.iter().any(|&(i, j, _, _)| i == 0 || j == 0);
        let shift = match base {
            IndexBase::Zero => 0,
            IndexBase::One => 1,
            IndexBase::Auto => usize::from(!has_zero),
        };
        if let Some(&(_, _, _, line)) = raw.iter().find(|&&(i, j, _, _)| i < shift || j < shift) {
            return Err(Error::Parse {
                path: origin.to_string(),
                line,
                message: "vertex 0 in a one-based edge list".into(),
            });
        }
        Self::from_edges(0, raw.into_iter().map(|(i, j, w, _)| (i - shift, j - shift, w)))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(i, j, _)| i == v || j == v).count()
    }
}

/// Reads a whitespace-separated edge list `i j [w]`.
pub fn load_graph(path: &Path, base: IndexBase) -> Result<WeightedGraph> {
    let text = std::fs::read_to_string(path)?;
    WeightedGraph::parse(&text, base, &path.display().to_string())
}

/// `(general, down_closed)`: `{0.25 ≤ Σx ≤ 1}` and `{Σx ≤ 1}`, both with
/// box `[0, 1]^n`.
pub fn revenue_polytopes(n: usize) -> Result<(Polytope, Polytope)> {
    if n == 0 {
        return Err(Error::InvalidInput("revenue polytopes need n >= 1".into()));
    }
    let general = Polytope::new(
        DMatrix::from_fn(2, n, |i, _| if i == 0 { 1.0 } else { -1.0 }),
        vec![1.0, -0.25],
        vec![1.0; n],
    )?;
    let down = Polytope::new(DMatrix::from_element(1, n, 1.0), vec![1.0], vec![1.0; n])?;
    Ok((general, down))
}
