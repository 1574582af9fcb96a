use std::sync::Arc;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::graph::WeightedGraph;
use crate::algorithms::OnlineStream;
use crate::error::{Error, Result};
use crate::objectives::{Objective, RevenueObjective};
use crate::seed::derive_seed;

/// Revenue over a fresh uniformly sampled vertex batch each round.
///
/// Round `t` draws `V^t` from a generator seeded by
/// `derive_seed(seed, "batch", t)`, so any round can be replayed on its
/// own. Edge weights are 1 when both endpoints are in `V^t` and 0
/// otherwise.
pub struct BatchStream {
    graph: Arc<WeightedGraph>,
    batch_vertices: usize,
    horizon: usize,
    p: f64,
    seed: u64,
}

impl BatchStream {
    pub fn new(
        graph: Arc<WeightedGraph>,
        batch_vertices: usize,
        horizon: usize,
        p: f64,
        seed: u64,
    ) -> Result<Self> {
        if batch_vertices > graph.n {
            return Err(Error::InvalidInput(format!(
                "batch of {batch_vertices} vertices from a graph with {}",
                graph.n
            )));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidInput(format!("p must lie in (0,1), got {p}")));
        }
        Ok(BatchStream {
            graph,
            batch_vertices,
            horizon,
            p,
            seed,
        })
    }

    /// Membership mask of `V^t`.
    pub fn batch(&self, t: usize) -> Vec<bool> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, "batch", t as u64));
        let mut mask = vec![false; self.graph.n];
        for v in sample(&mut rng, self.graph.n, self.batch_vertices) {
            mask[v] = true;
        }
        mask
    }

    fn check_round(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.horizon {
            return Err(Error::InvalidInput(format!("round {t} outside 1..={}", self.horizon)));
        }
        Ok(())
    }
}

impl OnlineStream for BatchStream {
    fn dim(&self) -> usize {
        self.graph.n
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn objective_at(&self, t: usize) -> Result<Arc<dyn Objective>> {
        self.check_round(t)?;
        let mask = self.batch(t);
        let edges = self
            .graph
            .edges
            .iter()
            .filter(|&&(i, j, _)| mask[i] && mask[j])
            .map(|&(i, j, _)| (i, j, 1.0))
            .collect();
        Ok(Arc::new(RevenueObjective::new(self.graph.n, edges, self.p)?))
    }

    /// Revenue is linear in the weights, so the average is a single
    /// revenue objective with weights `#{t : i, j ∈ V^t} / T`.
    fn average_objective(&self) -> Result<Arc<dyn Objective>> {
        let mut counts = vec![0usize; self.graph.edges.len()];
        for t in 1..=self.horizon {
            let mask = self.batch(t);
            for (c, &(i, j, _)) in counts.iter_mut().zip(&self.graph.edges) {
                if mask[i] && mask[j] {
                    *c += 1;
                }
            }
        }
        let t = self.horizon.max(1) as f64;
        let edges = self
            .graph
            .edges
            .iter()
            .zip(&counts)
            .filter(|(_, &c)| c > 0)
            .map(|(&(i, j, _), &c)| (i, j, c as f64 / t))
            .collect();
        Ok(Arc::new(RevenueObjective::new(self.graph.n, edges, self.p)?))
    }
}
