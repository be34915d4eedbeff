//! Hebbian edge learning.
//!
//! Every existing edge accumulates, hour by hour, the visit-count similarity
//! of its endpoints whenever that similarity exceeds `lambda`. No edge is
//! ever created; weights start at zero and are never normalized or decayed.
//!
//! Each edge sums its hours in ascending order, so the result does not depend
//! on how edges are scheduled across workers.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::TemporalGraph;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LearnConfig {
    /// Similarity threshold in `[0, 1]`; deltas at exactly `lambda` are dropped.
    pub lambda: f64,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig { lambda: 0.5 }
    }
}

impl LearnConfig {
    pub fn validate(&self) -> Result<()> {
        if (0.0..=1.0).contains(&self.lambda) {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "lambda must lie in [0, 1], got {}",
                self.lambda
            )))
        }
    }
}

/// `min(a, b) / max(a, b)`, and 0 when both are 0.
#[inline]
pub fn similarity(a: u32, b: u32) -> f64 {
    if a == 0 && b == 0 {
        0.0
    } else {
        a.min(b) as f64 / a.max(b) as f64
    }
}

#[inline]
pub fn weight_delta(a: u32, b: u32, lambda: f64) -> f64 {
    let s = similarity(a, b);
    if s > lambda {
        s
    } else {
        0.0
    }
}

/// Accumulated weight for one pair of aligned series.
pub fn pair_weight(xa: &[u32], xb: &[u32], lambda: f64) -> f64 {
    let mut w = 0.0;
    for (&a, &b) in xa.iter().zip(xb) {
        w += weight_delta(a, b, lambda);
    }
    w
}

/// Weights for the edge slice `first..first + out.len()`.
fn learn_into(graph: &TemporalGraph, lambda: f64, first: usize, out: &mut [f64]) {
    let edges = &graph.edges()[first..first + out.len()];
    for (slot, &(a, b)) in out.iter_mut().zip(edges) {
        *slot = pair_weight(graph.row(a.index()), graph.row(b.index()), lambda);
    }
}

/// Learned weights parallel to `graph.edges()`.
pub fn learn_weights(graph: &TemporalGraph, cfg: &LearnConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let mut w = alloc::vec![0.0; graph.edge_count()];
    learn_into(graph, cfg.lambda, 0, &mut w);
    Ok(w)
}

/// Copy of `graph` with every edge weight learned from scratch.
pub fn learn(graph: &TemporalGraph, cfg: &LearnConfig) -> Result<TemporalGraph> {
    let w = learn_weights(graph, cfg)?;
    graph.clone().with_weights(w)
}

/// As [`learn_weights`], split over `threads` scoped workers.
/// Workers write disjoint weight slots; output is identical for any count.
#[cfg(feature = "std")]
pub fn learn_weights_parallel(
    graph: &TemporalGraph,
    cfg: &LearnConfig,
    threads: usize,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let threads = threads.max(1);
    let mut w = alloc::vec![0.0; graph.edge_count()];
    if threads == 1 || w.len() < 2 {
        learn_into(graph, cfg.lambda, 0, &mut w);
        return Ok(w);
    }
    let chunk = w.len().div_ceil(threads);
    std::thread::scope(|s| {
        for (k, part) in w.chunks_mut(chunk).enumerate() {
            s.spawn(move || learn_into(graph, cfg.lambda, k * chunk, part));
        }
    });
    Ok(w)
}

#[cfg(feature = "std")]
pub fn learn_parallel(
    graph: &TemporalGraph,
    cfg: &LearnConfig,
    threads: usize,
) -> Result<TemporalGraph> {
    let w = learn_weights_parallel(graph, cfg, threads)?;
    graph.clone().with_weights(w)
}
