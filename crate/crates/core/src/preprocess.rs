//! Burst detection and node filtering.
//!
//! An hour is *active* when its count exceeds `μ + n·σ` of the series it
//! belongs to (population standard deviation over the same window). The
//! burstiness of a series is its number of active hours.
//!
//! The decision is computed exactly: with `T` samples, sum `S` and sum of
//! squares `Q`, `x > μ + nσ` is equivalent to `T·x − S > n·√(T·Q − S²)`,
//! whose integer sides never round. Scaling or shifting a series therefore
//! never flips a decision.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exact;
use crate::graph::{TemporalGraph, TimeWindow};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BurstConfig {
    /// Activity rate multiplier on σ.
    pub n: f64,
    /// Nodes with burstiness `<=` this are discarded.
    pub min_burstiness: u32,
}

impl Default for BurstConfig {
    fn default() -> Self {
        BurstConfig {
            n: 5.0,
            min_burstiness: 5,
        }
    }
}

impl BurstConfig {
    pub fn validate(&self) -> Result<()> {
        check_n(self.n)
    }
}

fn check_n(n: f64) -> Result<()> {
    if n.is_finite() && n > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "activity multiplier n must be finite and > 0, got {n}"
        )))
    }
}

/// Integer moments of a series: `(T, S, D = T·Q − S²)`.
#[derive(Clone, Copy, Debug)]
struct Moments {
    len: u128,
    sum: u128,
    spread: u128,
}

impl Moments {
    fn of(x: &[u32]) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Range(
                "activity of an empty series is undefined".into(),
            ));
        }
        let (mut sum, mut sq) = (0u128, 0u128);
        for &v in x {
            sum += v as u128;
            sq += (v as u128) * (v as u128);
        }
        let len = x.len() as u128;
        Ok(Moments {
            len,
            sum,
            spread: len * sq - sum * sum,
        })
    }

    #[inline]
    fn active(&self, v: u32, n: f64) -> bool {
        let d = (self.len * v as u128) as i128 - self.sum as i128;
        exact::exceeds(d, self.spread, n)
    }
}

/// `μ + n·σ` in floating point, for reporting. The decision itself is exact.
pub fn activity_threshold(x: &[u32], n: f64) -> Result<f64> {
    let m = Moments::of(x)?;
    let len = m.len as f64;
    let mean = m.sum as f64 / len;
    let sigma = libm::sqrt(m.spread as f64) / len;
    Ok(mean + n * sigma)
}

/// `k[t] = 1` iff `x[t] > μ + n·σ`.
pub fn activity_indicator(x: &[u32], n: f64) -> Result<Vec<bool>> {
    check_n(n)?;
    let m = Moments::of(x)?;
    Ok(x.iter().map(|&v| m.active(v, n)).collect())
}

/// Number of active hours.
pub fn burstiness(x: &[u32], n: f64) -> Result<usize> {
    check_n(n)?;
    let m = Moments::of(x)?;
    Ok(x.iter().filter(|&&v| m.active(v, n)).count())
}

/// Per-node survival flags under `cfg` for the whole horizon.
/// A zero-length horizon has no bursts.
pub fn bursty_nodes(graph: &TemporalGraph, cfg: &BurstConfig) -> Result<Vec<bool>> {
    cfg.validate()?;
    Ok((0..graph.node_count())
        .map(|i| {
            let row = graph.row(i);
            !row.is_empty() && burstiness(row, cfg.n).unwrap_or(0) > cfg.min_burstiness as usize
        })
        .collect())
}

/// Keep nodes with burstiness strictly above `cfg.min_burstiness`.
pub fn filter_bursty(graph: &TemporalGraph, cfg: &BurstConfig) -> Result<TemporalGraph> {
    let keep = bursty_nodes(graph, cfg)?;
    Ok(graph.induced_subgraph(&keep)?.0)
}

/// Keep nodes that pass the burstiness filter in at least one of `windows`,
/// each window evaluated with its own mean and deviation.
pub fn filter_bursty_union(
    graph: &TemporalGraph,
    cfg: &BurstConfig,
    windows: &[TimeWindow],
) -> Result<TemporalGraph> {
    cfg.validate()?;
    let mut keep = alloc::vec![false; graph.node_count()];
    for w in windows {
        if w.end_hour() > graph.horizon() {
            return Err(Error::Range(format!(
                "window ending at {} exceeds horizon {}",
                w.end_hour(),
                graph.horizon()
            )));
        }
        for (i, k) in keep.iter_mut().enumerate() {
            if !*k {
                let b = burstiness(&graph.row(i)[w.range()], cfg.n)?;
                *k = b > cfg.min_burstiness as usize;
            }
        }
    }
    Ok(graph.induced_subgraph(&keep)?.0)
}

/// Keep nodes whose peak hourly count is strictly above `threshold`.
pub fn filter_min_visits(graph: &TemporalGraph, threshold: u32) -> TemporalGraph {
    let keep: Vec<bool> = (0..graph.node_count())
        .map(|i| graph.row(i).iter().any(|&v| v > threshold))
        .collect();
    graph
        .induced_subgraph(&keep)
        .expect("keep flags match node count")
        .0
}
