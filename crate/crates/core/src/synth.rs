//! Planted-cluster temporal graphs with known ground truth.
//!
//! Topology is a planted partition: pairs inside a cluster connect with
//! probability `p_in`, every other pair with `p_out`. Each cluster has one
//! event window. During it, each member is independently active each hour
//! with probability `participation`, drawing Poisson(`amplitude`) visits;
//! all other hours draw Poisson(`baseline`). Members may also get isolated
//! single-hour spikes away from their event.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, HourStamp, NodeId, TemporalGraph, TimeWindow};

/// 2014-09-23T02:00Z in hours since the Unix epoch.
pub const DEFAULT_START: HourStamp = HourStamp(392_066);

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SynthConfig {
    pub n_nodes: usize,
    pub n_clusters: usize,
    pub cluster_size: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub horizon: usize,
    pub event_len: usize,
    /// One start hour per cluster; empty spreads events evenly over the horizon.
    pub event_starts: Vec<usize>,
    pub participation: f64,
    pub baseline: f64,
    pub amplitude: f64,
    /// Single-hour spikes per member, placed outside `[start, start + event_guard)`
    /// of the member's event.
    pub isolated_spikes: usize,
    pub event_guard: usize,
    pub start: HourStamp,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_nodes: 100,
            n_clusters: 3,
            cluster_size: 20,
            p_in: 0.3,
            p_out: 0.01,
            horizon: 744,
            event_len: 12,
            event_starts: Vec::new(),
            participation: 1.0,
            baseline: 0.01,
            amplitude: 200.0,
            isolated_spikes: 0,
            event_guard: 72,
            start: DEFAULT_START,
            seed: 0,
        }
    }
}

fn unit(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")))
    }
}

impl SynthConfig {
    /// Event window of every cluster.
    pub fn event_windows(&self) -> Result<Vec<TimeWindow>> {
        let starts: Vec<usize> = if self.event_starts.is_empty() {
            let slot = self.horizon / self.n_clusters.max(1);
            if self.event_len > slot {
                return Err(Error::Config(format!(
                    "{} events of {} hours do not fit in {} hours",
                    self.n_clusters, self.event_len, self.horizon
                )));
            }
            (0..self.n_clusters)
                .map(|c| c * slot + (slot - self.event_len) / 2)
                .collect()
        } else {
            if self.event_starts.len() != self.n_clusters {
                return Err(Error::Config(format!(
                    "{} event starts for {} clusters",
                    self.event_starts.len(),
                    self.n_clusters
                )));
            }
            self.event_starts.clone()
        };
        starts
            .into_iter()
            .map(|s| {
                let w = TimeWindow::new(s, s + self.event_len)?;
                if w.end_hour() > self.horizon {
                    return Err(Error::Config(format!(
                        "event [{s}, {}) exceeds horizon {}",
                        w.end_hour(),
                        self.horizon
                    )));
                }
                Ok(w)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        unit("p_in", self.p_in)?;
        unit("p_out", self.p_out)?;
        unit("participation", self.participation)?;
        if self.p_in <= self.p_out {
            return Err(Error::Config(format!(
                "p_in ({}) must exceed p_out ({})",
                self.p_in, self.p_out
            )));
        }
        if self.n_clusters == 0 || self.cluster_size == 0 {
            return Err(Error::Config("need at least one non-empty cluster".into()));
        }
        if self.n_clusters * self.cluster_size > self.n_nodes {
            return Err(Error::Config(format!(
                "{} clusters of {} exceed {} nodes",
                self.n_clusters, self.cluster_size, self.n_nodes
            )));
        }
        if self.event_len == 0 {
            return Err(Error::Config("event_len must be at least 1".into()));
        }
        if !(self.baseline >= 0.0 && self.baseline.is_finite()) {
            return Err(Error::Config(format!(
                "baseline must be finite and >= 0, got {}",
                self.baseline
            )));
        }
        if !(self.amplitude >= self.baseline && self.amplitude.is_finite()) {
            return Err(Error::Config(format!(
                "amplitude ({}) must be finite and at least the baseline ({})",
                self.amplitude, self.baseline
            )));
        }
        self.event_windows()?;
        Ok(())
    }
}

/// Planted assignment and event window per cluster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundTruth {
    /// Cluster of each node; `None` for background nodes.
    pub membership: Vec<Option<u32>>,
    pub events: Vec<TimeWindow>,
}

impl GroundTruth {
    pub fn members(&self, cluster: u32) -> Vec<NodeId> {
        self.membership
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == Some(cluster))
            .map(|(i, _)| NodeId(i as u32))
            .collect()
    }

    pub fn cluster_count(&self) -> usize {
        self.events.len()
    }
}

/// Poisson draw by Knuth's product method, in chunks of mean ≤ 16.
fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u32 {
    if mean <= 0.0 {
        return 0;
    }
    let chunks = libm::ceil(mean / 16.0).max(1.0);
    let part = mean / chunks;
    let limit = libm::exp(-part);
    let mut total = 0u32;
    for _ in 0..chunks as usize {
        let mut p: f64 = rng.random();
        while p > limit {
            total += 1;
            p *= rng.random::<f64>();
        }
    }
    total
}

pub fn generate(cfg: &SynthConfig) -> Result<(TemporalGraph, GroundTruth)> {
    cfg.validate()?;
    let events = cfg.event_windows()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n_nodes;
    let membership: Vec<Option<u32>> = (0..n)
        .map(|i| (i < cfg.n_clusters * cfg.cluster_size).then(|| (i / cfg.cluster_size) as u32))
        .collect();

    let mut series = vec![0u32; n * cfg.horizon];
    for (i, m) in membership.iter().enumerate() {
        let row = &mut series[i * cfg.horizon..(i + 1) * cfg.horizon];
        let event = m.map(|c| events[c as usize]);
        for (t, x) in row.iter_mut().enumerate() {
            let hot =
                event.is_some_and(|e| e.contains(t)) && rng.random::<f64>() < cfg.participation;
            *x = poisson(&mut rng, if hot { cfg.amplitude } else { cfg.baseline });
        }
        if let Some(e) = event {
            let guard = e.start_hour()..e.start_hour() + cfg.event_guard.max(e.len());
            let free = cfg.horizon - guard.end.min(cfg.horizon) + guard.start;
            for _ in 0..cfg.isolated_spikes.min(free) {
                let mut k = rng.random_range(0..free);
                if k >= guard.start {
                    k += guard.end - guard.start;
                }
                row[k] = row[k].max(poisson(&mut rng, cfg.amplitude));
            }
        }
    }

    let mut b = GraphBuilder::new(cfg.start, cfg.horizon);
    for i in 0..n {
        b.add_node(
            format!("page_{i:05}"),
            &series[i * cfg.horizon..(i + 1) * cfg.horizon],
        )?;
    }
    for i in 0..n {
        for j in i + 1..n {
            let p = match (membership[i], membership[j]) {
                (Some(a), Some(c)) if a == c => cfg.p_in,
                _ => cfg.p_out,
            };
            if rng.random::<f64>() < p {
                b.add_edge(NodeId(i as u32), NodeId(j as u32))?;
            }
        }
    }
    Ok((b.build(), GroundTruth { membership, events }))
}
