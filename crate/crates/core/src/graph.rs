//! The temporal graph data model.
//!
//! Nodes are dense ids `0..N` with unique labels and a fixed-length hourly
//! series each. Edges are unordered pairs stored once with `a < b`, sorted
//! lexicographically, and carry a nonnegative weight. A CSR index over the
//! edge list gives neighbor lookup in ascending neighbor order.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Absolute time at hour resolution: hours since 1970-01-01T00:00Z.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HourStamp(pub i64);

impl HourStamp {
    pub fn offset(self, hours: i64) -> Self {
        HourStamp(self.0 + hours)
    }
}

/// Visits per hour, starting at `start`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimeSeries {
    pub values: Vec<u32>,
    pub start: HourStamp,
}

impl TimeSeries {
    pub fn zeros(start: HourStamp, len: usize) -> Self {
        TimeSeries {
            values: vec![0; len],
            start,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Half-open range of hour offsets `[start_hour, end_hour)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeWindow {
    start_hour: usize,
    end_hour: usize,
}

impl TimeWindow {
    pub fn new(start_hour: usize, end_hour: usize) -> Result<Self> {
        if end_hour <= start_hour {
            return Err(Error::Range(format!(
                "window [{start_hour}, {end_hour}) is empty or reversed"
            )));
        }
        Ok(TimeWindow {
            start_hour,
            end_hour,
        })
    }

    pub fn start_hour(&self) -> usize {
        self.start_hour
    }

    pub fn end_hour(&self) -> usize {
        self.end_hour
    }

    pub fn len(&self) -> usize {
        self.end_hour - self.start_hour
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, hour: usize) -> bool {
        (self.start_hour..self.end_hour).contains(&hour)
    }

    pub fn range(&self) -> core::ops::Range<usize> {
        self.start_hour..self.end_hour
    }

    /// Clamp to `[0, horizon)`; `None` when nothing is left.
    pub fn clamp(&self, horizon: usize) -> Option<TimeWindow> {
        let end = self.end_hour.min(horizon);
        (end > self.start_hour).then_some(TimeWindow {
            start_hour: self.start_hour,
            end_hour: end,
        })
    }
}

/// Old-id to new-id table produced by re-indexing operations.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdMapping {
    pub old_to_new: Vec<Option<NodeId>>,
    pub new_to_old: Vec<NodeId>,
}

impl IdMapping {
    fn from_keep(keep: &[bool]) -> Self {
        let mut old_to_new = Vec::with_capacity(keep.len());
        let mut new_to_old = Vec::new();
        for (old, &k) in keep.iter().enumerate() {
            if k {
                old_to_new.push(Some(NodeId(new_to_old.len() as u32)));
                new_to_old.push(NodeId(old as u32));
            } else {
                old_to_new.push(None);
            }
        }
        IdMapping {
            old_to_new,
            new_to_old,
        }
    }

    pub fn new_id(&self, old: NodeId) -> Option<NodeId> {
        self.old_to_new.get(old.index()).copied().flatten()
    }

    pub fn old_id(&self, new: NodeId) -> Option<NodeId> {
        self.new_to_old.get(new.index()).copied()
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &IdMapping) -> IdMapping {
        let old_to_new = self
            .old_to_new
            .iter()
            .map(|m| m.and_then(|mid| next.new_id(mid)))
            .collect();
        let new_to_old = next
            .new_to_old
            .iter()
            .map(|&mid| self.new_to_old[mid.index()])
            .collect();
        IdMapping {
            old_to_new,
            new_to_old,
        }
    }
}

/// Incremental construction by label.
#[derive(Clone, Debug)]
pub struct GraphBuilder {
    start: HourStamp,
    horizon: usize,
    labels: Vec<String>,
    index: BTreeMap<String, u32>,
    series: Vec<u32>,
    edges: BTreeSet<(u32, u32)>,
}

impl GraphBuilder {
    pub fn new(start: HourStamp, horizon: usize) -> Self {
        GraphBuilder {
            start,
            horizon,
            labels: Vec::new(),
            index: BTreeMap::new(),
            series: Vec::new(),
            edges: BTreeSet::new(),
        }
    }

    pub fn add_node(&mut self, label: impl Into<String>, values: &[u32]) -> Result<NodeId> {
        let label = label.into();
        if values.len() != self.horizon {
            return Err(Error::shape(
                format!("series of length {}", self.horizon),
                values.len(),
            ));
        }
        if self.index.contains_key(&label) {
            return Err(Error::DuplicateLabel(label));
        }
        let id = self.labels.len() as u32;
        self.index.insert(label.clone(), id);
        self.labels.push(label);
        self.series.extend_from_slice(values);
        Ok(NodeId(id))
    }

    pub fn node_id(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).map(|&i| NodeId(i))
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Returns `false` if the pair was already present (in either direction).
    pub fn add_edge(&mut self, a: NodeId, b: NodeId) -> Result<bool> {
        let n = self.labels.len() as u32;
        for id in [a, b] {
            if id.0 >= n {
                return Err(Error::NodeNotFound(id.0));
            }
        }
        if a == b {
            return Err(Error::SelfLoop(a.0));
        }
        Ok(self.edges.insert((a.0.min(b.0), a.0.max(b.0))))
    }

    pub fn build(self) -> TemporalGraph {
        let edges: Vec<(NodeId, NodeId)> = self
            .edges
            .into_iter()
            .map(|(a, b)| (NodeId(a), NodeId(b)))
            .collect();
        let weights = vec![0.0; edges.len()];
        TemporalGraph::assemble(
            self.labels,
            self.index,
            self.start,
            self.horizon,
            self.series,
            edges,
            weights,
        )
    }
}

/// Undirected graph with per-node hourly series and per-edge weights.
#[derive(Clone, Debug, PartialEq)]
pub struct TemporalGraph {
    labels: Vec<String>,
    index: BTreeMap<String, u32>,
    start: HourStamp,
    horizon: usize,
    series: Vec<u32>,
    edges: Vec<(NodeId, NodeId)>,
    weights: Vec<f64>,
    offsets: Vec<usize>,
    // (neighbor, edge index), ascending neighbor within each row
    adjacency: Vec<(u32, u32)>,
}

impl TemporalGraph {
    /// Build from raw parts, validating every structural invariant.
    ///
    /// `series` is row-major `labels.len() × horizon`. Edges may come in
    /// either orientation but must be unique as unordered pairs.
    pub fn from_parts(
        labels: Vec<String>,
        start: HourStamp,
        horizon: usize,
        series: Vec<u32>,
        edges: Vec<(NodeId, NodeId)>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let n = labels.len();
        if series.len() != n * horizon {
            return Err(Error::shape(
                format!("{} series values", n * horizon),
                series.len(),
            ));
        }
        if weights.len() != edges.len() {
            return Err(Error::shape(
                format!("{} weights", edges.len()),
                weights.len(),
            ));
        }
        let mut index = BTreeMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i as u32).is_some() {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        let mut pairs: Vec<((NodeId, NodeId), f64)> = Vec::with_capacity(edges.len());
        for (&(a, b), &w) in edges.iter().zip(&weights) {
            if a.index() >= n || b.index() >= n {
                return Err(Error::NodeNotFound(a.0.max(b.0)));
            }
            if a == b {
                return Err(Error::SelfLoop(a.0));
            }
            check_weight(w)?;
            pairs.push(((a.min(b), a.max(b)), w));
        }
        pairs.sort_by_key(|x| x.0);
        if let Some(d) = pairs.windows(2).find(|p| p[0].0 == p[1].0) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge {}-{}",
                (d[0].0).0,
                (d[0].0).1
            )));
        }
        let (edges, weights) = pairs.into_iter().unzip();
        Ok(Self::assemble(
            labels, index, start, horizon, series, edges, weights,
        ))
    }

    fn assemble(
        labels: Vec<String>,
        index: BTreeMap<String, u32>,
        start: HourStamp,
        horizon: usize,
        series: Vec<u32>,
        edges: Vec<(NodeId, NodeId)>,
        weights: Vec<f64>,
    ) -> Self {
        let n = labels.len();
        let mut degree = vec![0usize; n];
        for &(a, b) in &edges {
            degree[a.index()] += 1;
            degree[b.index()] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut adjacency = vec![(0u32, 0u32); offsets[n]];
        for (e, &(a, b)) in edges.iter().enumerate() {
            adjacency[cursor[a.index()]] = (b.0, e as u32);
            cursor[a.index()] += 1;
            adjacency[cursor[b.index()]] = (a.0, e as u32);
            cursor[b.index()] += 1;
        }
        for i in 0..n {
            adjacency[offsets[i]..offsets[i + 1]].sort_unstable_by_key(|&(j, _)| j);
        }
        TemporalGraph {
            labels,
            index,
            start,
            horizon,
            series,
            edges,
            weights,
            offsets,
            adjacency,
        }
    }

    pub fn empty(start: HourStamp, horizon: usize) -> Self {
        GraphBuilder::new(start, horizon).build()
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn start(&self) -> HourStamp {
        self.start
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, node: NodeId) -> Result<&str> {
        self.labels
            .get(node.index())
            .map(String::as_str)
            .ok_or(Error::NodeNotFound(node.0))
    }

    pub fn node_id(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).map(|&i| NodeId(i))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.labels.len() as u32).map(NodeId)
    }

    pub fn series(&self, node: NodeId) -> Result<&[u32]> {
        self.check(node)?;
        Ok(self.row(node.index()))
    }

    /// Series of node `i`. Panics if out of range.
    #[inline]
    pub fn row(&self, i: usize) -> &[u32] {
        &self.series[i * self.horizon..(i + 1) * self.horizon]
    }

    /// Row-major `N × horizon` series block.
    pub fn series_block(&self) -> &[u32] {
        &self.series
    }

    pub fn time_series(&self, node: NodeId) -> Result<TimeSeries> {
        Ok(TimeSeries {
            values: self.series(node)?.to_vec(),
            start: self.start,
        })
    }

    /// Edges as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    /// Weights parallel to [`edges`](Self::edges).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn edge_index(&self, a: NodeId, b: NodeId) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edges.binary_search(&key).ok()
    }

    pub fn edge_weight(&self, a: NodeId, b: NodeId) -> Option<f64> {
        self.edge_index(a, b).map(|e| self.weights[e])
    }

    /// Adjacent nodes with current weights, ascending by neighbor id.
    pub fn neighbors(&self, node: NodeId) -> Result<Vec<(NodeId, f64)>> {
        self.check(node)?;
        Ok(self
            .adjacent(node.index())
            .map(|(j, w)| (NodeId(j as u32), w))
            .collect())
    }

    /// Unchecked neighbor iteration for hot loops. Panics if `i` is out of range.
    #[inline]
    pub fn adjacent(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.adjacency[self.offsets[i]..self.offsets[i + 1]]
            .iter()
            .map(move |&(j, e)| (j as usize, self.weights[e as usize]))
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.offsets[node.index() + 1] - self.offsets[node.index()]
    }

    pub fn weighted_degree(&self, node: NodeId) -> f64 {
        self.adjacent(node.index()).map(|(_, w)| w).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Replace all weights. Weights must be finite and nonnegative.
    pub fn set_weights(&mut self, weights: Vec<f64>) -> Result<()> {
        if weights.len() != self.edges.len() {
            return Err(Error::shape(
                format!("{} weights", self.edges.len()),
                weights.len(),
            ));
        }
        for &w in &weights {
            check_weight(w)?;
        }
        self.weights = weights;
        Ok(())
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        self.set_weights(weights)?;
        Ok(self)
    }

    pub fn with_uniform_weights(&self, w: f64) -> Result<Self> {
        self.clone().with_weights(vec![w; self.edges.len()])
    }

    pub fn reset_weights(&mut self) {
        self.weights.iter_mut().for_each(|w| *w = 0.0);
    }

    /// Truncate every series to `window`; edges are kept, weights reset to 0.
    pub fn slice_window(&self, window: TimeWindow) -> Result<Self> {
        if window.end_hour() > self.horizon {
            return Err(Error::Range(format!(
                "window [{}, {}) exceeds horizon {}",
                window.start_hour(),
                window.end_hour(),
                self.horizon
            )));
        }
        let len = window.len();
        let mut series = Vec::with_capacity(self.node_count() * len);
        for i in 0..self.node_count() {
            series.extend_from_slice(&self.row(i)[window.range()]);
        }
        Ok(TemporalGraph {
            labels: self.labels.clone(),
            index: self.index.clone(),
            start: self.start.offset(window.start_hour() as i64),
            horizon: len,
            series,
            edges: self.edges.clone(),
            weights: vec![0.0; self.edges.len()],
            offsets: self.offsets.clone(),
            adjacency: self.adjacency.clone(),
        })
    }

    /// Induced subgraph on the nodes with `keep[i]`, re-indexed densely in
    /// ascending old-id order. Series and weights are carried over.
    pub fn induced_subgraph(&self, keep: &[bool]) -> Result<(Self, IdMapping)> {
        if keep.len() != self.node_count() {
            return Err(Error::shape(
                format!("{} keep flags", self.node_count()),
                keep.len(),
            ));
        }
        Ok(self.subgraph_where(keep, |_| true))
    }

    fn subgraph_where(
        &self,
        keep: &[bool],
        keep_edge: impl Fn(usize) -> bool,
    ) -> (Self, IdMapping) {
        let map = IdMapping::from_keep(keep);
        let mut labels = Vec::with_capacity(map.new_to_old.len());
        let mut index = BTreeMap::new();
        let mut series = Vec::with_capacity(map.new_to_old.len() * self.horizon);
        for (new, &old) in map.new_to_old.iter().enumerate() {
            let l = self.labels[old.index()].clone();
            index.insert(l.clone(), new as u32);
            labels.push(l);
            series.extend_from_slice(self.row(old.index()));
        }
        let mut edges = Vec::new();
        let mut weights = Vec::new();
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            if let (Some(na), Some(nb)) = (map.new_id(a), map.new_id(b)) {
                if keep_edge(e) {
                    // monotone re-indexing preserves the (a, b) sort order
                    edges.push((na, nb));
                    weights.push(self.weights[e]);
                }
            }
        }
        let g = Self::assemble(
            labels,
            index,
            self.start,
            self.horizon,
            series,
            edges,
            weights,
        );
        (g, map)
    }

    /// Drop zero-weight edges, then nodes left without edges, then connected
    /// components with fewer than `min_component_size` nodes.
    pub fn prune(&self, min_component_size: usize) -> (Self, IdMapping) {
        let n = self.node_count();
        let positive = |e: usize| self.weights[e] > 0.0;
        let mut dsu = DisjointSets::new(n);
        let mut has_edge = vec![false; n];
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            if positive(e) {
                dsu.union(a.index(), b.index());
                has_edge[a.index()] = true;
                has_edge[b.index()] = true;
            }
        }
        let mut comp_size = vec![0usize; n];
        for i in 0..n {
            comp_size[dsu.find(i)] += 1;
        }
        let keep: Vec<bool> = (0..n)
            .map(|i| has_edge[i] && comp_size[dsu.find(i)] >= min_component_size)
            .collect();
        self.subgraph_where(&keep, positive)
    }

    fn check(&self, node: NodeId) -> Result<()> {
        if node.index() < self.node_count() {
            Ok(())
        } else {
            Err(Error::NodeNotFound(node.0))
        }
    }
}

fn check_weight(w: f64) -> Result<()> {
    if w.is_finite() && w >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidGraph(format!(
            "edge weight {w} is not finite and nonnegative"
        )))
    }
}

pub(crate) struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            core::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}
