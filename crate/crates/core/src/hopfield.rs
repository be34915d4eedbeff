//! Binary activity patterns and synchronous Hopfield recall.
//!
//! A [`Pattern`] is a node × hour matrix over `{-1, +1}`; row `i` belongs to
//! node `i` of the graph it is used with. One recall step replaces every cell
//! by the sign of the weighted sum of its neighbors' cells in the same hour:
//! `+1` when the sum is strictly above `theta`, `-1` otherwise.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{HourStamp, NodeId, TemporalGraph, TimeWindow};
use crate::preprocess::activity_indicator;

pub const ACTIVE: i8 = 1;
pub const INACTIVE: i8 = -1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    nodes: usize,
    hours: usize,
    start: HourStamp,
    cells: Vec<i8>,
}

impl Pattern {
    pub fn inactive(nodes: usize, hours: usize, start: HourStamp) -> Self {
        Pattern {
            nodes,
            hours,
            start,
            cells: vec![INACTIVE; nodes * hours],
        }
    }

    /// Row-major cells; every entry must be `-1` or `+1`.
    pub fn from_cells(
        nodes: usize,
        hours: usize,
        start: HourStamp,
        cells: Vec<i8>,
    ) -> Result<Self> {
        if cells.len() != nodes * hours {
            return Err(Error::shape(format!("{nodes}×{hours} cells"), cells.len()));
        }
        if let Some(bad) = cells.iter().find(|&&c| c != ACTIVE && c != INACTIVE) {
            return Err(Error::Range(format!("pattern entry {bad} is not -1 or +1")));
        }
        Ok(Pattern {
            nodes,
            hours,
            start,
            cells,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn hours(&self) -> usize {
        self.hours
    }

    /// Absolute time of column 0.
    pub fn start(&self) -> HourStamp {
        self.start
    }

    pub fn cells(&self) -> &[i8] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, node: usize, hour: usize) -> i8 {
        self.cells[node * self.hours + hour]
    }

    #[inline]
    pub fn is_active(&self, node: usize, hour: usize) -> bool {
        self.get(node, hour) == ACTIVE
    }

    pub fn set(&mut self, node: usize, hour: usize, active: bool) {
        self.cells[node * self.hours + hour] = if active { ACTIVE } else { INACTIVE };
    }

    pub fn row(&self, node: usize) -> &[i8] {
        &self.cells[node * self.hours..(node + 1) * self.hours]
    }

    pub fn active_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c == ACTIVE).count()
    }

    /// Number of active nodes in each hour.
    pub fn active_per_hour(&self) -> Vec<usize> {
        let mut out = vec![0; self.hours];
        for i in 0..self.nodes {
            for (t, &c) in self.row(i).iter().enumerate() {
                out[t] += (c == ACTIVE) as usize;
            }
        }
        out
    }

    /// Rows in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Pattern> {
        let mut cells = Vec::with_capacity(rows.len() * self.hours);
        for &r in rows {
            if r >= self.nodes {
                return Err(Error::NodeNotFound(r as u32));
            }
            cells.extend_from_slice(self.row(r));
        }
        Ok(Pattern {
            nodes: rows.len(),
            hours: self.hours,
            start: self.start,
            cells,
        })
    }

    pub fn slice_hours(&self, window: TimeWindow) -> Result<Pattern> {
        if window.end_hour() > self.hours {
            return Err(Error::Range(format!(
                "window ending at {} exceeds {} hours",
                window.end_hour(),
                self.hours
            )));
        }
        let mut cells = Vec::with_capacity(self.nodes * window.len());
        for i in 0..self.nodes {
            cells.extend_from_slice(&self.row(i)[window.range()]);
        }
        Ok(Pattern {
            nodes: self.nodes,
            hours: window.len(),
            start: self.start.offset(window.start_hour() as i64),
            cells,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RecallConfig {
    pub theta: f64,
    pub max_iter: usize,
}

impl Default for RecallConfig {
    fn default() -> Self {
        RecallConfig {
            theta: 0.0,
            max_iter: 50,
        }
    }
}

impl RecallConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if self.theta.is_nan() {
            return Err(Error::Config("theta is NaN".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecallResult {
    pub pattern: Pattern,
    /// Number of recall steps applied.
    pub iterations: usize,
    /// The last step reproduced its input.
    pub converged: bool,
    /// Other phase of a detected 2-cycle.
    pub cycle_partner: Option<Pattern>,
}

/// `+1` where the node bursts under multiplier `n`, `-1` elsewhere.
pub fn binarize(graph: &TemporalGraph, n: f64) -> Result<Pattern> {
    let hours = graph.horizon();
    let mut p = Pattern::inactive(graph.node_count(), hours, graph.start());
    if hours == 0 {
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Config(format!(
                "activity multiplier n must be finite and > 0, got {n}"
            )));
        }
        return Ok(p);
    }
    for i in 0..graph.node_count() {
        for (t, k) in activity_indicator(graph.row(i), n)?.into_iter().enumerate() {
            if k {
                p.set(i, t, true);
            }
        }
    }
    Ok(p)
}

fn check_shape(graph: &TemporalGraph, p: &Pattern) -> Result<()> {
    if p.nodes != graph.node_count() {
        return Err(Error::shape(
            format!("{} pattern rows", graph.node_count()),
            p.nodes,
        ));
    }
    Ok(())
}

/// Fill output rows `first..first + out.len() / hours`.
fn step_rows(graph: &TemporalGraph, p: &Pattern, theta: f64, first: usize, out: &mut [i8]) {
    let hours = p.hours;
    if hours == 0 {
        return;
    }
    let mut field = vec![0.0f64; hours];
    for (k, dst) in out.chunks_mut(hours).enumerate() {
        let i = first + k;
        field.iter_mut().for_each(|s| *s = 0.0);
        for (j, w) in graph.adjacent(i) {
            if w == 0.0 {
                continue;
            }
            for (s, &c) in field.iter_mut().zip(p.row(j)) {
                *s += w * c as f64;
            }
        }
        for (d, &s) in dst.iter_mut().zip(&field) {
            *d = if s > theta { ACTIVE } else { INACTIVE };
        }
    }
}

/// One synchronous update `P ← f_θ(W·P)`.
pub fn recall_step(graph: &TemporalGraph, p: &Pattern, theta: f64) -> Result<Pattern> {
    check_shape(graph, p)?;
    let mut out = Pattern::inactive(p.nodes, p.hours, p.start);
    step_rows(graph, p, theta, 0, &mut out.cells);
    Ok(out)
}

fn iterate(
    p0: &Pattern,
    cfg: &RecallConfig,
    mut step: impl FnMut(&Pattern) -> Pattern,
) -> RecallResult {
    let mut prev: Option<Pattern> = None;
    let mut cur = p0.clone();
    for it in 1..=cfg.max_iter {
        let next = step(&cur);
        if next == cur {
            return RecallResult {
                pattern: next,
                iterations: it,
                converged: true,
                cycle_partner: None,
            };
        }
        if prev.as_ref() == Some(&next) {
            return RecallResult {
                pattern: next,
                iterations: it,
                converged: false,
                cycle_partner: Some(cur),
            };
        }
        prev = Some(core::mem::replace(&mut cur, next));
    }
    RecallResult {
        pattern: cur,
        iterations: cfg.max_iter,
        converged: false,
        cycle_partner: None,
    }
}

/// Iterate [`recall_step`] until a fixed point, a 2-cycle, or `max_iter`.
pub fn recall(graph: &TemporalGraph, p0: &Pattern, cfg: &RecallConfig) -> Result<RecallResult> {
    cfg.validate()?;
    check_shape(graph, p0)?;
    Ok(iterate(p0, cfg, |p| {
        let mut out = Pattern::inactive(p.nodes, p.hours, p.start);
        step_rows(graph, p, cfg.theta, 0, &mut out.cells);
        out
    }))
}

#[cfg(feature = "std")]
fn step_parallel(graph: &TemporalGraph, p: &Pattern, theta: f64, threads: usize) -> Pattern {
    let mut out = Pattern::inactive(p.nodes, p.hours, p.start);
    if threads <= 1 || p.nodes < 2 || p.hours == 0 {
        step_rows(graph, p, theta, 0, &mut out.cells);
        return out;
    }
    let rows_per = p.nodes.div_ceil(threads);
    let hours = p.hours;
    std::thread::scope(|s| {
        for (k, part) in out.cells.chunks_mut(rows_per * hours).enumerate() {
            s.spawn(move || step_rows(graph, p, theta, k * rows_per, part));
        }
    });
    out
}

/// [`recall_step`] with rows split over `threads` workers.
#[cfg(feature = "std")]
pub fn recall_step_parallel(
    graph: &TemporalGraph,
    p: &Pattern,
    theta: f64,
    threads: usize,
) -> Result<Pattern> {
    check_shape(graph, p)?;
    Ok(step_parallel(graph, p, theta, threads))
}

#[cfg(feature = "std")]
pub fn recall_parallel(
    graph: &TemporalGraph,
    p0: &Pattern,
    cfg: &RecallConfig,
    threads: usize,
) -> Result<RecallResult> {
    cfg.validate()?;
    check_shape(graph, p0)?;
    Ok(iterate(p0, cfg, |p| {
        step_parallel(graph, p, cfg.theta, threads)
    }))
}

/// Rows in `keep` unchanged, every other row set to `-1`.
pub fn mask_pattern(p: &Pattern, keep: &[NodeId]) -> Result<Pattern> {
    let mut out = Pattern::inactive(p.nodes, p.hours, p.start);
    for &node in keep {
        let i = node.index();
        if i >= p.nodes {
            return Err(Error::NodeNotFound(node.0));
        }
        let h = p.hours;
        out.cells[i * h..(i + 1) * h].copy_from_slice(p.row(i));
    }
    Ok(out)
}
