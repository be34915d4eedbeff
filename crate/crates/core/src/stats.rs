//! Degree and weight distributions, and power-law exponent estimates.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::TemporalGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Scale {
    Linear,
    Log,
}

/// Counts over `edges.len() - 1` half-open bins `[edges[k], edges[k+1])`;
/// the last bin also includes its upper edge.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub scale: Scale,
}

impl Histogram {
    /// Bins `[base^k, base^(k+1))` covering every positive sample.
    /// Nonpositive and non-finite samples are out of range and skipped.
    pub fn log_binned(samples: &[f64], base: f64) -> Result<Self> {
        if !(base > 1.0) || !base.is_finite() {
            return Err(Error::Config(format!(
                "log bin base must be > 1, got {base}"
            )));
        }
        let positive: Vec<f64> = samples
            .iter()
            .copied()
            .filter(|x| x.is_finite() && *x > 0.0)
            .collect();
        let (lo, hi) = min_max(&positive).ok_or(Error::EmptyInput("no positive samples"))?;
        let mut k = libm::floor(libm::log(lo) / libm::log(base)) as i32;
        // guard against log rounding on exact powers
        while libm::pow(base, k as f64) > lo {
            k -= 1;
        }
        while libm::pow(base, (k + 1) as f64) <= lo {
            k += 1;
        }
        let mut edges = vec![libm::pow(base, k as f64)];
        while *edges.last().unwrap() <= hi {
            k += 1;
            edges.push(libm::pow(base, k as f64));
        }
        let mut h = Histogram {
            counts: vec![0; edges.len() - 1],
            edges,
            scale: Scale::Log,
        };
        for x in positive {
            h.add(x);
        }
        Ok(h)
    }

    /// `bins` equal-width bins over `[min, max]` of the finite samples.
    pub fn linear(samples: &[f64], bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::Config("need at least one bin".into()));
        }
        let finite: Vec<f64> = samples.iter().copied().filter(|x| x.is_finite()).collect();
        let (lo, mut hi) = min_max(&finite).ok_or(Error::EmptyInput("no finite samples"))?;
        if hi == lo {
            hi = lo + 1.0;
        }
        let width = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|k| lo + width * k as f64).collect();
        edges.push(hi);
        let mut h = Histogram {
            counts: vec![0; bins],
            edges,
            scale: Scale::Linear,
        };
        for x in finite {
            h.add(x);
        }
        Ok(h)
    }

    fn add(&mut self, x: f64) {
        let bins = self.counts.len();
        // first edge strictly greater than x, minus one
        let k = self.edges.partition_point(|&e| e <= x);
        let bin = k.saturating_sub(1).min(bins - 1);
        self.counts[bin] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn occupied_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Geometric (log scale) or arithmetic bin centers.
    pub fn centers(&self) -> Vec<f64> {
        self.edges
            .windows(2)
            .map(|w| match self.scale {
                Scale::Log => libm::sqrt(w[0] * w[1]),
                Scale::Linear => 0.5 * (w[0] + w[1]),
            })
            .collect()
    }

    /// Counts divided by bin width and total.
    pub fn densities(&self) -> Vec<f64> {
        let total = self.total().max(1) as f64;
        self.edges
            .windows(2)
            .zip(&self.counts)
            .map(|(w, &c)| c as f64 / ((w[1] - w[0]) * total))
            .collect()
    }
}

fn min_max(xs: &[f64]) -> Option<(f64, f64)> {
    let first = *xs.first()?;
    Some(
        xs.iter()
            .fold((first, first), |(lo, hi), &x| (lo.min(x), hi.max(x))),
    )
}

/// Weighted degree (sum of incident weights) or plain degree per node.
pub fn degrees(graph: &TemporalGraph, weighted: bool) -> Vec<f64> {
    graph
        .node_ids()
        .map(|v| {
            if weighted {
                graph.weighted_degree(v)
            } else {
                graph.degree(v) as f64
            }
        })
        .collect()
}

/// Log-binned (base 2) degree histogram. Zero-degree nodes fall outside the bins.
pub fn degree_distribution(graph: &TemporalGraph, weighted: bool) -> Result<Histogram> {
    if graph.is_empty() {
        return Err(Error::EmptyInput("graph has no nodes"));
    }
    Histogram::log_binned(&degrees(graph, weighted), 2.0)
}

/// Log-binned (base 2) histogram of the positive edge weights.
pub fn weight_distribution(graph: &TemporalGraph) -> Result<Histogram> {
    if graph.edge_count() == 0 {
        return Err(Error::EmptyInput("graph has no edges"));
    }
    Histogram::log_binned(graph.weights(), 2.0)
}

/// Continuous maximum-likelihood exponent `1 + n / Σ ln(x_i / xmin)` over
/// the samples `>= xmin`.
pub fn powerlaw_exponent(samples: &[f64], xmin: f64) -> Result<f64> {
    if !(xmin > 0.0) || !xmin.is_finite() {
        return Err(Error::Config(format!(
            "xmin must be finite and > 0, got {xmin}"
        )));
    }
    let mut n = 0usize;
    let mut log_sum = 0.0;
    for &x in samples.iter().filter(|&&x| x >= xmin && x.is_finite()) {
        n += 1;
        log_sum += libm::log(x / xmin);
    }
    if n < 10 {
        return Err(Error::InsufficientData(format!(
            "{n} samples at or above xmin, need 10"
        )));
    }
    if !(log_sum > 0.0) {
        return Err(Error::InsufficientData("all samples equal xmin".into()));
    }
    Ok(1.0 + n as f64 / log_sum)
}

/// [`powerlaw_exponent`] with `xmin` set to the smallest positive sample.
pub fn powerlaw_exponent_auto(samples: &[f64]) -> Result<f64> {
    let xmin = samples
        .iter()
        .copied()
        .filter(|x| *x > 0.0 && x.is_finite())
        .fold(f64::INFINITY, f64::min);
    if !xmin.is_finite() {
        return Err(Error::InsufficientData("no positive samples".into()));
    }
    powerlaw_exponent(samples, xmin)
}

/// Least-squares slope of log density against log bin center, negated.
/// Biased on binned data; kept for comparison with plotted fits.
pub fn powerlaw_exponent_regression(hist: &Histogram) -> Result<f64> {
    let pts: Vec<(f64, f64)> = hist
        .centers()
        .into_iter()
        .zip(hist.densities())
        .filter(|&(c, d)| c > 0.0 && d > 0.0)
        .map(|(c, d)| (libm::log(c), libm::log(d)))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} occupied bins, need 2",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all bins share one center".into()));
    }
    Ok(-sxy / sxx)
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}
