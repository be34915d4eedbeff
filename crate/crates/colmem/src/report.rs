//! JSON reports and gnuplot data files.

use std::io::Write;
use std::path::Path;

use colmem_core::community::{community_sizes, modularity};
use colmem_core::stats::{self, Histogram};
use colmem_core::{Partition, TemporalGraph};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formats::create;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Distribution {
    pub samples: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    /// Maximum-likelihood power-law exponent over samples `>= xmin`.
    pub gamma_mle: Option<f64>,
    pub xmin: Option<f64>,
    /// Slope of the log-binned density; biased, for comparison with plots.
    pub gamma_regression: Option<f64>,
    pub histogram: Option<Histogram>,
    /// Why an estimate is missing, when one is.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Distribution {
    /// Positive samples only; `xmin` defaults to the smallest of them.
    pub fn of(samples: &[f64], xmin: Option<f64>) -> Self {
        let positive: Vec<f64> = samples.iter().copied().filter(|&x| x > 0.0).collect();
        let mut notes = Vec::new();
        let histogram = Histogram::log_binned(&positive, 2.0)
            .map_err(|e| notes.push(format!("histogram: {e}")))
            .ok();
        let xmin = xmin.or_else(|| positive.iter().copied().reduce(f64::min));
        let gamma_mle = xmin.and_then(|x| {
            stats::powerlaw_exponent(&positive, x)
                .map_err(|e| notes.push(format!("gamma_mle: {e}")))
                .ok()
        });
        let gamma_regression = histogram.as_ref().and_then(|h| {
            stats::powerlaw_exponent_regression(h)
                .map_err(|e| notes.push(format!("gamma_regression: {e}")))
                .ok()
        });
        Distribution {
            samples: positive.len(),
            mean: stats::mean(&positive),
            median: stats::median(&positive),
            gamma_mle,
            xmin,
            gamma_regression,
            histogram,
            notes,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommunityReport {
    pub count: usize,
    pub resolution: f64,
    pub modularity: f64,
    /// Descending.
    pub sizes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsReport {
    pub nodes: usize,
    pub edges: usize,
    pub positive_edges: usize,
    pub positive_edge_fraction: Option<f64>,
    pub horizon: usize,
    pub degree: Distribution,
    pub weighted_degree: Distribution,
    pub weight: Distribution,
    pub communities: Option<CommunityReport>,
    /// Communities of the same nodes under unit weights, for comparison.
    pub initial_communities: Option<CommunityReport>,
}

pub fn community_report(graph: &TemporalGraph, p: &Partition) -> Result<CommunityReport> {
    Ok(CommunityReport {
        count: p.community_count(),
        resolution: p.resolution(),
        modularity: modularity(graph, p, p.resolution())?,
        sizes: community_sizes(p),
    })
}

pub fn stats_report(
    graph: &TemporalGraph,
    partition: Option<&Partition>,
    initial: Option<(&TemporalGraph, &Partition)>,
    xmin: Option<f64>,
) -> Result<StatsReport> {
    let positive = graph.weights().iter().filter(|&&w| w > 0.0).count();
    Ok(StatsReport {
        nodes: graph.node_count(),
        edges: graph.edge_count(),
        positive_edges: positive,
        positive_edge_fraction: (graph.edge_count() > 0)
            .then(|| positive as f64 / graph.edge_count() as f64),
        horizon: graph.horizon(),
        degree: Distribution::of(&stats::degrees(graph, false), xmin),
        weighted_degree: Distribution::of(&stats::degrees(graph, true), xmin),
        weight: Distribution::of(graph.weights(), xmin),
        communities: partition.map(|p| community_report(graph, p)).transpose()?,
        initial_communities: initial.map(|(g, p)| community_report(g, p)).transpose()?,
    })
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).and_then(|_| w.flush()).map_err(Error::io(path))
}

/// Columns `lo hi center count density`, one bin per line.
pub fn write_gnuplot(h: &Histogram, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "# lo hi center count density")?;
    let (centers, densities) = (h.centers(), h.densities());
    for (k, w) in h.edges.windows(2).enumerate() {
        writeln!(
            out,
            "{} {} {} {} {}",
            w[0], w[1], centers[k], h.counts[k], densities[k]
        )?;
    }
    out.flush()
}

/// `degree.dat`, `weighted_degree.dat` and `weight.dat` under `dir`.
pub fn write_gnuplot_files(
    report: &StatsReport,
    dir: impl AsRef<Path>,
) -> Result<Vec<std::path::PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let mut written = Vec::new();
    for (name, d) in [
        ("degree", &report.degree),
        ("weighted_degree", &report.weighted_degree),
        ("weight", &report.weight),
    ] {
        if let Some(h) = &d.histogram {
            let path = dir.join(format!("{name}.dat"));
            write_gnuplot(h, create(&path)?).map_err(Error::io(&path))?;
            written.push(path);
        }
    }
    Ok(written)
}
