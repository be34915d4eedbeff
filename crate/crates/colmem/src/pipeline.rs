//! Stage functions shared by the subcommands, and the end-to-end run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use colmem_core::community::louvain;
use colmem_core::hebbian::learn_parallel;
use colmem_core::hopfield::{binarize, Pattern};
use colmem_core::preprocess::{filter_bursty, filter_bursty_union};
use colmem_core::recall_eval::{error_curve_parallel, EvalConfig, EvalReport};
use colmem_core::{BurstConfig, LearnConfig, NodeId, Partition, RecallConfig, TemporalGraph};
use serde::Serialize;

use crate::config::{parse_fractions, KvConfig};
use crate::error::{AtStage, Error, Result, Stage, StageError};
use crate::formats::{self, create, open};
use crate::ingest::{
    self, build_graph, calendar_months, filter_min_visits, parse_edges, parse_visits, BuildReport,
    Grid,
};
use crate::report::{stats_report, write_gnuplot_files, write_json, StatsReport};
use crate::{gexf, snapshot};

/// Which windows the burstiness filter is evaluated on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterMode {
    /// Keep nodes bursty in at least one calendar month.
    #[default]
    MonthlyUnion,
    /// One filter over the whole horizon.
    Full,
    None,
}

impl FromStr for FilterMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monthly-union" => Ok(FilterMode::MonthlyUnion),
            "full" => Ok(FilterMode::Full),
            "none" => Ok(FilterMode::None),
            _ => Err(Error::Config(format!(
                "filter {s:?}: expected monthly-union, full or none"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IngestSummary {
    pub edge_lines: u64,
    pub malformed_edge_lines: u64,
    pub self_loops: u64,
    pub visit_records: u64,
    pub malformed_visit_records: u64,
    pub out_of_grid_records: u64,
    pub build: BuildReport,
    pub min_visits: u32,
    pub nodes_after_min_visits: usize,
    pub edges_after_min_visits: usize,
}

/// Parse both inputs, assemble, and apply the peak-visit filter.
pub fn ingest_files(
    edges: &Path,
    visits: &Path,
    grid: Grid,
    min_visits: u32,
) -> Result<(TemporalGraph, IngestSummary)> {
    let e = parse_edges(open(edges)?).map_err(|err| relabel(err, edges))?;
    let v = parse_visits(open(visits)?, grid).map_err(|err| relabel(err, visits))?;
    log::info!(
        "edges: {} records, {} malformed, {} self-loops; visits: {} records, {} malformed, {} off-grid",
        e.records.len(),
        e.malformed,
        e.self_loops,
        v.records,
        v.malformed,
        v.out_of_grid
    );
    let (g, build) = build_graph(&e, &v)?;
    let g = filter_min_visits(&g, min_visits);
    let summary = IngestSummary {
        edge_lines: e.lines,
        malformed_edge_lines: e.malformed,
        self_loops: e.self_loops,
        visit_records: v.records,
        malformed_visit_records: v.malformed,
        out_of_grid_records: v.out_of_grid,
        build,
        min_visits,
        nodes_after_min_visits: g.node_count(),
        edges_after_min_visits: g.edge_count(),
    };
    Ok((g, summary))
}

fn relabel(e: Error, path: &Path) -> Error {
    match e {
        Error::Io { source, .. } => Error::Io {
            path: path.into(),
            source,
        },
        other => other,
    }
}

pub fn burst_filter(
    graph: &TemporalGraph,
    cfg: &BurstConfig,
    mode: FilterMode,
) -> Result<TemporalGraph> {
    Ok(match mode {
        FilterMode::None => graph.clone(),
        FilterMode::Full => filter_bursty(graph, cfg)?,
        FilterMode::MonthlyUnion => {
            let months: Vec<_> = calendar_months(graph.start(), graph.horizon())
                .into_iter()
                .map(|(_, w)| w)
                .collect();
            filter_bursty_union(graph, cfg, &months)?
        }
    })
}

/// Members of `community`, or of the largest community (lowest id on ties).
pub fn community_members(p: &Partition, community: Option<u32>) -> Result<Vec<NodeId>> {
    let members = p.members();
    let pick = match community {
        Some(c) => members
            .get(c as usize)
            .ok_or_else(|| Error::Config(format!("no community {c}")))?,
        None => members
            .iter()
            .enumerate()
            .max_by_key(|(k, m)| (m.len(), std::cmp::Reverse(*k)))
            .map(|(_, m)| m)
            .ok_or_else(|| Error::Config("partition is empty".into()))?,
    };
    Ok(pick.clone())
}

/// First hour with the most active cluster members.
pub fn peak_hour(pattern: &Pattern, cluster: &[NodeId]) -> usize {
    let mut best = (0, 0);
    for t in 0..pattern.hours() {
        let c = cluster
            .iter()
            .filter(|v| pattern.is_active(v.index(), t))
            .count();
        if c > best.1 {
            best = (t, c);
        }
    }
    best.0
}

#[derive(Clone, Debug, PartialEq)]
pub enum ClusterSource {
    File(PathBuf),
    /// A community of the run's partition; `None` for the largest.
    Community(Option<u32>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalParams {
    pub cluster: ClusterSource,
    pub event_start: Option<usize>,
    pub cfg: EvalConfig,
}

/// Fully resolved parameters of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunParams {
    pub out_dir: PathBuf,
    pub edges: PathBuf,
    pub visits: PathBuf,
    pub grid: Grid,
    pub min_visits: u32,
    pub burst: BurstConfig,
    pub filter: FilterMode,
    pub learn: LearnConfig,
    pub min_component_size: usize,
    pub resolution: f64,
    pub recall: RecallConfig,
    pub seed: u64,
    pub threads: usize,
    pub gnuplot: bool,
    pub eval: Option<EvalParams>,
}

/// CLI values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct RunOverrides {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

pub const DEFAULT_MIN_COMPONENT: usize = 3;

impl RunParams {
    /// Relative paths in the file are taken relative to `base`.
    pub fn resolve(cfg: &KvConfig, base: &Path, o: &RunOverrides) -> Result<Self> {
        let path = |key: &str| -> Result<PathBuf> {
            let p = cfg
                .raw(key)
                .ok_or_else(|| Error::Config(format!("missing required key {key}")))?;
            Ok(base.join(p))
        };
        let grid = Grid {
            start: match cfg.raw("start") {
                Some(s) => ingest::parse_hour(s)
                    .ok_or_else(|| Error::Config(format!("start {s:?} is not an hour")))?,
                None => Grid::default().start,
            },
            hours: cfg.get("hours")?.unwrap_or(Grid::default().hours),
        };
        let seed = cfg.pick(o.seed, "seed", 42)?;
        let eval = if cfg.get::<bool>("eval")?.unwrap_or(false) {
            let cluster = match (cfg.raw("eval.cluster"), cfg.raw("eval.community")) {
                (Some(_), Some(_)) => {
                    return Err(Error::Config(
                        "set eval.cluster or eval.community, not both".into(),
                    ))
                }
                (Some(p), None) => ClusterSource::File(base.join(p)),
                (None, Some("largest") | None) => ClusterSource::Community(None),
                (None, Some(c)) => ClusterSource::Community(Some(
                    c.parse()
                        .map_err(|_| Error::Config(format!("eval.community {c:?}")))?,
                )),
            };
            let defaults = EvalConfig::default();
            let cfg = EvalConfig {
                mask_fractions: match cfg.raw("eval.fractions") {
                    Some(f) => parse_fractions(f)?,
                    None => defaults.mask_fractions,
                },
                trials: cfg.get("eval.trials")?.unwrap_or(defaults.trials),
                event_start: 0,
                event_window: cfg.get("eval.window")?.unwrap_or(defaults.event_window),
                seed,
            };
            cfg.validate()?;
            Some(EvalParams {
                cluster,
                event_start: None,
                cfg,
            })
        } else {
            None
        };
        let mut p = RunParams {
            out_dir: match (&o.out_dir, cfg.raw("out_dir")) {
                (Some(d), _) => d.clone(),
                (None, _) => path("out_dir")?,
            },
            edges: path("edges")?,
            visits: path("visits")?,
            grid,
            min_visits: cfg.get("min_visits")?.unwrap_or(ingest::DEFAULT_MIN_VISITS),
            burst: BurstConfig {
                n: cfg.get("n")?.unwrap_or(BurstConfig::default().n),
                min_burstiness: cfg
                    .get("min_burstiness")?
                    .unwrap_or(BurstConfig::default().min_burstiness),
            },
            filter: cfg.get("filter")?.unwrap_or_default(),
            learn: LearnConfig {
                lambda: cfg.get("lambda")?.unwrap_or(LearnConfig::default().lambda),
            },
            min_component_size: cfg
                .get("min_component_size")?
                .unwrap_or(DEFAULT_MIN_COMPONENT),
            resolution: cfg.get("resolution")?.unwrap_or(1.0),
            recall: RecallConfig {
                theta: cfg.get("theta")?.unwrap_or(RecallConfig::default().theta),
                max_iter: cfg
                    .get("max_iter")?
                    .unwrap_or(RecallConfig::default().max_iter),
            },
            seed,
            threads: cfg.pick(o.threads, "threads", 1)?.max(1),
            gnuplot: cfg.get("gnuplot")?.unwrap_or(false),
            eval,
        };
        if let Some(e) = &mut p.eval {
            e.event_start = cfg.get("eval.event_start")?;
        }
        p.burst.validate()?;
        p.learn.validate()?;
        p.recall.validate()?;
        if let Some(k) = cfg.unused().first() {
            return Err(Error::Config(format!("unknown key {k}")));
        }
        Ok(p)
    }

    /// Flat view for the manifest; paths as given.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_owned(), v);
        };
        put("edges", self.edges.display().to_string());
        put("visits", self.visits.display().to_string());
        put("start", ingest::format_hour(self.grid.start));
        put("hours", self.grid.hours.to_string());
        put("min_visits", self.min_visits.to_string());
        put("n", self.burst.n.to_string());
        put("min_burstiness", self.burst.min_burstiness.to_string());
        put(
            "filter",
            serde_json::to_value(self.filter)
                .unwrap()
                .as_str()
                .unwrap()
                .to_owned(),
        );
        put("lambda", self.learn.lambda.to_string());
        put("min_component_size", self.min_component_size.to_string());
        put("resolution", self.resolution.to_string());
        put("theta", self.recall.theta.to_string());
        put("max_iter", self.recall.max_iter.to_string());
        put("seed", self.seed.to_string());
        put("threads", self.threads.to_string());
        put("gnuplot", self.gnuplot.to_string());
        if let Some(e) = &self.eval {
            put(
                "eval.cluster",
                match &e.cluster {
                    ClusterSource::File(p) => p.display().to_string(),
                    ClusterSource::Community(None) => "largest".into(),
                    ClusterSource::Community(Some(c)) => format!("community {c}"),
                },
            );
            put("eval.fractions", format!("{:?}", e.cfg.mask_fractions));
            put("eval.trials", e.cfg.trials.to_string());
            put("eval.window", e.cfg.event_window.to_string());
            if let Some(s) = e.event_start {
                put("eval.event_start", s.to_string());
            }
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub seconds: f64,
    /// File names under the output directory.
    pub artifacts: Vec<String>,
    pub nodes: usize,
    pub edges: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub seed: u64,
    pub parameters: BTreeMap<String, String>,
    pub stages: Vec<StageRecord>,
    pub total_seconds: f64,
}

pub const MANIFEST: &str = "manifest.json";

struct Run<'a> {
    dir: &'a Path,
    stages: Vec<StageRecord>,
}

impl Run<'_> {
    /// Runs `write`, which returns the artifact names, and records the stage.
    fn stage(
        &mut self,
        stage: Stage,
        graph: &TemporalGraph,
        started: Instant,
        write: impl FnOnce(&Path) -> Result<Vec<String>>,
    ) -> std::result::Result<(), StageError> {
        let artifacts = write(self.dir).at(stage)?;
        let seconds = started.elapsed().as_secs_f64();
        log::info!(
            "{stage}: {} nodes, {} edges, {seconds:.3}s",
            graph.node_count(),
            graph.edge_count()
        );
        self.stages.push(StageRecord {
            stage,
            seconds,
            artifacts,
            nodes: graph.node_count(),
            edges: graph.edge_count(),
        });
        Ok(())
    }
}

fn save_snapshot(g: &TemporalGraph, dir: &Path, name: &str) -> Result<String> {
    snapshot::save(g, dir.join(name))?;
    Ok(name.to_owned())
}

/// ingest → preprocess → learn → prune → communities → stats (→ eval) →
/// export. Every stage writes its artifacts under `params.out_dir`; the
/// manifest is written last.
pub fn run(params: &RunParams) -> std::result::Result<Manifest, StageError> {
    let t0 = Instant::now();
    let dir = params.out_dir.as_path();
    std::fs::create_dir_all(dir)
        .map_err(Error::io(dir))
        .at(Stage::Config)?;
    let mut run = Run {
        dir,
        stages: Vec::new(),
    };

    let t = Instant::now();
    let (ingested, summary) = ingest_files(
        &params.edges,
        &params.visits,
        params.grid,
        params.min_visits,
    )
    .at(Stage::Ingest)?;
    run.stage(Stage::Ingest, &ingested, t, |d| {
        write_json(&summary, d.join("ingest.json"))?;
        Ok(vec![
            save_snapshot(&ingested, d, "00_ingest.snap")?,
            "ingest.json".into(),
        ])
    })?;

    let t = Instant::now();
    let filtered = burst_filter(&ingested, &params.burst, params.filter).at(Stage::Preprocess)?;
    run.stage(Stage::Preprocess, &filtered, t, |d| {
        Ok(vec![save_snapshot(&filtered, d, "01_preprocess.snap")?])
    })?;

    let t = Instant::now();
    let learned = learn_parallel(&filtered, &params.learn, params.threads).at(Stage::Learn)?;
    run.stage(Stage::Learn, &learned, t, |d| {
        Ok(vec![save_snapshot(&learned, d, "02_learn.snap")?])
    })?;

    let t = Instant::now();
    let (pruned, mapping) = learned.prune(params.min_component_size);
    run.stage(Stage::Prune, &pruned, t, |d| {
        formats::write_mapping(&pruned, &mapping, create(d.join("id_mapping.csv"))?)?;
        Ok(vec![
            save_snapshot(&pruned, d, "03_prune.snap")?,
            "id_mapping.csv".into(),
        ])
    })?;

    let t = Instant::now();
    let partition = if pruned.total_weight() > 0.0 {
        louvain(&pruned, params.resolution, params.seed).at(Stage::Communities)?
    } else {
        log::warn!("no positive edges survive pruning; every node is its own community");
        Partition::singletons(pruned.node_count())
    };
    run.stage(Stage::Communities, &pruned, t, |d| {
        formats::write_partition(&pruned, &partition, create(d.join("partition.csv"))?)?;
        Ok(vec!["partition.csv".into()])
    })?;

    let t = Instant::now();
    let unit = filtered.with_uniform_weights(1.0).at(Stage::Stats)?;
    let initial = if unit.total_weight() > 0.0 {
        Some(louvain(&unit, params.resolution, params.seed).at(Stage::Stats)?)
    } else {
        None
    };
    let report: StatsReport = stats_report(
        &pruned,
        (pruned.node_count() > 0).then_some(&partition),
        initial.as_ref().map(|p| (&unit, p)),
        None,
    )
    .at(Stage::Stats)?;
    run.stage(Stage::Stats, &pruned, t, |d| {
        write_json(&report, d.join("stats.json"))?;
        let mut files = vec!["stats.json".to_owned()];
        if params.gnuplot {
            for p in write_gnuplot_files(&report, d.join("plots"))? {
                files.push(p.strip_prefix(d).unwrap_or(&p).display().to_string());
            }
        }
        Ok(files)
    })?;

    if let Some(e) = &params.eval {
        let t = Instant::now();
        run.stage(Stage::Eval, &pruned, t, |d| {
            let report = evaluate(
                &pruned,
                &partition,
                &params.burst,
                &params.recall,
                e,
                params.threads,
            )?;
            write_json(&report, d.join("eval.json"))?;
            Ok(vec!["eval.json".into()])
        })?;
    }

    let t = Instant::now();
    run.stage(Stage::Export, &pruned, t, |d| {
        gexf::export_gexf(&pruned, Some(&partition), create(d.join("graph.gexf"))?)?;
        Ok(vec!["graph.gexf".into()])
    })?;

    let manifest = Manifest {
        tool: "colmem".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        core_version: colmem_core::VERSION.into(),
        seed: params.seed,
        parameters: params.to_map(),
        stages: run.stages,
        total_seconds: t0.elapsed().as_secs_f64(),
    };
    write_json(&manifest, dir.join(MANIFEST)).at(Stage::Export)?;
    Ok(manifest)
}

fn evaluate(
    graph: &TemporalGraph,
    partition: &Partition,
    burst: &BurstConfig,
    recall: &RecallConfig,
    e: &EvalParams,
    threads: usize,
) -> Result<EvalReport> {
    let cluster = match &e.cluster {
        ClusterSource::File(p) => formats::resolve(graph, &formats::read_cluster(open(p)?)?)?,
        ClusterSource::Community(c) => community_members(partition, *c)?,
    };
    let pattern = binarize(graph, burst.n)?;
    let event_start = e
        .event_start
        .unwrap_or_else(|| peak_hour(&pattern, &cluster));
    let cfg = EvalConfig {
        event_start,
        ..e.cfg.clone()
    };
    Ok(error_curve_parallel(
        graph, &cluster, &pattern, &cfg, recall, threads,
    )?)
}
