//! Command-line interface. Every subcommand accepts `--config FILE`; a flag
//! given on the command line overrides the key of the same name in the file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use colmem_core::community::louvain;
use colmem_core::hebbian::learn_parallel;
use colmem_core::hopfield::{binarize, recall_parallel};
use colmem_core::recall_eval::{error_curve_parallel, monthly_recall_matrix};
use colmem_core::synth::generate;
use colmem_core::{
    BurstConfig, EvalConfig, LearnConfig, Partition, RecallConfig, SynthConfig, TemporalGraph,
};
use serde::Serialize;

use crate::config::{parse_fractions, parse_list, KvConfig};
use crate::error::{AtStage, Error, Result, Stage, StageError};
use crate::formats::{self, create, open};
use crate::ingest::{self, calendar_months, month_window, Grid};
use crate::pipeline::{self, FilterMode, RunOverrides, RunParams};
use crate::report::{stats_report, write_gnuplot_files, write_json};
use crate::{gexf, snapshot};

#[derive(Debug, Parser)]
#[command(
    name = "colmem",
    version,
    about = "Associative memory over page-visit time series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a planted-cluster temporal graph.
    Synth(SynthArgs),
    /// Build a snapshot from an edge TSV and a visit CSV.
    Ingest(IngestArgs),
    /// Keep bursty nodes.
    Preprocess(PreprocessArgs),
    /// Learn edge weights from co-activation.
    Learn(LearnArgs),
    /// Drop zero-weight edges, isolated nodes and small components.
    Prune(PruneArgs),
    /// Louvain communities of a weighted snapshot.
    Communities(CommunitiesArgs),
    /// Degree, weight and community statistics.
    Stats(StatsArgs),
    /// Burst pattern of a snapshot as a ±1 CSV.
    Binarize(BinarizeArgs),
    /// Recall a full pattern from a partial one.
    Recall(RecallArgs),
    /// Recall error against the fraction of a cluster given as input.
    Eval(EvalArgs),
    /// Per-month weights recalled with the whole-period pattern.
    Monthly(MonthlyArgs),
    /// GEXF file for graph viewers.
    Export(ExportArgs),
    /// The whole pipeline from a configuration file.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// `key = value` file; flags win over its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Also write the graph as an edge TSV.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Also write the series as a visit CSV.
    #[arg(long)]
    pub visits: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub edges: Option<PathBuf>,
    #[arg(long)]
    pub visits: Option<PathBuf>,
    /// First hour of the grid, ISO 8601.
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long)]
    pub hours: Option<usize>,
    /// Keep nodes whose peak hourly count exceeds this.
    #[arg(long)]
    pub min_visits: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON summary of parsed and skipped records.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<f64>,
    #[arg(long)]
    pub min_burstiness: Option<u32>,
    /// Slice to this calendar month and filter within it.
    #[arg(long, value_name = "YYYY-MM")]
    pub window_month: Option<String>,
    /// monthly-union, full or none; ignored with --window-month.
    #[arg(long)]
    pub mode: Option<FilterMode>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PruneArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    #[arg(long)]
    pub min_component_size: Option<usize>,
    /// CSV `new_id,old_id,label`.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CommunitiesArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    #[arg(long)]
    pub resolution: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Partition CSV `label,community_id`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Partition CSV; computed with Louvain when absent.
    #[arg(long)]
    pub partition: Option<PathBuf>,
    /// Snapshot before learning, clustered with unit weights for comparison.
    #[arg(long)]
    pub initial: Option<PathBuf>,
    /// Directory for gnuplot data files.
    #[arg(long)]
    pub gnuplot: Option<PathBuf>,
    /// Lower cutoff of the power-law fits.
    #[arg(long)]
    pub xmin: Option<f64>,
    #[arg(long)]
    pub resolution: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct BinarizeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RecallArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    #[arg(long)]
    pub pattern: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON with iteration count and convergence.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    /// CSV of cluster member labels.
    #[arg(long)]
    pub cluster: Option<PathBuf>,
    /// Reference pattern; the snapshot's burst pattern when absent.
    #[arg(long)]
    pub pattern: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<f64>,
    /// `lo..hi[:step]` or a comma list.
    #[arg(long)]
    pub fractions: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Defaults to the hour with the most active members.
    #[arg(long)]
    pub event_start: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MonthlyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Unlearned snapshot covering every month.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    /// Comma list of YYYY-MM; every calendar month of the grid when absent.
    #[arg(long)]
    pub months: Option<String>,
    #[arg(long)]
    pub n: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub min_component_size: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    #[arg(long)]
    pub partition: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
}

fn required<T>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| {
        Error::Config(format!(
            "--{what} is required (flag or config key {})",
            what.replace('-', "_")
        ))
    })
}

/// Path from a flag, else from the config relative to the config's directory.
fn path_arg(flag: Option<PathBuf>, cfg: &KvConfig, key: &str, base: &Path) -> Option<PathBuf> {
    let file = cfg.raw(key).map(|p| base.join(p));
    flag.or(file)
}

struct Ctx {
    cfg: KvConfig,
    base: PathBuf,
}

impl Ctx {
    fn new(common: &Common) -> Result<Self> {
        let cfg = KvConfig::load_opt(common.config.as_deref())?;
        let base = common
            .config
            .as_deref()
            .and_then(Path::parent)
            .map(Path::to_path_buf)
            .unwrap_or_default();
        Ok(Ctx { cfg, base })
    }

    fn path(&self, flag: Option<PathBuf>, key: &str) -> Option<PathBuf> {
        path_arg(flag, &self.cfg, key, &self.base)
    }

    fn need_path(&self, flag: Option<PathBuf>, key: &str) -> Result<PathBuf> {
        required(self.path(flag, key), &key.replace('_', "-"))
    }

    /// Keys never read are typos in a per-command config.
    fn finish(&self) -> Result<()> {
        match self.cfg.unused().first() {
            Some(k) => Err(Error::Config(format!("unknown key {k}"))),
            None => Ok(()),
        }
    }
}

fn burst_cfg(ctx: &Ctx, n: Option<f64>, min_b: Option<u32>) -> Result<BurstConfig> {
    let d = BurstConfig::default();
    let cfg = BurstConfig {
        n: ctx.cfg.pick(n, "n", d.n)?,
        min_burstiness: ctx.cfg.pick(min_b, "min_burstiness", d.min_burstiness)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn recall_cfg(ctx: &Ctx, theta: Option<f64>, max_iter: Option<usize>) -> Result<RecallConfig> {
    let d = RecallConfig::default();
    let cfg = RecallConfig {
        theta: ctx.cfg.pick(theta, "theta", d.theta)?,
        max_iter: ctx.cfg.pick(max_iter, "max_iter", d.max_iter)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn threads(ctx: &Ctx, flag: Option<usize>) -> Result<usize> {
    Ok(ctx.cfg.pick(flag, "threads", 1)?.max(1))
}

/// Synth parameters: every [`SynthConfig`] field is a key of the same name.
pub fn synth_config(cfg: &KvConfig, seed: Option<u64>) -> Result<SynthConfig> {
    let d = SynthConfig::default();
    let c = SynthConfig {
        n_nodes: cfg.get("n_nodes")?.unwrap_or(d.n_nodes),
        n_clusters: cfg.get("n_clusters")?.unwrap_or(d.n_clusters),
        cluster_size: cfg.get("cluster_size")?.unwrap_or(d.cluster_size),
        p_in: cfg.get("p_in")?.unwrap_or(d.p_in),
        p_out: cfg.get("p_out")?.unwrap_or(d.p_out),
        horizon: cfg.get("horizon")?.unwrap_or(d.horizon),
        event_len: cfg.get("event_len")?.unwrap_or(d.event_len),
        event_starts: match cfg.raw("event_starts") {
            Some(s) => parse_list(s)?,
            None => d.event_starts,
        },
        participation: cfg.get("participation")?.unwrap_or(d.participation),
        baseline: cfg.get("baseline")?.unwrap_or(d.baseline),
        amplitude: cfg.get("amplitude")?.unwrap_or(d.amplitude),
        isolated_spikes: cfg.get("isolated_spikes")?.unwrap_or(d.isolated_spikes),
        event_guard: cfg.get("event_guard")?.unwrap_or(d.event_guard),
        start: match cfg.raw("start") {
            Some(s) => ingest::parse_hour(s)
                .ok_or_else(|| Error::Config(format!("start {s:?} is not an hour")))?,
            None => d.start,
        },
        seed: cfg.pick(seed, "seed", d.seed)?,
    };
    c.validate()?;
    Ok(c)
}

fn load(path: &Path) -> Result<TemporalGraph> {
    snapshot::load(path)
}

fn load_partition(path: &Path, graph: &TemporalGraph, resolution: f64) -> Result<Partition> {
    let rows = formats::read_partition(open(path)?)?;
    formats::partition_for(graph, &rows, resolution)
}

fn cmd_synth(a: SynthArgs) -> Result<(), StageError> {
    let ctx = Ctx::new(&a.common).at(Stage::Config)?;
    let cfg = synth_config(&ctx.cfg, a.seed).at(Stage::Config)?;
    let out = ctx.need_path(a.out, "out").at(Stage::Config)?;
    let truth = ctx.need_path(a.truth, "truth").at(Stage::Config)?;
    let edges = ctx.path(a.edges, "edges");
    let visits = ctx.path(a.visits, "visits");
    ctx.finish().at(Stage::Config)?;
    let (g, t) = generate(&cfg).at(Stage::Synth)?;
    (|| -> Result<()> {
        snapshot::save(&g, &out)?;
        formats::write_truth(&g, &t, create(&truth)?)?;
        if let Some(p) = edges {
            formats::write_edges(&g, create(p)?)?;
        }
        if let Some(p) = visits {
            formats::write_visits(&g, create(p)?)?;
        }
        Ok(())
    })()
    .at(Stage::Synth)?;
    log::info!(
        "synth: {} nodes, {} edges, {} clusters",
        g.node_count(),
        g.edge_count(),
        t.cluster_count()
    );
    Ok(())
}

fn cmd_ingest(a: IngestArgs) -> Result<(), StageError> {
    let ctx = Ctx::new(&a.common).at(Stage::Config)?;
    let c = &ctx.cfg;
    let (edges, visits, out, report, grid, min_visits) = (|| -> Result<_> {
        let start = match c.pick_opt(a.start, "start")? {
            Some(s) => ingest::parse_hour(&s)
                .ok_or_else(|| Error::Config(format!("start {s:?} is not an hour")))?,
            None => Grid::default().start,
        };
        let grid = Grid {
            start,
            hours: c.pick(a.hours, "hours", Grid::default().hours)?,
        };
        Ok((
            ctx.need_path(a.edges, "edges")?,
            ctx.need_path(a.visits, "visits")?,
            ctx.need_path(a.out, "out")?,
            ctx.path(a.report, "report"),
            grid,
            c.pick(a.min_visits, "min_visits", ingest::DEFAULT_MIN_VISITS)?,
        ))
    })()
    .at(Stage::Config)?;
    ctx.finish().at(Stage::Config)?;
    let (g, summary) =
        pipeline::ingest_files(&edges, &visits, grid, min_visits).at(Stage::Ingest)?;
    snapshot::save(&g, &out).at(Stage::Ingest)?;
    if let Some(r) = report {
        write_json(&summary, r).at(Stage::Ingest)?;
    }
    log::info!("ingest: {} nodes, {} edges", g.node_count(), g.edge_count());
    Ok(())
}

fn cmd_preprocess(a: PreprocessArgs) -> Result<(), StageError> {
    let ctx = Ctx::new(&a.common).at(Stage::Config)?;
    let (input, out, burst, month, mode) = (|| -> Result<_> {
        Ok((
            ctx.need_path(a.snapshot, "snapshot")?,
            ctx.need_path(a.out, "out")?,
            burst_cfg(&ctx, a.n, a.min_burstiness)?,
            ctx.cfg.pick_opt(a.window_month, "window_month")?,
            ctx.cfg.pick(a.mode, "mode", FilterMode::default())?,
        ))
    })()
    .at(Stage::Config)?;
    ctx.finish().at(Stage::Config)?;
    let g = load(&input).at(Stage::Preprocess)?;
    let out_g = match month {
        Some(m) => {
            let w = month_window(&m, g.start(), g.horizon()).at(Stage::Preprocess)?;
            let sliced = g.slice_window(w).at(Stage::Preprocess)?;
            pipeline::burst_filter(&sliced, &burst, FilterMode::Full).at(Stage::Preprocess)?
        }
        None => pipeline::burst_filter(&g, &burst, mode).at(Stage::Preprocess)?,
    };
    snapshot::save(&out_g, &out).at(Stage::Preprocess)?;
    log::info!(
        "preprocess: kept {} of {} nodes",
        out_g.node_count(),
        g.node_count()
    );
    Ok(())
}

fn cmd_learn(a: LearnArgs) -> Result<(), StageError> {
    let ctx = Ctx::new(&a.common).at(Stage::Config)?;
    let (input, out, cfg, threads) = (|| -> Result<_> {
        let cfg = LearnConfig {
            lambda: ctx
                .cfg
                .pick(a.lambda, "lambda", LearnConfig::default().lambda)?,
        };
        cfg.validate()?;
        Ok((
            ctx.need_path(a.snapshot, "snapshot")?,
            ctx.need_path(a.out, "out")?,
            cfg,
            threads(&ctx, a.threads)?,
        ))
    })()
    .at(Stage::Config)?;
    ctx.finish().at(Stage::Config)?;
    let g = load(&input).at(Stage::Learn)?;
    let learned = learn_parallel(&g, &cfg, threads).at(Stage::Learn)?;
    snapshot::save(&learned, &out).at(Stage::Learn)?;
    Ok(())
}

fn cmd_prune(a: PruneArgs) -> Result<(), StageError> {
    let ctx = Ctx::new(&a.common).at(Stage::Config)?;
    let (input, out, min, mapping) = (|| -> Result<_> {
        Ok((
            ctx.need_path(a.snapshot, "snapshot")?,
            ctx.need_path(a.out, "out")?,
            ctx.cfg.pick(
                a.min_component_size,
                "min_component_size",
                pipeline::DEFAULT_MIN_COMPONENT,
            )?,
            ctx.path(a.mapping, "mapping"),
        ))
    })()
    .at(Stage::Config)?;
    ctx.finish().at(Stage::Config)?;
    let g = load(&input).at(Stage::Prune)?;
    let (pruned, map) = g.prune(min);
    snapshot::save(&pruned, &out).at(Stage::Prune)?;
    if let Some(m) = mapping {
        create(m)
            .and_then(|w| formats::write_mapping(&pruned, &map, w))
            .at(Stage::Prune)?;
    }
    log::info!(
        "prune: kept {} of {} nodes",
        pruned.node_count(),
        g.node_count()
    );
    Ok(())
}

fn communities_of(g: &TemporalGraph, resolution: f64, seed: u64) -> Result<Partition> {
    if g.total_weight() > 0.0 {
        Ok(louvain(g, resolution, seed)?)
    } else {
        Ok(Partition::singletons(g.node_count()))
    }
}

fn cmd_communities(a: CommunitiesArgs) -> Result<(), StageError> {
    let ctx = Ctx::new(&a.common).at(Stage::Config)?;
    let (input, out, report, resolution, seed) = (|| -> Result<_> {
        Ok((
            ctx.need_path(a.snapshot, "snapshot")?,
            ctx.need_path(a.out, "out")?,
            ctx.path(a.report, "report"),
            ctx.cfg.pick(a.resolution, "resolution", 1.0)?,
            ctx.cfg.pick(a.seed, "seed", 42)?,
        ))
    })()
    .at(Stage::Config)?;
    ctx.finish().at(Stage::Config)?;
    let g = load(&input).at(Stage::Communities)?;
    let p = communities_of(&g, resolution, seed).at(Stage::Communities)?;
    create(&out)
        .and_then(|w| formats::write_partition(&g, &p, w))
        .at(Stage::Communities)?;
    if let Some(r) = report {
        let rep = crate::report::community_report(&g, &p).at(Stage::Communities)?;
        write_json(&rep, r).at(Stage::Communities)?;
    }
    log::info!("communities: {}", p.community_count());
    Ok(())
}

fn cmd_stats(a: StatsArgs) -> Result<(), StageError> {
    let ctx = Ctx::new(&a.common).at(Stage::Config)?;
    let (input, report, partition, initial, gnuplot, xmin, resolution, seed) = (|| -> Result<_> {
        Ok((
            ctx.need_path(a.snapshot, "snapshot")?,
            ctx.need_path(a.report, "report")?,
            ctx.path(a.partition, "partition"),
            ctx.path(a.initial, "initial"),
            ctx.path(a.gnuplot, "gnuplot"),
            ctx.cfg.pick_opt(a.xmin, "xmin")?,
            ctx.cfg.pick(a.resolution, "resolution", 1.0)?,
            ctx.cfg.pick(a.seed, "seed", 42)?,
        ))
    })()
    .at(Stage::Config)?;
    ctx.finish().at(Stage::Config)?;
    (|| -> Result<()> {
        let g = load(&input)?;
        let p = match partition {
            Some(p) => load_partition(&p, &g, resolution)?,
            None => communities_of(&g, resolution, seed)?,
        };
        let init = match initial {
            Some(path) => {
                let unit = load(&path)?.with_uniform_weights(1.0)?;
                let p = communities_of(&unit, resolution, seed)?;
                Some((unit, p))
            }
            None => None,
        };
        let rep = stats_report(
            &g,
            (g.node_count() > 0).then_some(&p),
            init.as_ref().map(|(g, p)| (g, p)),
            xmin,
        )?;
        write_json(&rep, report)?;
        if let Some(dir) = gnuplot {
            write_gnuplot_files(&rep, dir)?;
        }
        Ok(())
    })()
    .at(Stage::Stats)
}

fn cmd_binarize(a: BinarizeArgs) -> Result<(), StageError> {
    let ctx = Ctx::new(&a.common).at(Stage::Config)?;
    let (input, out, n) = (|| -> Result<_> {
        Ok((
            ctx.need_path(a.snapshot, "snapshot")?,
            ctx.need_path(a.out, "out")?,
            ctx.cfg.pick(a.n, "n", BurstConfig::default().n)?,
        ))
    })()
    .at(Stage::Config)?;
    ctx.finish().at(Stage::Config)?;
    (|| -> Result<()> {
        let g = load(&input)?;
        let p = binarize(&g, n)?;
        formats::write_pattern(&p, g.labels(), create(out)?)
    })()
    .at(Stage::Recall)
}

#[derive(Serialize)]
struct RecallSummary {
    iterations: usize,
    converged: bool,
    two_cycle: bool,
    input_active: usize,
    output_active: usize,
}

fn cmd_recall(a: RecallArgs) -> Result<(), StageError> {
    let ctx = Ctx::new(&a.common).at(Stage::Config)?;
    let (input, pattern, out, report, rcfg, threads) = (|| -> Result<_> {
        Ok((
            ctx.need_path(a.snapshot, "snapshot")?,
            ctx.need_path(a.pattern, "pattern")?,
            ctx.need_path(a.out, "out")?,
            ctx.path(a.report, "report"),
            recall_cfg(&ctx, a.theta, a.max_iter)?,
            threads(&ctx, a.threads)?,
        ))
    })()
    .at(Stage::Config)?;
    ctx.finish().at(Stage::Config)?;
    (|| -> Result<()> {
        let g = load(&input)?;
        let (labels, p) = formats::read_pattern(open(&pattern)?, g.start())?;
        let p0 = formats::align_pattern(&labels, &p, &g)?;
        let r = recall_parallel(&g, &p0, &rcfg, threads)?;
        if !r.converged {
            log::warn!(
                "recall stopped after {} iterations without a fixed point{}",
                r.iterations,
                if r.cycle_partner.is_some() {
                    " (2-cycle)"
                } else {
                    ""
                }
            );
        }
        formats::write_pattern(&r.pattern, g.labels(), create(out)?)?;
        if let Some(path) = report {
            let s = RecallSummary {
                iterations: r.iterations,
                converged: r.converged,
                two_cycle: r.cycle_partner.is_some(),
                input_active: p0.active_count(),
                output_active: r.pattern.active_count(),
            };
            write_json(&s, path)?;
        }
        Ok(())
    })()
    .at(Stage::Recall)
}

fn cmd_eval(a: EvalArgs) -> Result<(), StageError> {
    let ctx = Ctx::new(&a.common).at(Stage::Config)?;
    let (input, cluster, pattern, n, mut ecfg, event_start, rcfg, threads, report) =
        (|| -> Result<_> {
            let d = EvalConfig::default();
            let ecfg = EvalConfig {
                mask_fractions: match ctx.cfg.pick_opt(a.fractions, "fractions")? {
                    Some(f) => parse_fractions(&f)?,
                    None => d.mask_fractions,
                },
                trials: ctx.cfg.pick(a.trials, "trials", d.trials)?,
                event_start: 0,
                event_window: ctx.cfg.pick(a.window, "window", d.event_window)?,
                seed: ctx.cfg.pick(a.seed, "seed", d.seed)?,
            };
            ecfg.validate()?;
            Ok((
                ctx.need_path(a.snapshot, "snapshot")?,
                ctx.need_path(a.cluster, "cluster")?,
                ctx.path(a.pattern, "pattern"),
                ctx.cfg.pick(a.n, "n", BurstConfig::default().n)?,
                ecfg,
                ctx.cfg.pick_opt(a.event_start, "event_start")?,
                recall_cfg(&ctx, a.theta, a.max_iter)?,
                threads(&ctx, a.threads)?,
                ctx.need_path(a.report, "report")?,
            ))
        })()
        .at(Stage::Config)?;
    ctx.finish().at(Stage::Config)?;
    (|| -> Result<()> {
        let g = load(&input)?;
        let members = formats::resolve(&g, &formats::read_cluster(open(&cluster)?)?)?;
        let p = match pattern {
            Some(path) => {
                let (labels, p) = formats::read_pattern(open(&path)?, g.start())?;
                formats::align_pattern(&labels, &p, &g)?
            }
            None => binarize(&g, n)?,
        };
        ecfg.event_start = event_start.unwrap_or_else(|| pipeline::peak_hour(&p, &members));
        let rep = error_curve_parallel(&g, &members, &p, &ecfg, &rcfg, threads)?;
        write_json(&rep, report)
    })()
    .at(Stage::Eval)
}

#[derive(Serialize)]
struct MonthlyReport {
    months: Vec<String>,
    hours: usize,
    /// Per month, per hour: active count after recall minus before.
    difference: Vec<Vec<i64>>,
}

fn cmd_monthly(a: MonthlyArgs) -> Result<(), StageError> {
    let ctx = Ctx::new(&a.common).at(Stage::Config)?;
    let (input, months, n, lcfg, min, rcfg, threads, report) = (|| -> Result<_> {
        let lcfg = LearnConfig {
            lambda: ctx
                .cfg
                .pick(a.lambda, "lambda", LearnConfig::default().lambda)?,
        };
        lcfg.validate()?;
        Ok((
            ctx.need_path(a.snapshot, "snapshot")?,
            ctx.cfg.pick_opt(a.months, "months")?,
            ctx.cfg.pick(a.n, "n", BurstConfig::default().n)?,
            lcfg,
            ctx.cfg.pick(
                a.min_component_size,
                "min_component_size",
                pipeline::DEFAULT_MIN_COMPONENT,
            )?,
            recall_cfg(&ctx, a.theta, a.max_iter)?,
            threads(&ctx, a.threads)?,
            ctx.need_path(a.report, "report")?,
        ))
    })()
    .at(Stage::Config)?;
    ctx.finish().at(Stage::Config)?;
    (|| -> Result<()> {
        let g = load(&input)?;
        let windows = match months {
            Some(list) => parse_list::<String>(&list)?
                .into_iter()
                .map(|m| Ok((m.clone(), month_window(&m, g.start(), g.horizon())?)))
                .collect::<Result<Vec<_>>>()?,
            None => calendar_months(g.start(), g.horizon()),
        };
        let mut graphs = Vec::with_capacity(windows.len());
        for (name, w) in &windows {
            let learned = learn_parallel(&g.slice_window(*w)?, &lcfg, threads)?;
            let (pruned, _) = learned.prune(min);
            log::info!("{name}: {} nodes after pruning", pruned.node_count());
            graphs.push(pruned);
        }
        let pattern = binarize(&g, n)?;
        let difference = monthly_recall_matrix(&graphs, g.labels(), &pattern, &rcfg)?;
        let rep = MonthlyReport {
            months: windows.into_iter().map(|(m, _)| m).collect(),
            hours: g.horizon(),
            difference,
        };
        write_json(&rep, report)
    })()
    .at(Stage::Recall)
}

fn cmd_export(a: ExportArgs) -> Result<(), StageError> {
    let ctx = Ctx::new(&a.common).at(Stage::Config)?;
    let (input, partition, out) = (|| -> Result<_> {
        Ok((
            ctx.need_path(a.snapshot, "snapshot")?,
            ctx.path(a.partition, "partition"),
            ctx.need_path(a.out, "out")?,
        ))
    })()
    .at(Stage::Config)?;
    ctx.finish().at(Stage::Config)?;
    (|| -> Result<()> {
        let g = load(&input)?;
        let p = partition.map(|p| load_partition(&p, &g, 1.0)).transpose()?;
        gexf::export_gexf(&g, p.as_ref(), create(out)?)
    })()
    .at(Stage::Export)
}

fn cmd_run(a: RunArgs) -> Result<(), StageError> {
    let ctx = Ctx::new(&a.common).at(Stage::Config)?;
    if a.common.config.is_none() {
        return Err(Error::Config("run needs --config".into())).at(Stage::Config);
    }
    let o = RunOverrides {
        out_dir: a.out_dir,
        seed: a.seed,
        threads: a.threads,
    };
    let params = RunParams::resolve(&ctx.cfg, &ctx.base, &o).at(Stage::Config)?;
    let m = pipeline::run(&params)?;
    log::info!(
        "run finished in {:.2}s; {} stages",
        m.total_seconds,
        m.stages.len()
    );
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), StageError> {
    match cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Ingest(a) => cmd_ingest(a),
        Command::Preprocess(a) => cmd_preprocess(a),
        Command::Learn(a) => cmd_learn(a),
        Command::Prune(a) => cmd_prune(a),
        Command::Communities(a) => cmd_communities(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Binarize(a) => cmd_binarize(a),
        Command::Recall(a) => cmd_recall(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Monthly(a) => cmd_monthly(a),
        Command::Export(a) => cmd_export(a),
        Command::Run(a) => cmd_run(a),
    }
}
