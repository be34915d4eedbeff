//! Recall evaluation: accuracy under three scoring modes, masked-cluster
//! error curves, and the per-month recall difference curves.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{NodeId, TemporalGraph, TimeWindow};
use crate::hopfield::{mask_pattern, recall, Pattern, RecallConfig};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalConfig {
    /// Fractions of the cluster kept active in the input.
    pub mask_fractions: Vec<f64>,
    pub trials: usize,
    /// Hour offset (pattern column) where the event starts.
    pub event_start: usize,
    pub event_window: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            mask_fractions: (1..=10).map(|k| k as f64 / 10.0).collect(),
            trials: 20,
            event_start: 0,
            event_window: 72,
            seed: 7,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mask_fractions.is_empty() {
            return Err(Error::Config("no mask fractions".into()));
        }
        if let Some(f) = self
            .mask_fractions
            .iter()
            .find(|f| !(**f > 0.0 && **f <= 1.0))
        {
            return Err(Error::Config(format!("mask fraction {f} outside (0, 1]")));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.event_window == 0 {
            return Err(Error::Config("event_window must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ErrorMode {
    /// Strict, over every hour of the pattern.
    FullPeriod,
    /// Strict, over the event window.
    EventWindow,
    /// Per node over the event window: recovered if active at least once.
    RelaxedWindow,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ErrorStat {
    pub mean: f64,
    /// Population standard deviation over trials.
    pub std: f64,
}

impl ErrorStat {
    fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        ErrorStat {
            mean,
            std: libm::sqrt(var),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FractionErrors {
    pub fraction: f64,
    /// Cluster rows kept in each trial's input.
    pub kept: usize,
    pub full_period: ErrorStat,
    pub event_window: ErrorStat,
    pub relaxed_window: ErrorStat,
}

impl FractionErrors {
    pub fn get(&self, mode: ErrorMode) -> ErrorStat {
        match mode {
            ErrorMode::FullPeriod => self.full_period,
            ErrorMode::EventWindow => self.event_window,
            ErrorMode::RelaxedWindow => self.relaxed_window,
        }
    }
}

/// Error `1 − A` statistics per kept fraction.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub cluster_size: usize,
    pub trials: usize,
    pub seed: u64,
    pub event_window: TimeWindow,
    pub rows: Vec<FractionErrors>,
}

fn check_aligned(a: &Pattern, b: &Pattern) -> Result<()> {
    if (a.node_count(), a.hours()) != (b.node_count(), b.hours()) {
        return Err(Error::shape(
            format!("{}×{} pattern", a.node_count(), a.hours()),
            format!("{}×{}", b.node_count(), b.hours()),
        ));
    }
    Ok(())
}

/// Fraction of the original activations recovered.
///
/// Strict mode counts `(node, hour)` cells active in both patterns over the
/// cells active in `original`. Relaxed mode counts nodes active at least once
/// in both over nodes active at least once in `original`. `window = None`
/// scores every hour.
pub fn recall_accuracy(
    original: &Pattern,
    recalled: &Pattern,
    window: Option<TimeWindow>,
    relaxed: bool,
) -> Result<f64> {
    check_aligned(original, recalled)?;
    let range = match window {
        Some(w) if w.end_hour() > original.hours() => {
            return Err(Error::Range(format!(
                "window ending at {} exceeds {} hours",
                w.end_hour(),
                original.hours()
            )))
        }
        Some(w) => w.range(),
        None => 0..original.hours(),
    };
    let (mut hit, mut total) = (0usize, 0usize);
    for i in 0..original.node_count() {
        let o = &original.row(i)[range.clone()];
        let r = &recalled.row(i)[range.clone()];
        if relaxed {
            if o.iter().any(|&c| c > 0) {
                total += 1;
                hit += r.iter().any(|&c| c > 0) as usize;
            }
        } else {
            for (&a, &b) in o.iter().zip(r) {
                if a > 0 {
                    total += 1;
                    hit += (b > 0) as usize;
                }
            }
        }
    }
    if total == 0 {
        return Err(Error::UndefinedAccuracy);
    }
    Ok(hit as f64 / total as f64)
}

/// Cluster rows kept for `fraction`: `⌈fraction · size⌉`, at least 1.
pub fn kept_count(fraction: f64, size: usize) -> usize {
    // tolerate representation error such as 0.3 · 10 = 3.0000000000000004
    let k = libm::ceil(fraction * size as f64 - 1e-9) as usize;
    k.clamp(1, size)
}

/// Trial RNG, independent of trial scheduling.
fn trial_rng(seed: u64, fraction_idx: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((fraction_idx as u64) << 32) | trial as u64);
    rng
}

struct Prepared<'a> {
    graph: &'a TemporalGraph,
    cluster: &'a [NodeId],
    pattern: &'a Pattern,
    original: Pattern,
    event: TimeWindow,
    recall_cfg: RecallConfig,
}

impl Prepared<'_> {
    fn trial(&self, cfg: &EvalConfig, fi: usize, trial: usize) -> Result<[f64; 3]> {
        let k = kept_count(cfg.mask_fractions[fi], self.cluster.len());
        let mut rng = trial_rng(cfg.seed, fi, trial);
        let mut pool = self.cluster.to_vec();
        let (keep, _) = pool.partial_shuffle(&mut rng, k);
        let input = mask_pattern(self.pattern, keep)?;
        let out = recall(self.graph, &input, &self.recall_cfg)?.pattern;
        Ok([
            1.0 - recall_accuracy(&self.original, &out, None, false)?,
            1.0 - recall_accuracy(&self.original, &out, Some(self.event), false)?,
            1.0 - recall_accuracy(&self.original, &out, Some(self.event), true)?,
        ])
    }
}

fn prepare<'a>(
    graph: &'a TemporalGraph,
    cluster: &'a [NodeId],
    pattern: &'a Pattern,
    cfg: &EvalConfig,
    recall_cfg: &RecallConfig,
) -> Result<Prepared<'a>> {
    cfg.validate()?;
    recall_cfg.validate()?;
    if cluster.is_empty() {
        return Err(Error::EmptyInput("cluster"));
    }
    if pattern.node_count() != graph.node_count() {
        return Err(Error::shape(
            format!("{} pattern rows", graph.node_count()),
            pattern.node_count(),
        ));
    }
    let mut seen = BTreeMap::new();
    for &v in cluster {
        if v.index() >= graph.node_count() {
            return Err(Error::NodeNotFound(v.0));
        }
        if seen.insert(v, ()).is_some() {
            return Err(Error::Config(format!("node {v} listed twice in cluster")));
        }
    }
    let event = TimeWindow::new(cfg.event_start, cfg.event_start + cfg.event_window)?
        .clamp(pattern.hours())
        .ok_or_else(|| {
            Error::Range(format!(
                "event start {} is past the last hour {}",
                cfg.event_start,
                pattern.hours()
            ))
        })?;
    let original = mask_pattern(pattern, cluster)?;
    Ok(Prepared {
        graph,
        cluster,
        pattern,
        original,
        event,
        recall_cfg: *recall_cfg,
    })
}

fn summarize(
    cfg: &EvalConfig,
    cluster_size: usize,
    event: TimeWindow,
    errors: &[[f64; 3]],
) -> EvalReport {
    let rows = cfg
        .mask_fractions
        .iter()
        .enumerate()
        .map(|(fi, &fraction)| {
            let trials = &errors[fi * cfg.trials..(fi + 1) * cfg.trials];
            let col = |m: usize| ErrorStat::of(&trials.iter().map(|e| e[m]).collect::<Vec<_>>());
            FractionErrors {
                fraction,
                kept: kept_count(fraction, cluster_size),
                full_period: col(0),
                event_window: col(1),
                relaxed_window: col(2),
            }
        })
        .collect();
    EvalReport {
        cluster_size,
        trials: cfg.trials,
        seed: cfg.seed,
        event_window: event,
        rows,
    }
}

/// For each kept fraction and trial: keep a seeded random subset of the
/// cluster, silence every other row, recall, and score the result against
/// the cluster's rows of `pattern` in all three modes.
pub fn error_curve(
    graph: &TemporalGraph,
    cluster: &[NodeId],
    pattern: &Pattern,
    cfg: &EvalConfig,
    recall_cfg: &RecallConfig,
) -> Result<EvalReport> {
    let prep = prepare(graph, cluster, pattern, cfg, recall_cfg)?;
    let mut errors = Vec::with_capacity(cfg.mask_fractions.len() * cfg.trials);
    for fi in 0..cfg.mask_fractions.len() {
        for t in 0..cfg.trials {
            errors.push(prep.trial(cfg, fi, t)?);
        }
    }
    Ok(summarize(cfg, cluster.len(), prep.event, &errors))
}

/// [`error_curve`] with trials spread over `threads` workers. Same output.
#[cfg(feature = "std")]
pub fn error_curve_parallel(
    graph: &TemporalGraph,
    cluster: &[NodeId],
    pattern: &Pattern,
    cfg: &EvalConfig,
    recall_cfg: &RecallConfig,
    threads: usize,
) -> Result<EvalReport> {
    let prep = prepare(graph, cluster, pattern, cfg, recall_cfg)?;
    let jobs = cfg.mask_fractions.len() * cfg.trials;
    let mut errors = alloc::vec![[0.0; 3]; jobs];
    let per = jobs.div_ceil(threads.max(1));
    let results: Vec<Result<()>> = std::thread::scope(|s| {
        let handles: Vec<_> = errors
            .chunks_mut(per)
            .enumerate()
            .map(|(k, part)| {
                let prep = &prep;
                s.spawn(move || {
                    for (off, slot) in part.iter_mut().enumerate() {
                        let job = k * per + off;
                        *slot = prep.trial(cfg, job / cfg.trials, job % cfg.trials)?;
                    }
                    Ok(())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("trial worker panicked"))
            .collect()
    });
    results.into_iter().collect::<Result<()>>()?;
    Ok(summarize(cfg, cluster.len(), prep.event, &errors))
}

/// For each monthly graph: recall with the whole-period pattern restricted to
/// that graph's nodes, then per hour subtract the input's active count from
/// the output's. `reference_labels` names the rows of `pattern`.
pub fn monthly_recall_matrix(
    months: &[TemporalGraph],
    reference_labels: &[String],
    pattern: &Pattern,
    recall_cfg: &RecallConfig,
) -> Result<Vec<Vec<i64>>> {
    if reference_labels.len() != pattern.node_count() {
        return Err(Error::shape(
            format!("{} pattern rows", reference_labels.len()),
            pattern.node_count(),
        ));
    }
    let row_of: BTreeMap<&str, usize> = reference_labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    months
        .iter()
        .map(|g| {
            let rows = g
                .labels()
                .iter()
                .map(|l| {
                    row_of.get(l.as_str()).copied().ok_or_else(|| {
                        Error::shape(
                            "monthly node present in the reference pattern",
                            format!("unknown label {l:?}"),
                        )
                    })
                })
                .collect::<Result<Vec<usize>>>()?;
            let input = pattern.select_rows(&rows)?;
            let output = recall(g, &input, recall_cfg)?.pattern;
            let (a, b) = (output.active_per_hour(), input.active_per_hour());
            Ok(a.iter()
                .zip(&b)
                .map(|(&x, &y)| x as i64 - y as i64)
                .collect())
        })
        .collect()
}
