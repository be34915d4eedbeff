//! Weighted modularity and Louvain community detection.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{NodeId, TemporalGraph};

/// Node → community assignment with dense community ids `0..C`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Partition {
    assignment: Vec<u32>,
    resolution: f64,
}

impl Partition {
    /// Relabel arbitrary community labels densely, in order of first appearance.
    pub fn from_labels(labels: &[u32], resolution: f64) -> Self {
        let mut remap = BTreeMap::new();
        let assignment = labels
            .iter()
            .map(|l| {
                let next = remap.len() as u32;
                *remap.entry(*l).or_insert(next)
            })
            .collect();
        Partition {
            assignment,
            resolution,
        }
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            assignment: (0..n as u32).collect(),
            resolution: 1.0,
        }
    }

    pub fn single(n: usize) -> Self {
        Partition {
            assignment: vec![0; n],
            resolution: 1.0,
        }
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn community_of(&self, node: NodeId) -> Option<u32> {
        self.assignment.get(node.index()).copied()
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn community_count(&self) -> usize {
        self.assignment.iter().max().map_or(0, |&c| c as usize + 1)
    }

    /// Members of each community, ascending.
    pub fn members(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.community_count()];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c as usize].push(NodeId(i as u32));
        }
        out
    }
}

/// Community cardinalities, largest first.
pub fn community_sizes(partition: &Partition) -> Vec<usize> {
    let mut sizes: Vec<usize> = partition.members().iter().map(Vec::len).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

/// `Q = Σ_c [ in_c / m − γ (tot_c / 2m)² ]`, with `in_c` the weight of edges
/// inside `c` and `tot_c` the summed weighted degree of its members.
pub fn modularity(graph: &TemporalGraph, partition: &Partition, resolution: f64) -> Result<f64> {
    if partition.node_count() != graph.node_count() {
        return Err(Error::shape(
            format!("partition over {} nodes", graph.node_count()),
            partition.node_count(),
        ));
    }
    let m = graph.total_weight();
    if !(m > 0.0) {
        return Err(Error::UndefinedModularity);
    }
    let c = partition.community_count();
    let mut inside = vec![0.0; c];
    let mut tot = vec![0.0; c];
    let a = partition.assignment();
    for (&(u, v), &w) in graph.edges().iter().zip(graph.weights()) {
        let (cu, cv) = (a[u.index()] as usize, a[v.index()] as usize);
        if cu == cv {
            inside[cu] += w;
        }
        tot[cu] += w;
        tot[cv] += w;
    }
    let two_m = 2.0 * m;
    Ok(inside
        .iter()
        .zip(&tot)
        .map(|(i, t)| i / m - resolution * (t / two_m) * (t / two_m))
        .sum())
}

/// One level of the Louvain hierarchy: a weighted graph with self-loops.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    self_loop: Vec<f64>,
    strength: Vec<f64>,
    two_m: f64,
}

impl Level {
    fn from_graph(graph: &TemporalGraph) -> Self {
        let n = graph.node_count();
        let mut adj = vec![Vec::new(); n];
        for (&(a, b), &w) in graph.edges().iter().zip(graph.weights()) {
            if w > 0.0 {
                adj[a.index()].push((b.index(), w));
                adj[b.index()].push((a.index(), w));
            }
        }
        Self::with_loops(adj, vec![0.0; n])
    }

    fn with_loops(adj: Vec<Vec<(usize, f64)>>, self_loop: Vec<f64>) -> Self {
        let strength: Vec<f64> = adj
            .iter()
            .zip(&self_loop)
            .map(|(row, l)| row.iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * l)
            .collect();
        let two_m = strength.iter().sum();
        Level {
            adj,
            self_loop,
            strength,
            two_m,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// Greedy local moves until a full pass changes nothing.
    /// Returns the dense community of each level node and whether any node moved.
    fn local_moves(&self, gamma: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
        const MAX_PASSES: usize = 1000;
        let n = self.len();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut tot = self.strength.clone();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);

        let mut link = vec![0.0f64; n];
        let mut seen = vec![false; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut any_move = false;

        for _ in 0..MAX_PASSES {
            let mut moved = false;
            for &i in &order {
                let ci = comm[i];
                let ki = self.strength[i];
                for &(j, w) in &self.adj[i] {
                    let c = comm[j];
                    if !seen[c] {
                        seen[c] = true;
                        touched.push(c);
                    }
                    link[c] += w;
                }
                tot[ci] -= ki;
                let gain = |c: usize, link_c: f64| link_c - gamma * tot[c] * ki / self.two_m;
                let mut best = ci;
                let mut best_gain = gain(ci, link[ci]);
                touched.sort_unstable();
                for &c in &touched {
                    if c == ci {
                        continue;
                    }
                    let g = gain(c, link[c]);
                    if g > best_gain + 1e-12 * (1.0 + best_gain.abs()) {
                        best = c;
                        best_gain = g;
                    }
                }
                for &c in &touched {
                    link[c] = 0.0;
                    seen[c] = false;
                }
                touched.clear();
                tot[best] += ki;
                if best != ci {
                    comm[i] = best;
                    moved = true;
                    any_move = true;
                }
            }
            if !moved {
                break;
            }
        }
        (renumber(&comm), any_move)
    }

    fn modularity(&self, comm: &[usize], gamma: f64) -> f64 {
        let c = comm.iter().max().map_or(0, |&x| x + 1);
        let mut inside = vec![0.0; c];
        let mut tot = vec![0.0; c];
        for i in 0..self.len() {
            inside[comm[i]] += self.self_loop[i];
            tot[comm[i]] += self.strength[i];
            for &(j, w) in &self.adj[i] {
                if i < j && comm[i] == comm[j] {
                    inside[comm[i]] += w;
                }
            }
        }
        let m = self.two_m / 2.0;
        inside
            .iter()
            .zip(&tot)
            .map(|(i, t)| i / m - gamma * (t / self.two_m) * (t / self.two_m))
            .sum()
    }

    fn aggregate(&self, comm: &[usize]) -> Level {
        let c = comm.iter().max().map_or(0, |&x| x + 1);
        let mut self_loop = vec![0.0; c];
        let mut between: Vec<(usize, usize, f64)> = Vec::new();
        for i in 0..self.len() {
            self_loop[comm[i]] += self.self_loop[i];
            for &(j, w) in &self.adj[i] {
                if i < j {
                    let (a, b) = (comm[i], comm[j]);
                    if a == b {
                        self_loop[a] += w;
                    } else {
                        between.push((a.min(b), a.max(b), w));
                    }
                }
            }
        }
        between.sort_by_key(|x| (x.0, x.1));
        let mut adj = vec![Vec::new(); c];
        let mut k = 0;
        while k < between.len() {
            let (a, b, mut w) = between[k];
            k += 1;
            while k < between.len() && between[k].0 == a && between[k].1 == b {
                w += between[k].2;
                k += 1;
            }
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        Level::with_loops(adj, self_loop)
    }
}

/// Dense ids in order of first appearance.
fn renumber(comm: &[usize]) -> Vec<usize> {
    let mut map = vec![usize::MAX; comm.len()];
    let mut next = 0;
    comm.iter()
        .map(|&c| {
            if map[c] == usize::MAX {
                map[c] = next;
                next += 1;
            }
            map[c]
        })
        .collect()
}

/// Louvain result with the modularity reached at each aggregation level,
/// computed on the aggregated graphs.
#[derive(Clone, Debug, PartialEq)]
pub struct LouvainOutcome {
    pub partition: Partition,
    pub level_modularity: Vec<f64>,
}

/// Louvain method: seeded-order greedy local moves, then aggregation, until
/// a level produces no move. Ties go to the current community, then to the
/// lowest community id.
pub fn louvain_levels(graph: &TemporalGraph, resolution: f64, seed: u64) -> Result<LouvainOutcome> {
    if !(graph.total_weight() > 0.0) {
        return Err(Error::UndefinedModularity);
    }
    if !resolution.is_finite() || resolution < 0.0 {
        return Err(Error::Config(format!(
            "resolution must be finite and >= 0, got {resolution}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut node_comm: Vec<usize> = (0..graph.node_count()).collect();
    let mut level = Level::from_graph(graph);
    let mut level_modularity = Vec::new();
    loop {
        let (comm, moved) = level.local_moves(resolution, &mut rng);
        if !moved {
            if level_modularity.is_empty() {
                level_modularity.push(level.modularity(&comm, resolution));
            }
            break;
        }
        level_modularity.push(level.modularity(&comm, resolution));
        for c in node_comm.iter_mut() {
            *c = comm[*c];
        }
        level = level.aggregate(&comm);
    }
    let labels: Vec<u32> = node_comm.iter().map(|&c| c as u32).collect();
    Ok(LouvainOutcome {
        partition: Partition::from_labels(&labels, resolution),
        level_modularity,
    })
}

pub fn louvain(graph: &TemporalGraph, resolution: f64, seed: u64) -> Result<Partition> {
    Ok(louvain_levels(graph, resolution, seed)?.partition)
}

/// Normalized mutual information with arithmetic-mean normalization,
/// `I(A;B) / ((H(A) + H(B)) / 2)`. Two single-cluster labelings score 1.
pub fn normalized_mutual_information(a: &[u32], b: &[u32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::shape(format!("{} labels", a.len()), b.len()));
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("labelings"));
    }
    let n = a.len() as f64;
    let mut joint: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    let mut ca: BTreeMap<u32, usize> = BTreeMap::new();
    let mut cb: BTreeMap<u32, usize> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *ca.entry(x).or_default() += 1;
        *cb.entry(y).or_default() += 1;
    }
    let entropy = |m: &BTreeMap<u32, usize>| -> f64 {
        m.values()
            .map(|&k| {
                let p = k as f64 / n;
                -p * libm::log(p)
            })
            .sum()
    };
    let (ha, hb) = (entropy(&ca), entropy(&cb));
    if ha == 0.0 && hb == 0.0 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for (&(x, y), &k) in &joint {
        let pxy = k as f64 / n;
        let px = ca[&x] as f64 / n;
        let py = cb[&y] as f64 / n;
        mi += pxy * libm::log(pxy / (px * py));
    }
    Ok((mi / ((ha + hb) / 2.0)).clamp(0.0, 1.0))
}
