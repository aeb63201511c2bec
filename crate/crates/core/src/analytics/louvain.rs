//! Louvain community detection on weighted undirected graphs.
//!
//! Conventions: the adjacency of an undirected edge `{i, j}` of weight `w` is
//! `A_ij = A_ji = w`, a self-loop contributes `A_ii = 2w`, `k_i = Σ_j A_ij`
//! and `2m = Σ_i k_i`. Modularity is
//! `Q = (1/2m) Σ_ij [A_ij − k_i k_j / 2m] δ(c_i, c_j)`, and 0 when `m = 0`.
//!
//! A local move of node `i` from community `D` to `C` changes `Q` by
//! `ΔQ(D→i) + ΔQ(i→C)` where, with `i` already taken out of `D`,
//! `ΔQ(i→C) = k_i,C / m − Σtot_C · k_i / 2m²` and `ΔQ(D→i) = −ΔQ(i→D)`.
//! Terms that do not depend on the target community cancel and are omitted.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{AnalyticsError, WeightedGraph};
use crate::graph::NodeId;

/// Moves must gain more than this to be taken. Guards against cycling on
/// floating-point noise.
const MOVE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LouvainConfig {
    /// A level whose local moves gain less than this ends the run.
    pub min_gain: f64,
    pub max_passes: usize,
    /// Shuffles the node visit order. `None` visits in ascending index order.
    pub seed: Option<u64>,
    /// Starting communities. Nodes missing from the map start alone.
    pub prior: Option<BTreeMap<NodeId, usize>>,
}

impl Default for LouvainConfig {
    fn default() -> Self {
        Self {
            min_gain: 1e-7,
            max_passes: 32,
            seed: None,
            prior: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommunityAssignment {
    nodes: Vec<NodeId>,
    /// Dense community id per node, numbered by first appearance.
    communities: Vec<usize>,
    pub modularity: f64,
    /// Levels (local-move phases) executed.
    pub passes: usize,
}

impl CommunityAssignment {
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn communities(&self) -> &[usize] {
        &self.communities
    }

    pub fn community_of(&self, id: NodeId) -> Option<usize> {
        self.nodes.iter().position(|n| *n == id).map(|i| self.communities[i])
    }

    pub fn count(&self) -> usize {
        self.communities.iter().max().map_or(0, |m| m + 1)
    }

    /// Members of each community, in community order.
    pub fn members(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.count()];
        for (n, c) in self.nodes.iter().zip(&self.communities) {
            out[*c].push(*n);
        }
        out
    }

    pub fn to_map(&self) -> BTreeMap<NodeId, usize> {
        self.nodes.iter().copied().zip(self.communities.iter().copied()).collect()
    }
}

/// Renumbers labels densely in order of first appearance.
fn dense(labels: &[usize]) -> Vec<usize> {
    let mut seen = HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = seen.len();
            *seen.entry(*l).or_insert(next)
        })
        .collect()
}

/// Modularity of `assignment` (indexed like `pg.nodes()`). Directed graphs
/// are read as undirected.
pub fn modularity_of(pg: &WeightedGraph, assignment: &[usize]) -> Result<f64, AnalyticsError> {
    if assignment.len() != pg.len() {
        let missing = pg.nodes().get(assignment.len()).copied().unwrap_or(NodeId(0));
        return Err(AnalyticsError::Coverage(missing));
    }
    let ug = pg.to_undirected();
    let n = ug.len();
    let mut k = vec![0.0; n];
    for e in ug.edges() {
        k[e.src] += e.weight;
        k[e.dst] += e.weight;
    }
    let two_m: f64 = k.iter().sum();
    if two_m == 0.0 {
        return Ok(0.0);
    }
    // Σ_ij A_ij δ(c_i, c_j) and Σ_c (Σ_{i∈c} k_i)²: the double sum grouped by
    // community.
    let mut inside = 0.0;
    for e in ug.edges() {
        if assignment[e.src] == assignment[e.dst] {
            inside += 2.0 * e.weight;
        }
    }
    let mut tot: HashMap<usize, f64> = HashMap::new();
    for (i, c) in assignment.iter().enumerate() {
        *tot.entry(*c).or_insert(0.0) += k[i];
    }
    let mut tots: Vec<(usize, f64)> = tot.into_iter().collect();
    tots.sort_by_key(|(c, _)| *c);
    let expected: f64 = tots.iter().map(|(_, t)| t * t).sum();
    Ok(inside / two_m - expected / (two_m * two_m))
}

/// Modularity of a node → community map. Every node of `pg` must be mapped.
pub fn modularity(pg: &WeightedGraph, assignment: &BTreeMap<NodeId, usize>) -> Result<f64, AnalyticsError> {
    let labels = pg
        .nodes()
        .iter()
        .map(|id| assignment.get(id).copied().ok_or(AnalyticsError::Coverage(*id)))
        .collect::<Result<Vec<_>, _>>()?;
    modularity_of(pg, &labels)
}

/// One aggregation level: node `i` has neighbours `adj[i]` (no self entries),
/// a self-loop of weight `self_loop[i]` and degree `k[i]`.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    self_loop: Vec<f64>,
    k: Vec<f64>,
}

impl Level {
    fn from_graph(ug: &WeightedGraph) -> Self {
        let n = ug.len();
        let mut adj = vec![Vec::new(); n];
        let mut self_loop = vec![0.0; n];
        let mut k = vec![0.0; n];
        for e in ug.edges() {
            if e.src == e.dst {
                self_loop[e.src] += e.weight;
            } else {
                adj[e.src].push((e.dst, e.weight));
                adj[e.dst].push((e.src, e.weight));
            }
            k[e.src] += e.weight;
            k[e.dst] += e.weight;
        }
        Self { adj, self_loop, k }
    }

    fn len(&self) -> usize {
        self.k.len()
    }

    fn modularity(&self, comm: &[usize], m: f64) -> f64 {
        if m == 0.0 {
            return 0.0;
        }
        let mut inside = 0.0;
        let mut tot = vec![0.0; self.len()];
        for i in 0..self.len() {
            inside += 2.0 * self.self_loop[i];
            for &(j, w) in &self.adj[i] {
                if comm[i] == comm[j] {
                    inside += w;
                }
            }
            tot[comm[i]] += self.k[i];
        }
        let two_m = 2.0 * m;
        inside / two_m - tot.iter().map(|t| t * t).sum::<f64>() / (two_m * two_m)
    }

    /// Collapses communities (dense ids `0..count`) into super-nodes.
    fn aggregate(&self, comm: &[usize], count: usize) -> Level {
        let mut self_loop = vec![0.0; count];
        let mut k = vec![0.0; count];
        let mut between: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for i in 0..self.len() {
            let ci = comm[i];
            self_loop[ci] += self.self_loop[i];
            k[ci] += self.k[i];
            for &(j, w) in &self.adj[i] {
                let cj = comm[j];
                if ci == cj {
                    // each internal edge is seen from both ends
                    self_loop[ci] += w / 2.0;
                } else if ci < cj {
                    *between.entry((ci, cj)).or_insert(0.0) += w;
                }
            }
        }
        let mut adj = vec![Vec::new(); count];
        for ((a, b), w) in between {
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        Level { adj, self_loop, k }
    }
}

struct MoveState<'a> {
    level: &'a Level,
    m: f64,
    comm: Vec<usize>,
    tot: Vec<f64>,
    size: Vec<usize>,
    empty: Vec<usize>,
    // scratch: weight from the current node to each community
    link: Vec<f64>,
    touched: Vec<usize>,
}

impl<'a> MoveState<'a> {
    fn new(level: &'a Level, m: f64, comm: Vec<usize>) -> Self {
        let n = level.len();
        let mut tot = vec![0.0; n];
        let mut size = vec![0; n];
        for (i, &c) in comm.iter().enumerate() {
            tot[c] += level.k[i];
            size[c] += 1;
        }
        let empty = (0..n).rev().filter(|c| size[*c] == 0).collect();
        Self {
            level,
            m,
            comm,
            tot,
            size,
            empty,
            link: vec![0.0; n],
            touched: Vec::new(),
        }
    }

    /// Tries to move node `i`; returns the modularity change (0 if it stays).
    fn visit(&mut self, i: usize) -> f64 {
        let lv = self.level;
        let ki = lv.k[i];
        let d = self.comm[i];
        for &(j, w) in &lv.adj[i] {
            let c = self.comm[j];
            if self.link[c] == 0.0 {
                self.touched.push(c);
            }
            self.link[c] += w;
        }
        self.tot[d] -= ki;
        self.size[d] -= 1;

        let m = self.m;
        let gain = |link: f64, tot: f64| link / m - tot * ki / (2.0 * m * m);
        let stay = gain(self.link[d], self.tot[d]);
        let mut best = d;
        let mut best_gain = stay;
        self.touched.sort_unstable();
        for &c in &self.touched {
            let g = gain(self.link[c], self.tot[c]);
            if g > best_gain {
                best = c;
                best_gain = g;
            }
        }
        // a fresh community: no links, no degree
        let mut fresh = false;
        if self.size[d] > 0 && 0.0 > best_gain && !self.empty.is_empty() {
            best_gain = 0.0;
            fresh = true;
        }
        if best_gain - stay <= MOVE_EPSILON {
            best = d;
            best_gain = stay;
            fresh = false;
        }
        if fresh {
            best = self.empty.pop().expect("checked non-empty");
        }

        for &c in &self.touched {
            self.link[c] = 0.0;
        }
        self.touched.clear();
        self.tot[best] += ki;
        self.size[best] += 1;
        if best != d && self.size[d] == 0 {
            self.empty.push(d);
        }
        self.comm[i] = best;
        best_gain - stay
    }
}

/// Runs Louvain with the default (no-op) observer.
pub fn louvain(pg: &WeightedGraph, cfg: &LouvainConfig) -> Result<CommunityAssignment, AnalyticsError> {
    louvain_observed(pg, cfg, |_, _| {})
}

/// Runs Louvain and calls `observer(tracked_q, assignment)` after every
/// accepted local move, where `tracked_q` is the incrementally maintained
/// modularity and `assignment` maps each input node to its current community.
pub fn louvain_observed<F>(pg: &WeightedGraph, cfg: &LouvainConfig, mut observer: F) -> Result<CommunityAssignment, AnalyticsError>
where
    F: FnMut(f64, &[usize]),
{
    if pg.is_empty() {
        return Err(AnalyticsError::EmptyGraph);
    }
    if cfg.max_passes == 0 {
        return Err(AnalyticsError::InvalidParameter("max_passes must be at least 1".into()));
    }
    let ug = pg.to_undirected();
    let n = ug.len();
    let mut level = Level::from_graph(&ug);
    let m = ug.total_weight();

    let start: Vec<usize> = match &cfg.prior {
        Some(prior) => {
            // unseen nodes get labels past every prior label
            let offset = prior.values().max().map_or(0, |x| x + 1);
            dense(&ug.nodes().iter().enumerate().map(|(i, id)| prior.get(id).copied().unwrap_or(offset + i)).collect::<Vec<_>>())
        }
        None => (0..n).collect(),
    };
    let mut rng = cfg.seed.map(ChaCha8Rng::seed_from_u64);

    // original node → node of the current level
    let mut to_level: Vec<usize> = (0..n).collect();
    let mut comm = start;
    let mut q = level.modularity(&comm, m);
    let mut passes = 0;
    let mut scratch = vec![0; n];

    loop {
        passes += 1;
        if m == 0.0 {
            // no edges: every assignment scores 0
            break;
        }
        let q_before = q;
        let mut state = MoveState::new(&level, m, comm);
        let mut order: Vec<usize> = (0..level.len()).collect();
        if let Some(rng) = rng.as_mut() {
            order.shuffle(rng);
        }
        let mut moved_any = false;
        loop {
            let mut moved = false;
            for &i in &order {
                let delta = state.visit(i);
                if delta != 0.0 {
                    moved = true;
                    q += delta;
                    for (o, slot) in scratch.iter_mut().enumerate() {
                        *slot = state.comm[to_level[o]];
                    }
                    observer(q, &scratch);
                }
            }
            if !moved {
                break;
            }
            moved_any = true;
        }
        comm = state.comm;
        if !moved_any || q - q_before < cfg.min_gain || passes >= cfg.max_passes {
            break;
        }
        let ids = dense(&comm);
        let count = ids.iter().max().map_or(0, |x| x + 1);
        level = level.aggregate(&ids, count);
        for slot in to_level.iter_mut() {
            *slot = ids[*slot];
        }
        comm = (0..count).collect();
    }

    let labels = dense(&to_level.iter().map(|l| comm[*l]).collect::<Vec<_>>());
    let modularity = modularity_of(&ug, &labels)?;
    Ok(CommunityAssignment {
        nodes: ug.nodes().to_vec(),
        communities: labels,
        modularity,
        passes,
    })
}
