//! Seeded simulation of how the data-sharing network evolves: new sharing
//! edges, acquisitions (controller merges) and periodic re-clustering.

use std::collections::{BTreeMap, BTreeSet};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{self, pagerank, project, AnalyticsError, LouvainConfig, PageRankConfig, Projection};
use crate::attrs;
use crate::graph::{EdgeId, EdgeLabel, GraphError, NodeId, NodeLabel, PropertyGraph, Value};
use crate::similarity::{clean_text, jaro_winkler, CleaningPolicy};
use crate::synth::sample_poisson;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("cannot merge `{0}` with itself")]
    SelfMerge(String),
    #[error("no controller with meta id `{0}`")]
    NotFound(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
}

/// Added to every pair's name similarity under
/// [`MergePairRule::SimilarityWeighted`] so dissimilar pairs stay possible.
pub const SIMILARITY_EPSILON: f64 = 1e-3;

const STREAM_EDGE_COUNT: u64 = 11;
const STREAM_ATTACH: u64 = 12;
const STREAM_MERGE: u64 = 13;
const STREAM_LOUVAIN: u64 = 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EdgeCount {
    Fixed(u64),
    Poisson { poisson: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttachmentRule {
    /// Source and target uniform.
    Uniform,
    /// Source uniform, target with probability proportional to its current
    /// PageRank.
    CentralityWeighted,
    /// Source uniform, target uniform among controllers sharing at least one
    /// data category with it; uniform over all when there is none.
    CategoryMatched,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergePairRule {
    Uniform,
    /// Pair probability proportional to Jaro–Winkler similarity of the
    /// cleaned controller names plus [`SIMILARITY_EPSILON`].
    SimilarityWeighted,
}

fn default_top_k() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    pub iterations: usize,
    pub edges_per_iteration: EdgeCount,
    pub attachment_rule: AttachmentRule,
    pub p_merge: f64,
    pub merge_pair_rule: MergePairRule,
    pub recluster_every: usize,
    pub seed: u64,
    /// Seed each re-clustering with the previous communities.
    #[serde(default)]
    pub reuse_prior: bool,
    /// Size of the PageRank leaderboard in each metrics sample.
    #[serde(default = "default_top_k")]
    pub top_k: usize,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            iterations: 10,
            edges_per_iteration: EdgeCount::Fixed(1),
            attachment_rule: AttachmentRule::Uniform,
            p_merge: 0.0,
            merge_pair_rule: MergePairRule::Uniform,
            recluster_every: 1,
            seed: 0,
            reuse_prior: false,
            top_k: default_top_k(),
        }
    }
}

impl DynamicsConfig {
    pub fn from_toml(text: &str) -> Result<Self, DynamicsError> {
        let cfg: Self = toml::from_str(text).map_err(|e| DynamicsError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |m: String| Err(DynamicsError::Config(m));
        if !(0.0..=1.0).contains(&self.p_merge) {
            return bad(format!("p_merge must be in [0, 1], got {}", self.p_merge));
        }
        if self.recluster_every == 0 {
            return bad("recluster_every must be positive".into());
        }
        if let EdgeCount::Poisson { poisson } = self.edges_per_iteration {
            if !(poisson.is_finite() && poisson >= 0.0) {
                return bad(format!("Poisson edge mean must be finite and >= 0, got {poisson}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    EdgeAdded { src: String, dst: String },
    Merged { acquirer: String, absorbed: String },
    Reclustered { communities: usize, modularity: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub iteration: usize,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsSample {
    pub iteration: usize,
    pub controllers: usize,
    pub node_count: usize,
    pub edge_count: usize,
    pub projected_edges: usize,
    pub communities: usize,
    pub modularity: f64,
    pub top_pagerank: Vec<(String, f64)>,
    pub data_categories: BTreeMap<String, usize>,
    pub third_countries: BTreeMap<String, usize>,
    pub purposes: BTreeMap<String, usize>,
}

/// Per-iteration bookkeeping, recorded after the iteration's mutations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IterationCounts {
    pub iteration: usize,
    pub controllers: usize,
    pub cumulative_merges: usize,
    pub edges_added: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timeline {
    /// At t = 0 and after every `recluster_every`-th iteration.
    pub samples: Vec<MetricsSample>,
    /// One entry per iteration, t = 0 included.
    pub counts: Vec<IterationCounts>,
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub events: Vec<Event>,
    pub timeline: Timeline,
    pub graph: PropertyGraph,
}

fn meta_id_of(g: &PropertyGraph, meta: NodeId) -> String {
    g.node(meta).and_then(|n| n.str_attr("meta_id")).unwrap_or_default().to_string()
}

fn only_child(g: &PropertyGraph, parent: NodeId, label: NodeLabel) -> Option<NodeId> {
    g.children_with_label(parent, label).first().copied()
}

fn append_list(g: &PropertyGraph, node: NodeId, key: &str, items: &[String]) -> Option<String> {
    let mut list: Vec<String> = g
        .node(node)
        .and_then(|n| n.str_attr(key))
        .map(|s| s.split(',').filter(|x| !x.is_empty()).map(str::to_string).collect())
        .unwrap_or_default();
    for item in items {
        if !item.is_empty() && !list.contains(item) {
            list.push(item.clone());
        }
    }
    (!list.is_empty()).then(|| list.join(","))
}

/// Collapses parallel cross edges among those incident to `nodes`:
/// `SHARES_WITH` weights are summed, `SIMILAR_TO` keeps the highest score per
/// metric.
fn collapse_parallel(g: &mut PropertyGraph, nodes: &[NodeId]) -> Result<(), GraphError> {
    let mut groups: BTreeMap<(NodeId, NodeId, EdgeLabel, String), Vec<EdgeId>> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    for &n in nodes {
        for e in g.out_edges(n).chain(g.in_edges(n)) {
            if e.label == EdgeLabel::Has || !seen.insert(e.id) {
                continue;
            }
            let metric = e.attrs.get("metric").and_then(|v| v.as_str()).unwrap_or("").to_string();
            groups.entry((e.src, e.dst, e.label, metric)).or_default().push(e.id);
        }
    }
    for ((_, _, label, _), ids) in groups {
        if ids.len() < 2 {
            continue;
        }
        let keep = ids[0];
        let update = match label {
            EdgeLabel::SharesWith => {
                let total: f64 = ids.iter().filter_map(|id| g.edge(*id)).map(|e| e.weight()).sum();
                attrs! {"weight" => total}
            }
            _ => {
                let best = ids
                    .iter()
                    .filter_map(|id| g.edge(*id))
                    .max_by(|a, b| {
                        let s = |e: &crate::graph::Edge| e.attrs.get("score").and_then(Value::as_f64).unwrap_or(0.0);
                        s(a).total_cmp(&s(b))
                    })
                    .map(|e| e.attrs.clone())
                    .unwrap_or_default();
                best
            }
        };
        g.update_edge_attrs(keep, update)?;
        for id in &ids[1..] {
            g.delete_edge(*id)?;
        }
    }
    Ok(())
}

/// Merges controller `b` into controller `a` (a acquires b) and returns
/// `a`'s meta id.
///
/// b's data-disclosed entries move under a's tilt node, cross-document edges
/// touching b's meta, tilt or controller node are rewired to a's counterpart
/// (edges between a and b disappear), parallel edges are collapsed, and b's
/// three top nodes are removed. a's meta node lists the absorbed meta ids in
/// its `absorbed` attribute.
pub fn merge_controllers(g: &mut PropertyGraph, a: &str, b: &str) -> Result<String, DynamicsError> {
    if a == b {
        return Err(DynamicsError::SelfMerge(a.to_string()));
    }
    let ma = g.meta_by_id(a).ok_or_else(|| DynamicsError::NotFound(a.to_string()))?;
    let mb = g.meta_by_id(b).ok_or_else(|| DynamicsError::NotFound(b.to_string()))?;
    let missing = |what: &str, id: &str| GraphError::InvariantViolation(format!("document `{id}` has no {what} node"));
    let ta = only_child(g, ma, NodeLabel::Tilt).ok_or_else(|| missing("tilt", a))?;
    let tb = only_child(g, mb, NodeLabel::Tilt).ok_or_else(|| missing("tilt", b))?;
    let ca = only_child(g, ta, NodeLabel::Controller).ok_or_else(|| missing("controller", a))?;
    let cb = only_child(g, tb, NodeLabel::Controller).ok_or_else(|| missing("controller", b))?;

    for d in g.children_with_label(tb, NodeLabel::DataDisclosed) {
        g.reparent(d, ta)?;
    }
    for (from, to) in [(mb, ma), (tb, ta), (cb, ca)] {
        g.rewire_cross_edges(from, to)?;
    }
    collapse_parallel(g, &[ma, ta, ca])?;

    let mut absorbed = vec![b.to_string()];
    if let Some(prior) = g.node(mb).and_then(|n| n.str_attr("absorbed")) {
        absorbed.extend(prior.split(',').map(str::to_string));
    }
    let mut meta_update = crate::graph::Attrs::new();
    if let Some(list) = append_list(g, ma, "absorbed", &absorbed) {
        meta_update.insert("absorbed".into(), list.into());
    }
    g.update_node_attrs(ma, meta_update)?;

    let b_countries: Vec<String> = g
        .node(tb)
        .and_then(|n| n.str_attr("third_countries"))
        .map(|s| s.split(',').map(str::to_string).collect())
        .unwrap_or_default();
    if let Some(list) = append_list(g, ta, "third_countries", &b_countries) {
        let mut sorted: Vec<&str> = list.split(',').collect();
        sorted.sort_unstable();
        g.update_node_attrs(ta, attrs! {"third_countries" => sorted.join(",")})?;
    }

    let mut ctrl_update = crate::graph::Attrs::new();
    for (key, into) in [("country", "absorbed_country"), ("sector", "absorbed_sector")] {
        let v: Vec<String> = g.node(cb).and_then(|n| n.str_attr(key)).map(|s| vec![s.to_string()]).unwrap_or_default();
        if let Some(list) = append_list(g, ca, into, &v) {
            ctrl_update.insert(into.into(), list.into());
        }
    }
    g.update_node_attrs(ca, ctrl_update)?;

    g.delete_node(mb)?;
    Ok(a.to_string())
}

fn count_attr(g: &PropertyGraph, label: NodeLabel, key: &str) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for n in g.nodes_with_label(label) {
        if let Some(v) = n.str_attr(key) {
            *out.entry(v.to_string()).or_insert(0) += 1;
        }
    }
    out
}

fn third_country_histogram(g: &PropertyGraph) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for n in g.nodes_with_label(NodeLabel::Tilt) {
        for c in n.str_attr("third_countries").unwrap_or("").split(',').filter(|c| !c.is_empty()) {
            *out.entry(c.to_string()).or_insert(0) += 1;
        }
    }
    out
}

struct Sampler<'a> {
    cfg: &'a DynamicsConfig,
    prior: Option<BTreeMap<NodeId, usize>>,
    louvain_rng: ChaCha8Rng,
}

impl Sampler<'_> {
    fn sample(&mut self, g: &PropertyGraph, iteration: usize) -> Result<MetricsSample, DynamicsError> {
        let directed = project(g, &Projection::default())?;
        let undirected = directed.to_undirected();
        let cfg = LouvainConfig {
            seed: Some(self.louvain_rng.random()),
            prior: if self.cfg.reuse_prior { self.prior.clone() } else { None },
            ..LouvainConfig::default()
        };
        let communities = analytics::louvain(&undirected, &cfg)?;
        self.prior = Some(communities.to_map());
        let ranks = pagerank(&directed, &PageRankConfig::default())?;
        let top_pagerank = ranks
            .ranked()
            .into_iter()
            .take(self.cfg.top_k)
            .map(|(id, s)| (meta_id_of(g, id), s))
            .collect();
        Ok(MetricsSample {
            iteration,
            controllers: directed.len(),
            node_count: g.node_count(),
            edge_count: g.edge_count(),
            projected_edges: directed.edges().len(),
            communities: communities.count(),
            modularity: communities.modularity,
            top_pagerank,
            data_categories: count_attr(g, NodeLabel::DataDisclosed, "category"),
            third_countries: third_country_histogram(g),
            purposes: count_attr(g, NodeLabel::Purpose, "purpose"),
        })
    }
}

fn categories_by_meta(g: &PropertyGraph, metas: &[NodeId]) -> Vec<BTreeSet<String>> {
    metas
        .iter()
        .map(|&m| {
            g.subtree(m)
                .into_iter()
                .filter_map(|id| g.node(id))
                .filter(|n| n.label == NodeLabel::DataDisclosed)
                .filter_map(|n| n.str_attr("category").map(str::to_string))
                .collect()
        })
        .collect()
}

fn pick_endpoints(
    g: &PropertyGraph,
    rule: AttachmentRule,
    metas: &[NodeId],
    rng: &mut ChaCha8Rng,
) -> Result<(NodeId, NodeId), DynamicsError> {
    let n = metas.len();
    let src = rng.random_range(0..n);
    let others = |rng: &mut ChaCha8Rng| {
        let j = rng.random_range(0..n - 1);
        if j >= src {
            j + 1
        } else {
            j
        }
    };
    let dst = match rule {
        AttachmentRule::Uniform => others(rng),
        AttachmentRule::CentralityWeighted => {
            let ranks = pagerank(&project(g, &Projection::default())?, &PageRankConfig::default())?;
            let weights: Vec<f64> = metas
                .iter()
                .enumerate()
                .map(|(i, m)| if i == src { 0.0 } else { ranks.score(*m).unwrap_or(0.0) })
                .collect();
            WeightedIndex::new(&weights).map(|w| w.sample(rng)).unwrap_or_else(|_| others(rng))
        }
        AttachmentRule::CategoryMatched => {
            let cats = categories_by_meta(g, metas);
            let matching: Vec<usize> = (0..n).filter(|&j| j != src && !cats[src].is_disjoint(&cats[j])).collect();
            if matching.is_empty() {
                others(rng)
            } else {
                matching[rng.random_range(0..matching.len())]
            }
        }
    };
    Ok((metas[src], metas[dst]))
}

fn pick_merge_pair(g: &PropertyGraph, rule: MergePairRule, metas: &[NodeId], rng: &mut ChaCha8Rng) -> (NodeId, NodeId) {
    let n = metas.len();
    let (i, j) = match rule {
        MergePairRule::Uniform => {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n - 1);
            (i, if j >= i { j + 1 } else { j })
        }
        MergePairRule::SimilarityWeighted => {
            let names: Vec<String> = metas
                .iter()
                .map(|m| clean_text(g.node(*m).and_then(|x| x.str_attr("name")).unwrap_or(""), &CleaningPolicy::ALL))
                .collect();
            let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
            let mut weights = Vec::with_capacity(n * (n - 1) / 2);
            for i in 0..n {
                for j in i + 1..n {
                    pairs.push((i, j));
                    weights.push(jaro_winkler(&names[i], &names[j]) + SIMILARITY_EPSILON);
                }
            }
            let (i, j) = pairs[WeightedIndex::new(&weights).expect("weights are positive").sample(rng)];
            if rng.random::<bool>() {
                (i, j)
            } else {
                (j, i)
            }
        }
    };
    (metas[i], metas[j])
}

fn add_sharing_edge(g: &mut PropertyGraph, src: NodeId, dst: NodeId) -> Result<(), GraphError> {
    let existing = g
        .out_edges(src)
        .find(|e| e.dst == dst && e.label == EdgeLabel::SharesWith)
        .map(|e| (e.id, e.weight()));
    match existing {
        Some((id, w)) => g.update_edge_attrs(id, attrs! {"weight" => w + 1.0}),
        None => g.create_edge(src, dst, EdgeLabel::SharesWith, attrs! {"weight" => 1.0}).map(|_| ()),
    }
}

/// Runs the simulation on a copy of `g0`.
///
/// Each iteration first adds sharing edges, then possibly merges one pair of
/// controllers, then, every `recluster_every` iterations, re-runs Louvain and
/// PageRank on the meta-level projection and records a metrics sample.
pub fn simulate(g0: &PropertyGraph, cfg: &DynamicsConfig) -> Result<SimulationResult, DynamicsError> {
    cfg.validate()?;
    let mut g = g0.clone();
    let mut count_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    count_rng.set_stream(STREAM_EDGE_COUNT);
    let mut attach_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    attach_rng.set_stream(STREAM_ATTACH);
    let mut merge_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    merge_rng.set_stream(STREAM_MERGE);
    let mut louvain_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    louvain_rng.set_stream(STREAM_LOUVAIN);

    let mut sampler = Sampler { cfg, prior: None, louvain_rng };
    let mut events = Vec::new();
    let mut samples = vec![sampler.sample(&g, 0)?];
    let mut counts = vec![IterationCounts {
        iteration: 0,
        controllers: g.meta_nodes().len(),
        cumulative_merges: 0,
        edges_added: 0,
    }];
    let mut merges = 0;

    for t in 1..=cfg.iterations {
        let k = match cfg.edges_per_iteration {
            EdgeCount::Fixed(k) => k,
            EdgeCount::Poisson { poisson } => sample_poisson(&mut count_rng, poisson),
        };
        let mut added = 0;
        for _ in 0..k {
            let metas = g.meta_nodes();
            if metas.len() < 2 {
                break;
            }
            let (src, dst) = pick_endpoints(&g, cfg.attachment_rule, &metas, &mut attach_rng)?;
            add_sharing_edge(&mut g, src, dst)?;
            added += 1;
            events.push(Event {
                iteration: t,
                kind: EventKind::EdgeAdded { src: meta_id_of(&g, src), dst: meta_id_of(&g, dst) },
            });
        }

        let roll: f64 = merge_rng.random();
        let metas = g.meta_nodes();
        if roll < cfg.p_merge && metas.len() >= 2 {
            let (a, b) = pick_merge_pair(&g, cfg.merge_pair_rule, &metas, &mut merge_rng);
            let (a, b) = (meta_id_of(&g, a), meta_id_of(&g, b));
            merge_controllers(&mut g, &a, &b)?;
            merges += 1;
            events.push(Event { iteration: t, kind: EventKind::Merged { acquirer: a, absorbed: b } });
        }

        if t % cfg.recluster_every == 0 {
            let s = sampler.sample(&g, t)?;
            events.push(Event {
                iteration: t,
                kind: EventKind::Reclustered { communities: s.communities, modularity: s.modularity },
            });
            samples.push(s);
        }
        counts.push(IterationCounts {
            iteration: t,
            controllers: g.meta_nodes().len(),
            cumulative_merges: merges,
            edges_added: added,
        });
    }

    Ok(SimulationResult { events, timeline: Timeline { samples, counts }, graph: g })
}

/// Meta ids that appear in any event.
pub fn event_ids(e: &Event) -> Vec<&str> {
    match &e.kind {
        EventKind::EdgeAdded { src, dst } => vec![src, dst],
        EventKind::Merged { acquirer, absorbed } => vec![acquirer, absorbed],
        EventKind::Reclustered { .. } => vec![],
    }
}

/// Events as tab-separated lines: iteration, kind, then payload fields.
pub fn events_to_tsv(events: &[Event]) -> String {
    let mut out = String::from("iteration\tkind\tpayload\n");
    for e in events {
        let (kind, payload) = match &e.kind {
            EventKind::EdgeAdded { src, dst } => ("edge_added", format!("{src}\t{dst}")),
            EventKind::Merged { acquirer, absorbed } => ("merged", format!("{acquirer}\t{absorbed}")),
            EventKind::Reclustered { communities, modularity } => ("reclustered", format!("{communities}\t{modularity}")),
        };
        out.push_str(&format!("{}\t{kind}\t{payload}\n", e.iteration));
    }
    out
}
