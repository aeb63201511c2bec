use std::collections::{BTreeMap, HashMap};

use super::AnalyticsError;
use crate::graph::{EdgeLabel, NodeId, PropertyGraph};
use crate::similarity::Metric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SimilarityWeight {
    /// Each kept `SIMILAR_TO` edge contributes its score.
    #[default]
    Score,
    /// Each kept `SIMILAR_TO` edge contributes 1.
    Binary,
}

/// Which cross-document edges become links between meta nodes.
///
/// Every edge endpoint is mapped to the meta node at the root of its
/// document. `SHARES_WITH` keeps its direction. A `SIMILAR_TO` edge says the
/// target (a recipient) is the same entity as the source (a controller), so it
/// projects from the target's document to the source's document: data flows
/// from the document naming the recipient to the matched controller.
/// Edges within one document are dropped; parallel edges are summed.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub shares_with: bool,
    pub similar_to: bool,
    /// `SIMILAR_TO` edges are kept only when `score > similarity_cut`.
    pub similarity_cut: f64,
    /// Restricts `SIMILAR_TO` edges to one metric.
    pub metric: Option<Metric>,
    pub weighting: SimilarityWeight,
}

impl Default for Projection {
    fn default() -> Self {
        Self {
            shares_with: true,
            similar_to: true,
            similarity_cut: 0.0,
            metric: None,
            weighting: SimilarityWeight::Score,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedEdge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

/// A weighted graph over dense indices `0..n`, each index carrying the
/// [`NodeId`] it stands for. Parallel edges are collapsed by summing. In the
/// undirected form every edge is stored once with `src <= dst`. Edges are
/// kept sorted by `(src, dst)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    nodes: Vec<NodeId>,
    index: HashMap<NodeId, usize>,
    directed: bool,
    edges: Vec<WeightedEdge>,
}

impl WeightedGraph {
    pub fn new(
        nodes: Vec<NodeId>,
        directed: bool,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, AnalyticsError> {
        let n = nodes.len();
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (s, d, w) in edges {
            if !(w.is_finite() && w > 0.0) {
                return Err(AnalyticsError::InvalidWeight(w));
            }
            for end in [s, d] {
                if end >= n {
                    return Err(AnalyticsError::EndpointOutOfRange(end));
                }
            }
            let key = if directed { (s, d) } else { (s.min(d), s.max(d)) };
            *acc.entry(key).or_insert(0.0) += w;
        }
        let index = nodes.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        Ok(Self {
            nodes,
            index,
            directed,
            edges: acc.into_iter().map(|((src, dst), weight)| WeightedEdge { src, dst, weight }).collect(),
        })
    }

    /// Nodes get ids `NodeId(0)..NodeId(n)`.
    pub fn with_indices(n: usize, directed: bool, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self, AnalyticsError> {
        Self::new((0..n as u64).map(NodeId).collect(), directed, edges)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn edges(&self) -> &[WeightedEdge] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Merges both directions of every edge.
    pub fn to_undirected(&self) -> WeightedGraph {
        if !self.directed {
            return self.clone();
        }
        Self::new(self.nodes.clone(), false, self.edges.iter().map(|e| (e.src, e.dst, e.weight)))
            .expect("edges were already validated")
    }
}

/// Collapses each document to its meta node. The result is directed; use
/// [`WeightedGraph::to_undirected`] for community detection.
pub fn project(g: &PropertyGraph, rule: &Projection) -> Result<WeightedGraph, AnalyticsError> {
    let metas = g.meta_nodes();
    if metas.is_empty() {
        return Err(AnalyticsError::EmptyProjection);
    }
    let index: HashMap<NodeId, usize> = metas.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let mut links = Vec::new();
    for e in g.edges() {
        let (from, to, weight) = match e.label {
            EdgeLabel::Has => continue,
            EdgeLabel::SharesWith if rule.shares_with => (e.src, e.dst, e.weight()),
            EdgeLabel::SimilarTo if rule.similar_to => {
                if let Some(m) = rule.metric {
                    if e.attrs.get("metric").and_then(|v| v.as_str()) != Some(m.as_str()) {
                        continue;
                    }
                }
                let score = e.attrs.get("score").and_then(|v| v.as_f64()).unwrap_or(0.0);
                if score <= rule.similarity_cut {
                    continue;
                }
                let w = match rule.weighting {
                    SimilarityWeight::Score => score,
                    SimilarityWeight::Binary => 1.0,
                };
                (e.dst, e.src, w)
            }
            _ => continue,
        };
        let (Some(a), Some(b)) = (g.root_meta(from), g.root_meta(to)) else { continue };
        if a == b || weight <= 0.0 {
            continue;
        }
        links.push((index[&a], index[&b], weight));
    }
    WeightedGraph::new(metas, true, links)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attrs;
    use crate::graph::NodeLabel;

    fn doc(g: &mut PropertyGraph, id: &str) -> (NodeId, NodeId) {
        let m = g.create_node(NodeLabel::Meta, attrs! {"meta_id" => id}, None).unwrap();
        let t = g.create_node(NodeLabel::Tilt, attrs!(), Some(m)).unwrap();
        let d = g.create_node(NodeLabel::DataDisclosed, attrs! {"category" => "c"}, Some(t)).unwrap();
        let r = g.create_node(NodeLabel::Recipient, attrs! {"name" => "x"}, Some(d)).unwrap();
        (m, r)
    }

    fn sim(g: &mut PropertyGraph, meta: NodeId, recipient: NodeId, score: f64) {
        g.create_edge(meta, recipient, EdgeLabel::SimilarTo, attrs! {"metric" => "sorensen_dice", "score" => score})
            .unwrap();
    }

    #[test]
    fn one_similarity_edge_gives_one_link() {
        let mut g = PropertyGraph::new();
        let (a, ra) = doc(&mut g, "a");
        let (b, _) = doc(&mut g, "b");
        sim(&mut g, b, ra, 0.9);
        let p = project(&g, &Projection::default()).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.edges().len(), 1);
        let e = p.edges()[0];
        // a names a recipient matched to b: a → b
        assert_eq!((p.nodes()[e.src], p.nodes()[e.dst]), (a, b));
        assert_eq!(e.weight, 0.9);
    }

    #[test]
    fn score_cut_and_weighting() {
        let mut g = PropertyGraph::new();
        let (a, ra) = doc(&mut g, "a");
        let (b, rb) = doc(&mut g, "b");
        let (c, _) = doc(&mut g, "c");
        sim(&mut g, b, ra, 0.7);
        sim(&mut g, a, rb, 0.8);
        sim(&mut g, c, rb, 0.9);
        let rule = Projection { similarity_cut: 0.75, ..Projection::default() };
        let u = project(&g, &rule).unwrap().to_undirected();
        let w: Vec<_> = u.edges().iter().map(|e| (u.nodes()[e.src], u.nodes()[e.dst], e.weight)).collect();
        assert_eq!(w, vec![(a, b, 0.8), (b, c, 0.9)]);

        let binary = Projection { weighting: SimilarityWeight::Binary, ..Projection::default() };
        let u = project(&g, &binary).unwrap().to_undirected();
        assert_eq!(u.edges()[0].weight, 2.0);
    }

    #[test]
    fn no_cross_edges_gives_isolated_nodes() {
        let mut g = PropertyGraph::new();
        doc(&mut g, "a");
        doc(&mut g, "b");
        let p = project(&g, &Projection::default()).unwrap();
        assert_eq!(p.len(), 2);
        assert!(p.edges().is_empty());
        assert_eq!(project(&PropertyGraph::new(), &Projection::default()), Err(AnalyticsError::EmptyProjection));
    }

    #[test]
    fn shares_with_weights_sum_and_self_loops_drop() {
        let mut g = PropertyGraph::new();
        let (a, ra) = doc(&mut g, "a");
        let (b, _) = doc(&mut g, "b");
        g.create_edge(a, b, EdgeLabel::SharesWith, attrs! {"weight" => 2.0}).unwrap();
        g.create_edge(a, b, EdgeLabel::SharesWith, attrs!()).unwrap();
        g.create_edge(a, ra, EdgeLabel::SharesWith, attrs!()).unwrap();
        let p = project(&g, &Projection::default()).unwrap();
        assert_eq!(p.edges(), &[WeightedEdge { src: 0, dst: 1, weight: 3.0 }]);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(WeightedGraph::with_indices(2, false, [(0, 1, 0.0)]).is_err());
        assert!(WeightedGraph::with_indices(2, false, [(0, 1, f64::NAN)]).is_err());
        assert!(WeightedGraph::with_indices(2, false, [(0, 2, 1.0)]).is_err());
    }
}
