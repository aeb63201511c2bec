use super::{AnalyticsError, WeightedGraph};
use crate::graph::NodeId;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankConfig {
    pub damping: f64,
    /// Stop once the L1 change between iterations is below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        Self {
            damping: 0.85,
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankVector {
    nodes: Vec<NodeId>,
    scores: Vec<f64>,
    pub damping: f64,
    pub iterations_used: usize,
    /// False when `max_iter` ran out before the tolerance was met. The scores
    /// are still the last iterate.
    pub converged: bool,
}

impl RankVector {
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn score(&self, id: NodeId) -> Option<f64> {
        self.nodes.iter().position(|n| *n == id).map(|i| self.scores[i])
    }

    /// `(node, score)` by descending score, ties by node id.
    pub fn ranked(&self) -> Vec<(NodeId, f64)> {
        let mut v: Vec<_> = self.nodes.iter().copied().zip(self.scores.iter().copied()).collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        v
    }
}

/// Weighted PageRank by power iteration with uniform teleport. A node without
/// outgoing weight spreads its mass uniformly. Undirected graphs are walked
/// in both directions.
pub fn pagerank(pg: &WeightedGraph, cfg: &PageRankConfig) -> Result<RankVector, AnalyticsError> {
    let n = pg.len();
    if n == 0 {
        return Err(AnalyticsError::EmptyGraph);
    }
    if !(cfg.damping > 0.0 && cfg.damping < 1.0) {
        return Err(AnalyticsError::InvalidParameter(format!("damping {} outside (0, 1)", cfg.damping)));
    }
    if !(cfg.tol > 0.0) {
        return Err(AnalyticsError::InvalidParameter(format!("tolerance {} must be positive", cfg.tol)));
    }

    let mut arcs: Vec<(usize, usize, f64)> = Vec::with_capacity(pg.edges().len() * 2);
    for e in pg.edges() {
        arcs.push((e.src, e.dst, e.weight));
        if !pg.is_directed() && e.src != e.dst {
            arcs.push((e.dst, e.src, e.weight));
        }
    }
    let mut out = vec![0.0; n];
    for &(s, _, w) in &arcs {
        out[s] += w;
    }

    let d = cfg.damping;
    let nf = n as f64;
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut iterations_used = 0;
    let mut converged = false;
    while iterations_used < cfg.max_iter {
        iterations_used += 1;
        let dangling: f64 = (0..n).filter(|&i| out[i] == 0.0).map(|i| rank[i]).sum();
        let base = (1.0 - d) / nf + d * dangling / nf;
        next.iter_mut().for_each(|x| *x = base);
        for &(s, t, w) in &arcs {
            next[t] += d * rank[s] * w / out[s];
        }
        // renormalize against drift
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let change: f64 = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if change < cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(RankVector {
        nodes: pg.nodes().to_vec(),
        scores: rank,
        damping: d,
        iterations_used,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_cycle_is_uniform() {
        let g = WeightedGraph::with_indices(3, true, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]).unwrap();
        let r = pagerank(&g, &PageRankConfig::default()).unwrap();
        for s in r.scores() {
            assert!((s - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!(r.converged);
    }

    #[test]
    fn mutual_pair() {
        let g = WeightedGraph::with_indices(2, true, [(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let r = pagerank(&g, &PageRankConfig::default()).unwrap();
        assert_eq!(r.scores(), &[0.5, 0.5]);
    }

    #[test]
    fn chain_with_dangling_end() {
        // a = (1-d)/2 + d*b/2 with a + b = 1 gives a = 1/(2+d)
        let g = WeightedGraph::with_indices(2, true, [(0, 1, 1.0)]).unwrap();
        let r = pagerank(&g, &PageRankConfig { tol: 1e-14, max_iter: 1000, ..PageRankConfig::default() }).unwrap();
        let d: f64 = 0.85;
        let a = 1.0 / (2.0 + d);
        assert!((r.scores()[0] - a).abs() < 1e-10, "{} vs {a}", r.scores()[0]);
        assert!((r.scores().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reports_non_convergence() {
        let g = WeightedGraph::with_indices(2, true, [(0, 1, 1.0)]).unwrap();
        let r = pagerank(&g, &PageRankConfig { max_iter: 2, ..PageRankConfig::default() }).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations_used, 2);
    }

    #[test]
    fn rejects_bad_damping() {
        let g = WeightedGraph::with_indices(1, true, []).unwrap();
        assert!(pagerank(&g, &PageRankConfig { damping: 1.0, ..PageRankConfig::default() }).is_err());
    }
}
