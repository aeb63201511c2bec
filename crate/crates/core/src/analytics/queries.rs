//! Named transparency queries.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use super::{project, AnalyticsError, Projection};
use crate::graph::{query, NodeId, NodeLabel, Pattern, PropertyGraph, Value};
use crate::tilt::IsicSection;

/// Controllers, their sector, and every legal basis cited for each data
/// category: tilt → controller and tilt → dataDisclosed → legalBasis.
const LEGAL_BASES_PATTERN: &str = "(m:meta)-[:HAS]->(t:tilt)-[:HAS]->(c:controller)<-[:HAS]-(t)\
    -[:HAS]->(d:dataDisclosed)-[:HAS]->(l:legalBasis) \
    RETURN c.name, c.sector, d.category, l.reference, c.isic_section";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SectorGroup {
    /// Information and communication, ISIC section J.
    Ic,
    /// Any other section, or no sector stated.
    Other,
}

impl fmt::Display for SectorGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SectorGroup::Ic => "IC",
            SectorGroup::Other => "other",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegalBasisRow {
    pub meta: NodeId,
    pub controller_name: String,
    pub sector: Option<String>,
    pub data_category: String,
    pub legal_basis: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegalBasisAggregate {
    pub group: SectorGroup,
    pub basis: String,
    /// Distinct controllers citing the basis at least once.
    pub controller_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LegalBasisTable {
    pub rows: Vec<LegalBasisRow>,
    /// Sorted by group, then basis.
    pub aggregate: Vec<LegalBasisAggregate>,
}

impl LegalBasisTable {
    pub fn count(&self, group: SectorGroup, basis: &str) -> usize {
        self.aggregate
            .iter()
            .find(|a| a.group == group && a.basis == basis)
            .map_or(0, |a| a.controller_count)
    }
}

fn text(v: &Option<Value>) -> Option<String> {
    v.as_ref().and_then(|v| v.as_str()).map(str::to_string)
}

pub fn legal_bases_by_sector(g: &PropertyGraph) -> LegalBasisTable {
    let pattern = Pattern::parse(LEGAL_BASES_PATTERN).expect("built-in pattern parses");
    let matches = query(g, &pattern).expect("built-in pattern is valid");
    let ic = IsicSection::INFORMATION_AND_COMMUNICATION.to_string();

    let mut citing: BTreeMap<(SectorGroup, String), BTreeSet<NodeId>> = BTreeMap::new();
    let mut rows = Vec::with_capacity(matches.len());
    for m in matches {
        let meta = m.path[0];
        let row = LegalBasisRow {
            meta,
            controller_name: text(&m.values[0]).unwrap_or_default(),
            sector: text(&m.values[1]),
            data_category: text(&m.values[2]).unwrap_or_default(),
            legal_basis: text(&m.values[3]).unwrap_or_default(),
        };
        let group = if text(&m.values[4]).as_deref() == Some(ic.as_str()) {
            SectorGroup::Ic
        } else {
            SectorGroup::Other
        };
        citing.entry((group, row.legal_basis.clone())).or_default().insert(meta);
        rows.push(row);
    }
    LegalBasisTable {
        rows,
        aggregate: citing
            .into_iter()
            .map(|((group, basis), metas)| LegalBasisAggregate { group, basis, controller_count: metas.len() })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistributionKind {
    DataCategoriesPerController,
    PurposesPerController,
    LegalBasisFrequency,
    RecipientsPerController,
}

impl DistributionKind {
    pub const ALL: [DistributionKind; 4] = [
        DistributionKind::DataCategoriesPerController,
        DistributionKind::PurposesPerController,
        DistributionKind::LegalBasisFrequency,
        DistributionKind::RecipientsPerController,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DistributionKind::DataCategoriesPerController => "data_categories_per_controller",
            DistributionKind::PurposesPerController => "purposes_per_controller",
            DistributionKind::LegalBasisFrequency => "legal_basis_frequency",
            DistributionKind::RecipientsPerController => "recipients_per_controller",
        }
    }
}

impl fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistributionKind {
    type Err = AnalyticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| AnalyticsError::InvalidParameter(format!("unknown distribution `{s}`")))
    }
}

/// Histogram key: a per-controller count, or a legal-basis reference.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HistKey {
    Count(u64),
    Label(String),
}

impl fmt::Display for HistKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HistKey::Count(n) => write!(f, "{n}"),
            HistKey::Label(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub kind: DistributionKind,
    pub histogram: BTreeMap<HistKey, usize>,
    /// For the per-controller kinds, the mean count per controller. For
    /// `legal_basis_frequency`, citations per controller.
    pub mean: f64,
    pub controllers: usize,
}

fn descendants(g: &PropertyGraph, meta: NodeId, label: NodeLabel) -> Vec<NodeId> {
    g.subtree(meta)
        .into_iter()
        .filter(|id| g.node(*id).is_some_and(|n| n.label == label))
        .collect()
}

/// Per-controller histograms count every controller, including those with
/// nothing declared. `legal_basis_frequency` histograms the references of all
/// legal-basis citations.
pub fn distribution(g: &PropertyGraph, kind: DistributionKind) -> Distribution {
    let metas = g.meta_nodes();
    let controllers = metas.len();
    let mut histogram = BTreeMap::new();
    let mut total = 0usize;
    let per_controller = match kind {
        DistributionKind::DataCategoriesPerController => Some(NodeLabel::DataDisclosed),
        DistributionKind::PurposesPerController => Some(NodeLabel::Purpose),
        DistributionKind::RecipientsPerController => Some(NodeLabel::Recipient),
        DistributionKind::LegalBasisFrequency => None,
    };
    for &m in &metas {
        match per_controller {
            Some(label) => {
                let n = descendants(g, m, label).len();
                total += n;
                *histogram.entry(HistKey::Count(n as u64)).or_insert(0) += 1;
            }
            None => {
                for l in descendants(g, m, NodeLabel::LegalBasis) {
                    let reference = g.node(l).and_then(|n| n.str_attr("reference")).unwrap_or("").to_string();
                    *histogram.entry(HistKey::Label(reference)).or_insert(0) += 1;
                    total += 1;
                }
            }
        }
    }
    let mean = if controllers == 0 { 0.0 } else { total as f64 / controllers as f64 };
    Distribution { kind, histogram, mean, controllers }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkMember {
    pub meta: NodeId,
    pub meta_id: String,
    pub distance: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharingNetwork {
    /// Breadth-first order; the root comes first at distance 0.
    pub members: Vec<NetworkMember>,
    /// Projected links among members, `(from, to, weight)`.
    pub edges: Vec<(NodeId, NodeId, f64)>,
}

impl SharingNetwork {
    pub fn distance(&self, meta_id: &str) -> Option<usize> {
        self.members.iter().find(|m| m.meta_id == meta_id).map(|m| m.distance)
    }
}

/// Controllers reachable from `meta_id` along outgoing projected links within
/// `max_depth` hops.
pub fn sharing_network(
    g: &PropertyGraph,
    meta_id: &str,
    max_depth: usize,
    rule: &Projection,
) -> Result<SharingNetwork, AnalyticsError> {
    let root = g.meta_by_id(meta_id).ok_or_else(|| AnalyticsError::NotFound(meta_id.to_string()))?;
    let pg = project(g, rule)?;
    let n = pg.len();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in pg.edges() {
        out[e.src].push(e.dst);
    }
    let start = pg.index_of(root).expect("meta nodes are projected");
    let mut dist = vec![usize::MAX; n];
    dist[start] = 0;
    let mut order = vec![start];
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        if dist[u] == max_depth {
            continue;
        }
        for &v in &out[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                order.push(v);
                queue.push_back(v);
            }
        }
    }
    let members = order
        .iter()
        .map(|&i| {
            let meta = pg.nodes()[i];
            NetworkMember {
                meta,
                meta_id: g.node(meta).and_then(|n| n.str_attr("meta_id")).unwrap_or("").to_string(),
                distance: dist[i],
            }
        })
        .collect();
    let edges = pg
        .edges()
        .iter()
        .filter(|e| dist[e.src] != usize::MAX && dist[e.dst] != usize::MAX)
        .map(|e| (pg.nodes()[e.src], pg.nodes()[e.dst], e.weight))
        .collect();
    Ok(SharingNetwork { members, edges })
}
