//! Graph analytics over the meta-level projection of a linked corpus.

mod louvain;
mod pagerank;
mod projection;
mod queries;

pub use louvain::{louvain, louvain_observed, modularity, modularity_of, CommunityAssignment, LouvainConfig};
pub use pagerank::{pagerank, PageRankConfig, RankVector};
pub use projection::{project, Projection, SimilarityWeight, WeightedEdge, WeightedGraph};
pub use queries::{
    distribution, legal_bases_by_sector, sharing_network, Distribution, DistributionKind, HistKey, LegalBasisAggregate,
    LegalBasisRow, LegalBasisTable, NetworkMember, SectorGroup, SharingNetwork,
};

use thiserror::Error;

use crate::graph::{GraphError, NodeId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("projection is empty: the graph has no meta nodes")]
    EmptyProjection,
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("node {0} has no community")]
    Coverage(NodeId),
    #[error("edge weight {0} is not a positive finite number")]
    InvalidWeight(f64),
    #[error("edge endpoint {0} out of range")]
    EndpointOutOfRange(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no controller with meta id `{0}`")]
    NotFound(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
