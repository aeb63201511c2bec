//! Transparency-graph analysis over TILT documents: parsing, an embedded
//! property graph, entity linkage, graph analytics, synthetic corpora and
//! growth simulation.

pub mod analytics;
pub mod dynamics;
pub mod export;
pub mod graph;
pub mod similarity;
pub mod synth;
pub mod tilt;
