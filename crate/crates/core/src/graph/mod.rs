//! In-memory property graph.
//!
//! Nodes carry a label from a closed set and a map of scalar attributes.
//! Edges are directed and labeled. `HAS` edges describe structural
//! containment and form a forest rooted at `meta` nodes: every other node is
//! created under exactly one parent and keeps it until it is deleted or
//! explicitly re-parented. Cross-document edges (`SIMILAR_TO`,
//! `SHARES_WITH`) may connect any two nodes.
//!
//! Node and edge ids are assigned by the store, monotonically increasing.
//! External identity (the TILT `meta._id`) lives in node attributes.
//!
//! The graph is a plain value: `clone()` yields an independent snapshot that
//! readers can use while the original keeps being mutated.

mod ingest;
mod query;
mod snapshot;

pub use ingest::{ingest, ingest_with, IngestOptions};
pub use query::{query, EdgeDirection, EdgeStep, NodeStep, Pattern, Predicate, PredicateOp, Projection, QueryRow};
pub use snapshot::{attrs_from_json, attrs_to_json, load_snapshot, save_snapshot, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};
pub(crate) use snapshot::value_from_json;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeLabel {
    Meta,
    Tilt,
    Controller,
    DataDisclosed,
    Purpose,
    LegalBasis,
    Storage,
    Recipient,
}

impl NodeLabel {
    pub const ALL: [NodeLabel; 8] = [
        NodeLabel::Meta,
        NodeLabel::Tilt,
        NodeLabel::Controller,
        NodeLabel::DataDisclosed,
        NodeLabel::Purpose,
        NodeLabel::LegalBasis,
        NodeLabel::Storage,
        NodeLabel::Recipient,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeLabel::Meta => "meta",
            NodeLabel::Tilt => "tilt",
            NodeLabel::Controller => "controller",
            NodeLabel::DataDisclosed => "dataDisclosed",
            NodeLabel::Purpose => "purpose",
            NodeLabel::LegalBasis => "legalBasis",
            NodeLabel::Storage => "storage",
            NodeLabel::Recipient => "recipient",
        }
    }
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NodeLabel {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        // `legalBases` is the spelling used in TILT itself.
        match s {
            "legalBases" => return Ok(NodeLabel::LegalBasis),
            "recipients" => return Ok(NodeLabel::Recipient),
            _ => {}
        }
        NodeLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| GraphError::UnknownLabel(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeLabel {
    Has,
    SimilarTo,
    SharesWith,
}

impl EdgeLabel {
    pub const ALL: [EdgeLabel; 3] = [EdgeLabel::Has, EdgeLabel::SimilarTo, EdgeLabel::SharesWith];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeLabel::Has => "HAS",
            EdgeLabel::SimilarTo => "SIMILAR_TO",
            EdgeLabel::SharesWith => "SHARES_WITH",
        }
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EdgeLabel {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EdgeLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| GraphError::UnknownLabel(s.to_string()))
    }
}

/// Scalar attribute value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl Value {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Float(f) => Some(*f),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Str(_) => "string",
            Value::Int(_) => "integer",
            Value::Float(_) => "float",
            Value::Bool(_) => "boolean",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Str(s) => f.write_str(s),
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{x}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Str(s)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

pub type Attrs = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub label: NodeLabel,
    pub attrs: Attrs,
}

impl Node {
    pub fn attr(&self, key: &str) -> Option<&Value> {
        self.attrs.get(key)
    }

    pub fn str_attr(&self, key: &str) -> Option<&str> {
        self.attrs.get(key).and_then(Value::as_str)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: EdgeId,
    pub src: NodeId,
    pub dst: NodeId,
    pub label: EdgeLabel,
    pub attrs: Attrs,
}

impl Edge {
    /// `weight` attribute, defaulting to 1.
    pub fn weight(&self) -> f64 {
        self.attrs.get("weight").and_then(Value::as_f64).unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("node {0} not found")]
    NodeNotFound(NodeId),
    #[error("edge {0} not found")]
    EdgeNotFound(EdgeId),
    #[error("no document with meta id `{0}`")]
    MetaNotFound(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("document `{0}` is already ingested")]
    Duplicate(String),
    #[error("document `{meta_id}` has validation errors: {first}")]
    InvalidDocument { meta_id: String, first: String },
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("pattern error: {0}")]
    Pattern(String),
    #[error("snapshot format error at line {line}: {message}")]
    Snapshot { line: usize, message: String },
}

/// Mutations accepted by [`PropertyGraph::apply`].
#[derive(Debug, Clone, PartialEq)]
pub enum CrudOp {
    /// Non-meta nodes must name their structural parent; meta nodes must not.
    CreateNode {
        label: NodeLabel,
        attrs: Attrs,
        parent: Option<NodeId>,
    },
    /// Sets (or overwrites) the given attributes on a node or an edge.
    UpdateAttrs { target: CrudTarget, attrs: Attrs },
    DeleteNode(NodeId),
    CreateEdge {
        src: NodeId,
        dst: NodeId,
        label: EdgeLabel,
        attrs: Attrs,
    },
    DeleteEdge(EdgeId),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrudTarget {
    Node(NodeId),
    Edge(EdgeId),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrudOutcome {
    Node(NodeId),
    Edge(EdgeId),
    Done,
}

#[derive(Debug, Clone, Default)]
pub struct PropertyGraph {
    nodes: BTreeMap<NodeId, Node>,
    edges: BTreeMap<EdgeId, Edge>,
    out_edges: BTreeMap<NodeId, BTreeSet<EdgeId>>,
    in_edges: BTreeMap<NodeId, BTreeSet<EdgeId>>,
    by_label: BTreeMap<NodeLabel, BTreeSet<NodeId>>,
    by_attr_key: BTreeMap<String, BTreeSet<NodeId>>,
    meta_index: BTreeMap<String, NodeId>,
    next_node: u64,
    next_edge: u64,
}

/// Two graphs are equal when they hold the same nodes, edges and id counters.
/// Indexes are derived data and are not compared.
impl PartialEq for PropertyGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
            && self.edges == other.edges
            && self.next_node == other.next_node
            && self.next_edge == other.next_edge
    }
}

fn check_attrs(attrs: &Attrs) -> Result<(), GraphError> {
    for (k, v) in attrs {
        if let Value::Float(x) = v {
            if !x.is_finite() {
                return Err(GraphError::InvariantViolation(format!(
                    "attribute `{k}` is not a finite number"
                )));
            }
        }
    }
    Ok(())
}

impl PropertyGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(&id)
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.get(&id)
    }

    /// All nodes in ascending id order.
    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    /// All edges in ascending id order.
    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values()
    }

    pub fn nodes_with_label(&self, label: NodeLabel) -> impl Iterator<Item = &Node> + '_ {
        self.by_label
            .get(&label)
            .into_iter()
            .flatten()
            .map(move |id| &self.nodes[id])
    }

    /// Nodes that carry an attribute with this key.
    pub fn nodes_with_attr(&self, key: &str) -> impl Iterator<Item = &Node> + '_ {
        self.by_attr_key
            .get(key)
            .into_iter()
            .flatten()
            .map(move |id| &self.nodes[id])
    }

    pub fn out_edges(&self, id: NodeId) -> impl Iterator<Item = &Edge> + '_ {
        self.out_edges
            .get(&id)
            .into_iter()
            .flatten()
            .map(move |e| &self.edges[e])
    }

    pub fn in_edges(&self, id: NodeId) -> impl Iterator<Item = &Edge> + '_ {
        self.in_edges
            .get(&id)
            .into_iter()
            .flatten()
            .map(move |e| &self.edges[e])
    }

    /// Structural children (targets of outgoing `HAS` edges), ascending ids.
    pub fn children(&self, id: NodeId) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = self
            .out_edges(id)
            .filter(|e| e.label == EdgeLabel::Has)
            .map(|e| e.dst)
            .collect();
        v.sort();
        v
    }

    pub fn children_with_label(&self, id: NodeId, label: NodeLabel) -> Vec<NodeId> {
        self.children(id)
            .into_iter()
            .filter(|c| self.nodes[c].label == label)
            .collect()
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.in_edges(id).find(|e| e.label == EdgeLabel::Has).map(|e| e.src)
    }

    /// The meta node at the root of the structural tree containing `id`.
    pub fn root_meta(&self, id: NodeId) -> Option<NodeId> {
        let mut cur = id;
        // Bounded walk: the forest invariant forbids cycles, the bound makes a
        // broken invariant fail loudly instead of hanging.
        for _ in 0..=self.nodes.len() {
            let node = self.nodes.get(&cur)?;
            if node.label == NodeLabel::Meta {
                return Some(cur);
            }
            cur = self.parent(cur)?;
        }
        None
    }

    /// All nodes of the structural subtree rooted at `id`, including `id`.
    pub fn subtree(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            if !self.nodes.contains_key(&n) {
                continue;
            }
            out.push(n);
            stack.extend(self.children(n));
        }
        out.sort();
        out
    }

    pub fn meta_by_id(&self, meta_id: &str) -> Option<NodeId> {
        self.meta_index.get(meta_id).copied()
    }

    /// Meta nodes with their `meta_id`, in ascending node id order.
    pub fn meta_nodes(&self) -> Vec<NodeId> {
        self.nodes_with_label(NodeLabel::Meta).map(|n| n.id).collect()
    }

    fn require_node(&self, id: NodeId) -> Result<&Node, GraphError> {
        self.nodes.get(&id).ok_or(GraphError::NodeNotFound(id))
    }

    fn index_attrs(&mut self, id: NodeId, attrs: &Attrs) {
        for k in attrs.keys() {
            self.by_attr_key.entry(k.clone()).or_default().insert(id);
        }
    }

    fn unindex_attrs(&mut self, id: NodeId, attrs: &Attrs) {
        for k in attrs.keys() {
            if let Some(set) = self.by_attr_key.get_mut(k) {
                set.remove(&id);
                if set.is_empty() {
                    self.by_attr_key.remove(k);
                }
            }
        }
    }

    /// Creates a node. Meta nodes are roots; every other node is attached to
    /// `parent` with a `HAS` edge in the same step.
    pub fn create_node(
        &mut self,
        label: NodeLabel,
        attrs: Attrs,
        parent: Option<NodeId>,
    ) -> Result<NodeId, GraphError> {
        check_attrs(&attrs)?;
        match (label, parent) {
            (NodeLabel::Meta, Some(_)) => {
                return Err(GraphError::InvariantViolation(
                    "meta nodes cannot have a structural parent".into(),
                ))
            }
            (NodeLabel::Meta, None) => {
                if let Some(Value::Str(mid)) = attrs.get("meta_id") {
                    if self.meta_index.contains_key(mid) {
                        return Err(GraphError::InvariantViolation(format!(
                            "meta id `{mid}` already present"
                        )));
                    }
                }
            }
            (_, None) => {
                return Err(GraphError::InvariantViolation(format!(
                    "{label} nodes need a structural parent"
                )))
            }
            (_, Some(p)) => {
                self.require_node(p)?;
            }
        }
        let id = NodeId(self.next_node);
        self.next_node += 1;
        if label == NodeLabel::Meta {
            if let Some(Value::Str(mid)) = attrs.get("meta_id") {
                self.meta_index.insert(mid.clone(), id);
            }
        }
        self.index_attrs(id, &attrs);
        self.by_label.entry(label).or_default().insert(id);
        self.nodes.insert(id, Node { id, label, attrs });
        if let Some(p) = parent {
            self.insert_edge(p, id, EdgeLabel::Has, Attrs::new());
        }
        Ok(id)
    }

    fn insert_edge(&mut self, src: NodeId, dst: NodeId, label: EdgeLabel, attrs: Attrs) -> EdgeId {
        let id = EdgeId(self.next_edge);
        self.next_edge += 1;
        self.out_edges.entry(src).or_default().insert(id);
        self.in_edges.entry(dst).or_default().insert(id);
        self.edges.insert(
            id,
            Edge {
                id,
                src,
                dst,
                label,
                attrs,
            },
        );
        id
    }

    /// Creates a cross-document edge. `HAS` edges are managed through
    /// [`create_node`](Self::create_node) and [`reparent`](Self::reparent) only.
    pub fn create_edge(
        &mut self,
        src: NodeId,
        dst: NodeId,
        label: EdgeLabel,
        attrs: Attrs,
    ) -> Result<EdgeId, GraphError> {
        self.require_node(src)?;
        self.require_node(dst)?;
        check_attrs(&attrs)?;
        if label == EdgeLabel::Has {
            let msg = if self.parent(dst).is_some() || self.nodes[&dst].label == NodeLabel::Meta {
                format!("{dst} already has a structural parent or is a root")
            } else {
                format!("{dst} is not reachable from a meta node")
            };
            return Err(GraphError::InvariantViolation(msg));
        }
        Ok(self.insert_edge(src, dst, label, attrs))
    }

    pub fn delete_edge(&mut self, id: EdgeId) -> Result<(), GraphError> {
        let edge = self.edges.get(&id).ok_or(GraphError::EdgeNotFound(id))?;
        if edge.label == EdgeLabel::Has && self.nodes.contains_key(&edge.dst) {
            return Err(GraphError::InvariantViolation(format!(
                "removing {id} would orphan {}",
                edge.dst
            )));
        }
        self.remove_edge_unchecked(id);
        Ok(())
    }

    fn remove_edge_unchecked(&mut self, id: EdgeId) -> Option<Edge> {
        let edge = self.edges.remove(&id)?;
        if let Some(s) = self.out_edges.get_mut(&edge.src) {
            s.remove(&id);
            if s.is_empty() {
                self.out_edges.remove(&edge.src);
            }
        }
        if let Some(s) = self.in_edges.get_mut(&edge.dst) {
            s.remove(&id);
            if s.is_empty() {
                self.in_edges.remove(&edge.dst);
            }
        }
        Some(edge)
    }

    /// Deletes a node, its structural subtree, and every edge incident to any
    /// of the removed nodes. Returns the removed node ids.
    pub fn delete_node(&mut self, id: NodeId) -> Result<Vec<NodeId>, GraphError> {
        self.require_node(id)?;
        let doomed = self.subtree(id);
        for &n in &doomed {
            let incident: Vec<EdgeId> = self
                .out_edges
                .get(&n)
                .into_iter()
                .flatten()
                .chain(self.in_edges.get(&n).into_iter().flatten())
                .copied()
                .collect();
            for e in incident {
                self.remove_edge_unchecked(e);
            }
        }
        for &n in &doomed {
            let node = self.nodes.remove(&n).expect("subtree nodes exist");
            self.unindex_attrs(n, &node.attrs);
            if let Some(set) = self.by_label.get_mut(&node.label) {
                set.remove(&n);
            }
            if node.label == NodeLabel::Meta {
                if let Some(Value::Str(mid)) = node.attrs.get("meta_id") {
                    if self.meta_index.get(mid) == Some(&n) {
                        self.meta_index.remove(mid);
                    }
                }
            }
        }
        Ok(doomed)
    }

    /// Sets attributes on a node. `meta_id` on meta nodes is immutable.
    pub fn update_node_attrs(&mut self, id: NodeId, attrs: Attrs) -> Result<(), GraphError> {
        check_attrs(&attrs)?;
        let node = self.require_node(id)?;
        if node.label == NodeLabel::Meta && attrs.contains_key("meta_id") {
            let current = node.attrs.get("meta_id");
            if current != attrs.get("meta_id") {
                return Err(GraphError::InvariantViolation("meta_id cannot be changed".into()));
            }
        }
        self.index_attrs(id, &attrs);
        let node = self.nodes.get_mut(&id).expect("checked above");
        node.attrs.extend(attrs);
        Ok(())
    }

    pub fn remove_node_attr(&mut self, id: NodeId, key: &str) -> Result<Option<Value>, GraphError> {
        let node = self.nodes.get_mut(&id).ok_or(GraphError::NodeNotFound(id))?;
        if node.label == NodeLabel::Meta && key == "meta_id" {
            return Err(GraphError::InvariantViolation("meta_id cannot be removed".into()));
        }
        let old = node.attrs.remove(key);
        if old.is_some() {
            if let Some(set) = self.by_attr_key.get_mut(key) {
                set.remove(&id);
            }
        }
        Ok(old)
    }

    pub fn update_edge_attrs(&mut self, id: EdgeId, attrs: Attrs) -> Result<(), GraphError> {
        check_attrs(&attrs)?;
        let edge = self.edges.get_mut(&id).ok_or(GraphError::EdgeNotFound(id))?;
        edge.attrs.extend(attrs);
        Ok(())
    }

    /// Moves `child` (with its subtree) under `new_parent`.
    pub fn reparent(&mut self, child: NodeId, new_parent: NodeId) -> Result<(), GraphError> {
        self.require_node(new_parent)?;
        let node = self.require_node(child)?;
        if node.label == NodeLabel::Meta {
            return Err(GraphError::InvariantViolation("meta nodes cannot be re-parented".into()));
        }
        if self.subtree(child).contains(&new_parent) {
            return Err(GraphError::InvariantViolation(format!(
                "{new_parent} lies inside the subtree of {child}"
            )));
        }
        let old: Vec<EdgeId> = self
            .in_edges(child)
            .filter(|e| e.label == EdgeLabel::Has)
            .map(|e| e.id)
            .collect();
        for e in old {
            self.remove_edge_unchecked(e);
        }
        self.insert_edge(new_parent, child, EdgeLabel::Has, Attrs::new());
        Ok(())
    }

    /// Rewires every non-`HAS` edge incident to `from` so it touches `to`
    /// instead. Edges that would become self-loops are dropped.
    pub fn rewire_cross_edges(&mut self, from: NodeId, to: NodeId) -> Result<(), GraphError> {
        self.require_node(from)?;
        self.require_node(to)?;
        let incident: Vec<Edge> = self
            .out_edges(from)
            .chain(self.in_edges(from))
            .filter(|e| e.label != EdgeLabel::Has)
            .cloned()
            .collect();
        for e in incident {
            self.remove_edge_unchecked(e.id);
            let src = if e.src == from { to } else { e.src };
            let dst = if e.dst == from { to } else { e.dst };
            if src != dst {
                self.insert_edge(src, dst, e.label, e.attrs);
            }
        }
        Ok(())
    }

    /// Applies one CRUD operation.
    pub fn apply(&mut self, op: CrudOp) -> Result<CrudOutcome, GraphError> {
        match op {
            CrudOp::CreateNode { label, attrs, parent } => {
                self.create_node(label, attrs, parent).map(CrudOutcome::Node)
            }
            CrudOp::UpdateAttrs { target, attrs } => {
                match target {
                    CrudTarget::Node(id) => self.update_node_attrs(id, attrs)?,
                    CrudTarget::Edge(id) => self.update_edge_attrs(id, attrs)?,
                }
                Ok(CrudOutcome::Done)
            }
            CrudOp::DeleteNode(id) => self.delete_node(id).map(|_| CrudOutcome::Done),
            CrudOp::CreateEdge { src, dst, label, attrs } => {
                self.create_edge(src, dst, label, attrs).map(CrudOutcome::Edge)
            }
            CrudOp::DeleteEdge(id) => self.delete_edge(id).map(|_| CrudOutcome::Done),
        }
    }

    /// Full scan of the structural invariants. Returns one message per
    /// violation; empty when the graph is consistent.
    pub fn check_integrity(&self) -> Vec<String> {
        let mut problems = Vec::new();
        for e in self.edges.values() {
            if !self.nodes.contains_key(&e.src) || !self.nodes.contains_key(&e.dst) {
                problems.push(format!("{} has a dangling endpoint", e.id));
            }
        }
        for n in self.nodes.values() {
            let parents = self.in_edges(n.id).filter(|e| e.label == EdgeLabel::Has).count();
            match (n.label, parents) {
                (NodeLabel::Meta, 0) => {}
                (NodeLabel::Meta, _) => problems.push(format!("meta node {} has a parent", n.id)),
                (_, 1) => {
                    if self.root_meta(n.id).is_none() {
                        problems.push(format!("{} is not reachable from a meta node", n.id));
                    }
                }
                (_, k) => problems.push(format!("{} has {k} structural parents", n.id)),
            }
        }
        problems
    }

    pub(crate) fn counters(&self) -> (u64, u64) {
        (self.next_node, self.next_edge)
    }

    /// Rebuilds a graph from raw tables (snapshot loading). Ids are kept.
    pub(crate) fn from_parts(
        nodes: Vec<Node>,
        edges: Vec<Edge>,
        next_node: u64,
        next_edge: u64,
    ) -> Result<Self, GraphError> {
        let mut g = PropertyGraph::new();
        for n in nodes {
            if g.nodes.contains_key(&n.id) {
                return Err(GraphError::InvariantViolation(format!("duplicate node id {}", n.id)));
            }
            if n.id.0 >= next_node {
                return Err(GraphError::InvariantViolation(format!(
                    "node id {} not below counter {next_node}",
                    n.id
                )));
            }
            if n.label == NodeLabel::Meta {
                if let Some(Value::Str(mid)) = n.attrs.get("meta_id") {
                    g.meta_index.insert(mid.clone(), n.id);
                }
            }
            g.index_attrs(n.id, &n.attrs);
            g.by_label.entry(n.label).or_default().insert(n.id);
            g.nodes.insert(n.id, n);
        }
        for e in edges {
            if g.edges.contains_key(&e.id) || e.id.0 >= next_edge {
                return Err(GraphError::InvariantViolation(format!("bad edge id {}", e.id)));
            }
            if !g.nodes.contains_key(&e.src) || !g.nodes.contains_key(&e.dst) {
                return Err(GraphError::InvariantViolation(format!(
                    "{} has a dangling endpoint",
                    e.id
                )));
            }
            g.out_edges.entry(e.src).or_default().insert(e.id);
            g.in_edges.entry(e.dst).or_default().insert(e.id);
            g.edges.insert(e.id, e);
        }
        g.next_node = next_node;
        g.next_edge = next_edge;
        let problems = g.check_integrity();
        if let Some(p) = problems.into_iter().next() {
            return Err(GraphError::InvariantViolation(p));
        }
        Ok(g)
    }
}

/// Builds an attribute map from `(key, value)` pairs.
#[macro_export]
macro_rules! attrs {
    () => { $crate::graph::Attrs::new() };
    ($($k:expr => $v:expr),+ $(,)?) => {{
        let mut m = $crate::graph::Attrs::new();
        $( m.insert(($k).to_string(), $crate::graph::Value::from($v)); )+
        m
    }};
}
