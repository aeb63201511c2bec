//! Linear path patterns.
//!
//! A pattern is a walk `node (edge node)*` with per-node attribute predicates
//! and a projection list. A node step that repeats an earlier alias binds the
//! same node again, which lets a single walk visit a sibling branch:
//!
//! ```text
//! (m:meta)-[:HAS]->(t:tilt)-[:HAS]->(c:controller)<-[:HAS]-(t)-[:HAS]->(d:dataDisclosed)-[:HAS]->(l:legalBasis)
//! RETURN m.name, c.sector, d.category, l.reference
//! ```
//!
//! Predicates: `key = literal`, `key ~ "substring"`, and numeric `<`, `<=`,
//! `>`, `>=`. Literals are double-quoted strings, integers, floats or
//! `true`/`false`.

use std::collections::BTreeMap;
use std::fmt;

use super::{EdgeLabel, GraphError, NodeId, NodeLabel, PropertyGraph, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeDirection {
    /// `-[]->`
    Out,
    /// `<-[]-`
    In,
    /// `-[]-`
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PredicateOp {
    Eq(Value),
    Contains(String),
    Lt(f64),
    Le(f64),
    Gt(f64),
    Ge(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    pub key: String,
    pub op: PredicateOp,
}

impl Predicate {
    pub fn eq(key: &str, v: impl Into<Value>) -> Self {
        Self {
            key: key.into(),
            op: PredicateOp::Eq(v.into()),
        }
    }

    pub fn contains(key: &str, s: &str) -> Self {
        Self {
            key: key.into(),
            op: PredicateOp::Contains(s.into()),
        }
    }

    fn holds(&self, attrs: &super::Attrs) -> bool {
        let Some(v) = attrs.get(&self.key) else {
            return false;
        };
        match &self.op {
            PredicateOp::Eq(lit) => match (v.as_f64(), lit.as_f64()) {
                (Some(a), Some(b)) => a == b,
                _ => v == lit,
            },
            PredicateOp::Contains(s) => v.as_str().is_some_and(|x| x.contains(s.as_str())),
            PredicateOp::Lt(x) => v.as_f64().is_some_and(|a| a < *x),
            PredicateOp::Le(x) => v.as_f64().is_some_and(|a| a <= *x),
            PredicateOp::Gt(x) => v.as_f64().is_some_and(|a| a > *x),
            PredicateOp::Ge(x) => v.as_f64().is_some_and(|a| a >= *x),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeStep {
    pub alias: String,
    /// Required on the first occurrence of an alias.
    pub label: Option<NodeLabel>,
    pub predicates: Vec<Predicate>,
}

impl NodeStep {
    pub fn new(alias: &str, label: NodeLabel) -> Self {
        Self {
            alias: alias.into(),
            label: Some(label),
            predicates: Vec::new(),
        }
    }

    /// Re-binds a previously introduced alias.
    pub fn again(alias: &str) -> Self {
        Self {
            alias: alias.into(),
            label: None,
            predicates: Vec::new(),
        }
    }

    pub fn with(mut self, p: Predicate) -> Self {
        self.predicates.push(p);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeStep {
    pub label: Option<EdgeLabel>,
    pub direction: EdgeDirection,
}

impl EdgeStep {
    pub fn out(label: EdgeLabel) -> Self {
        Self {
            label: Some(label),
            direction: EdgeDirection::Out,
        }
    }

    pub fn inbound(label: EdgeLabel) -> Self {
        Self {
            label: Some(label),
            direction: EdgeDirection::In,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub alias: String,
    pub key: String,
}

impl fmt::Display for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.alias, self.key)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    nodes: Vec<NodeStep>,
    edges: Vec<EdgeStep>,
    projection: Vec<Projection>,
}

/// One match: the bound node of every step, and the projected values.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryRow {
    pub path: Vec<NodeId>,
    pub values: Vec<Option<Value>>,
}

fn pattern_err(msg: impl Into<String>) -> GraphError {
    GraphError::Pattern(msg.into())
}

impl Pattern {
    /// Builds and checks a pattern. `edges.len()` must be `nodes.len() - 1`.
    pub fn new(nodes: Vec<NodeStep>, edges: Vec<EdgeStep>, projection: Vec<(&str, &str)>) -> Result<Self, GraphError> {
        let p = Pattern {
            nodes,
            edges,
            projection: projection
                .into_iter()
                .map(|(a, k)| Projection {
                    alias: a.into(),
                    key: k.into(),
                })
                .collect(),
        };
        p.check()?;
        Ok(p)
    }

    pub fn projection(&self) -> &[Projection] {
        &self.projection
    }

    /// Column headers, `alias.key`.
    pub fn columns(&self) -> Vec<String> {
        self.projection.iter().map(ToString::to_string).collect()
    }

    fn check(&self) -> Result<(), GraphError> {
        if self.nodes.is_empty() {
            return Err(pattern_err("pattern has no node steps"));
        }
        if self.edges.len() + 1 != self.nodes.len() {
            return Err(pattern_err("edge steps must sit between node steps"));
        }
        let mut labels: BTreeMap<&str, NodeLabel> = BTreeMap::new();
        for step in &self.nodes {
            match (labels.get(step.alias.as_str()), step.label) {
                (None, None) => {
                    return Err(pattern_err(format!("alias `{}` has no label", step.alias)));
                }
                (None, Some(l)) => {
                    labels.insert(&step.alias, l);
                }
                (Some(&prev), Some(l)) if prev != l => {
                    return Err(pattern_err(format!(
                        "alias `{}` used with labels {prev} and {l}",
                        step.alias
                    )));
                }
                _ => {}
            }
            for p in &step.predicates {
                if let PredicateOp::Eq(Value::Float(x)) = p.op {
                    if !x.is_finite() {
                        return Err(pattern_err("non-finite literal"));
                    }
                }
            }
        }
        for proj in &self.projection {
            if !labels.contains_key(proj.alias.as_str()) {
                return Err(pattern_err(format!("unknown alias `{}` in projection", proj.alias)));
            }
        }
        Ok(())
    }

    /// Parses the textual pattern syntax described in the module docs.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        Parser::new(text).pattern()
    }
}

/// Runs a pattern. Each distinct walk is returned once; rows are sorted by
/// the node ids along the walk.
pub fn query(g: &PropertyGraph, p: &Pattern) -> Result<Vec<QueryRow>, GraphError> {
    p.check()?;
    let mut paths: Vec<Vec<NodeId>> = Vec::new();
    let first = &p.nodes[0];
    let label = first.label.expect("first occurrence has a label");
    for n in g.nodes_with_label(label) {
        if first.predicates.iter().all(|pr| pr.holds(&n.attrs)) {
            let mut binding = BTreeMap::new();
            binding.insert(first.alias.as_str(), n.id);
            extend(g, p, 1, vec![n.id], &mut binding, &mut paths);
        }
    }
    paths.sort();
    paths.dedup();
    Ok(paths
        .into_iter()
        .map(|path| {
            let values = p
                .projection
                .iter()
                .map(|proj| {
                    let idx = p.nodes.iter().position(|s| s.alias == proj.alias).expect("checked");
                    g.node(path[idx]).and_then(|n| n.attrs.get(&proj.key).cloned())
                })
                .collect();
            QueryRow { path, values }
        })
        .collect())
}

fn extend<'p>(
    g: &PropertyGraph,
    p: &'p Pattern,
    step: usize,
    path: Vec<NodeId>,
    binding: &mut BTreeMap<&'p str, NodeId>,
    out: &mut Vec<Vec<NodeId>>,
) {
    if step == p.nodes.len() {
        out.push(path);
        return;
    }
    let cur = *path.last().expect("non-empty path");
    let es = p.edges[step - 1];
    let ns = &p.nodes[step];
    let mut next: Vec<NodeId> = Vec::new();
    let label_ok = |l: EdgeLabel| es.label.is_none_or(|want| want == l);
    if matches!(es.direction, EdgeDirection::Out | EdgeDirection::Both) {
        next.extend(g.out_edges(cur).filter(|e| label_ok(e.label)).map(|e| e.dst));
    }
    if matches!(es.direction, EdgeDirection::In | EdgeDirection::Both) {
        next.extend(g.in_edges(cur).filter(|e| label_ok(e.label)).map(|e| e.src));
    }
    next.sort();
    next.dedup();
    let bound = binding.get(ns.alias.as_str()).copied();
    for cand in next {
        if bound.is_some_and(|b| b != cand) {
            continue;
        }
        let node = g.node(cand).expect("edges never dangle");
        if ns.label.is_some_and(|l| l != node.label) {
            continue;
        }
        if !ns.predicates.iter().all(|pr| pr.holds(&node.attrs)) {
            continue;
        }
        let fresh = bound.is_none();
        if fresh {
            binding.insert(&ns.alias, cand);
        }
        let mut next_path = path.clone();
        next_path.push(cand);
        extend(g, p, step + 1, next_path, binding, out);
        if fresh {
            binding.remove(ns.alias.as_str());
        }
    }
}

// ---------------------------------------------------------------------------
// Text syntax

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), GraphError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{tok}`")))
        }
    }

    fn error(&self, msg: &str) -> GraphError {
        pattern_err(format!("{msg} at offset {}", self.pos))
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest
            .char_indices()
            .find(|&(_, c)| !(c.is_alphanumeric() || c == '_'))
            .map_or(rest.len(), |(i, _)| i);
        if len == 0 || rest.starts_with(|c: char| c.is_ascii_digit()) {
            return None;
        }
        self.pos += len;
        Some(&rest[..len])
    }

    fn pattern(&mut self) -> Result<Pattern, GraphError> {
        let mut nodes = vec![self.node(0)?];
        let mut edges = Vec::new();
        loop {
            self.skip_ws();
            if self.rest().starts_with('-') || self.rest().starts_with('<') {
                edges.push(self.edge()?);
                nodes.push(self.node(nodes.len())?);
            } else {
                break;
            }
        }
        self.skip_ws();
        let kw = self.ident().ok_or_else(|| self.error("expected RETURN"))?;
        if !kw.eq_ignore_ascii_case("return") {
            return Err(self.error("expected RETURN"));
        }
        let mut projection = Vec::new();
        loop {
            let alias = self.ident().ok_or_else(|| self.error("expected alias"))?;
            self.expect(".")?;
            let key = self.ident().ok_or_else(|| self.error("expected attribute name"))?;
            projection.push(Projection {
                alias: alias.into(),
                key: key.into(),
            });
            if !self.eat(",") {
                break;
            }
        }
        self.skip_ws();
        if !self.rest().is_empty() {
            return Err(self.error("trailing input"));
        }
        let p = Pattern {
            nodes,
            edges,
            projection,
        };
        p.check()?;
        Ok(p)
    }

    fn node(&mut self, index: usize) -> Result<NodeStep, GraphError> {
        self.expect("(")?;
        let alias = self.ident().map(str::to_string).unwrap_or_else(|| format!("_{index}"));
        let label = if self.eat(":") {
            let l = self.ident().ok_or_else(|| self.error("expected node label"))?;
            Some(l.parse::<NodeLabel>().map_err(|e| pattern_err(e.to_string()))?)
        } else {
            None
        };
        let mut predicates = Vec::new();
        if self.eat("{") {
            loop {
                predicates.push(self.predicate()?);
                if !self.eat(",") {
                    break;
                }
            }
            self.expect("}")?;
        }
        self.expect(")")?;
        Ok(NodeStep {
            alias,
            label,
            predicates,
        })
    }

    fn edge(&mut self) -> Result<EdgeStep, GraphError> {
        let incoming = self.eat("<");
        self.expect("-")?;
        let mut label = None;
        if self.eat("[") {
            if self.eat(":") {
                let l = self.ident().ok_or_else(|| self.error("expected edge label"))?;
                label = Some(l.parse::<EdgeLabel>().map_err(|e| pattern_err(e.to_string()))?);
            }
            self.expect("]")?;
        }
        self.expect("-")?;
        let outgoing = self.eat(">");
        let direction = match (incoming, outgoing) {
            (true, true) => return Err(self.error("edge cannot point both ways")),
            (true, false) => EdgeDirection::In,
            (false, true) => EdgeDirection::Out,
            (false, false) => EdgeDirection::Both,
        };
        Ok(EdgeStep { label, direction })
    }

    fn predicate(&mut self) -> Result<Predicate, GraphError> {
        let key = self.ident().ok_or_else(|| self.error("expected attribute name"))?.to_string();
        self.skip_ws();
        let op = ["<=", ">=", "=", "~", "<", ">"]
            .into_iter()
            .find(|op| self.eat(op))
            .ok_or_else(|| self.error("expected one of = ~ < <= > >="))?;
        let lit = self.literal()?;
        let numeric = |v: &Value| {
            v.as_f64()
                .ok_or_else(|| pattern_err(format!("`{key} {op}` needs a numeric literal, got {}", v.type_name())))
        };
        let op = match op {
            "=" => PredicateOp::Eq(lit),
            "~" => match lit {
                Value::Str(s) => PredicateOp::Contains(s),
                other => {
                    return Err(pattern_err(format!(
                        "`{key} ~` needs a string literal, got {}",
                        other.type_name()
                    )))
                }
            },
            "<" => PredicateOp::Lt(numeric(&lit)?),
            "<=" => PredicateOp::Le(numeric(&lit)?),
            ">" => PredicateOp::Gt(numeric(&lit)?),
            _ => PredicateOp::Ge(numeric(&lit)?),
        };
        Ok(Predicate { key, op })
    }

    fn literal(&mut self) -> Result<Value, GraphError> {
        self.skip_ws();
        let rest = self.rest();
        if let Some(body) = rest.strip_prefix('"') {
            let mut out = String::new();
            let mut chars = body.char_indices();
            while let Some((i, c)) = chars.next() {
                match c {
                    '"' => {
                        self.pos += i + 2;
                        return Ok(Value::Str(out));
                    }
                    '\\' => match chars.next() {
                        Some((_, e)) => out.push(e),
                        None => break,
                    },
                    c => out.push(c),
                }
            }
            return Err(self.error("unterminated string"));
        }
        if let Some(word) = self.ident() {
            return match word {
                "true" => Ok(Value::Bool(true)),
                "false" => Ok(Value::Bool(false)),
                _ => Err(self.error("expected literal")),
            };
        }
        let len = rest
            .char_indices()
            .find(|&(_, c)| !(c.is_ascii_digit() || matches!(c, '-' | '+' | '.' | 'e' | 'E')))
            .map_or(rest.len(), |(i, _)| i);
        let tok = &rest[..len];
        let v = if let Ok(i) = tok.parse::<i64>() {
            Value::Int(i)
        } else if let Ok(x) = tok.parse::<f64>() {
            if !x.is_finite() {
                return Err(self.error("non-finite literal"));
            }
            Value::Float(x)
        } else {
            return Err(self.error("expected literal"));
        };
        self.pos += len;
        Ok(v)
    }
}
