//! Interchange exports: GraphML, DOT, CSV node/edge tables and node-link JSON.
//!
//! Exports operate on an [`ExportGraph`], a format-neutral copy built either
//! from the full property graph or from the meta-level projection. Output is
//! deterministic: nodes and edges keep the builder's order, which is by id.
//! GraphML, CSV and JSON can be read back.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;

use quick_xml::escape::escape;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use crate::analytics::{CommunityAssignment, RankVector, WeightedGraph};
use crate::graph::{attrs_from_json, attrs_to_json, value_from_json, Attrs, PropertyGraph, Value};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("malformed {format} input: {message}")]
    Parse { format: &'static str, message: String },
    #[error("unknown export format `{0}` (expected graphml, dot, csv or json)")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Graphml,
    Dot,
    /// A directory holding `nodes.csv` and `edges.csv`.
    CsvNodesEdges,
    JsonGraph,
}

impl FromStr for ExportFormat {
    type Err = ExportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "graphml" => Ok(ExportFormat::Graphml),
            "dot" => Ok(ExportFormat::Dot),
            "csv" | "csv_nodes_edges" => Ok(ExportFormat::CsvNodesEdges),
            "json" | "json_graph" => Ok(ExportFormat::JsonGraph),
            other => Err(ExportError::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExportNode {
    pub id: String,
    pub label: String,
    pub attrs: Attrs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExportEdge {
    pub id: String,
    pub src: String,
    pub dst: String,
    pub label: String,
    pub attrs: Attrs,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExportGraph {
    pub nodes: Vec<ExportNode>,
    pub edges: Vec<ExportEdge>,
}

impl ExportGraph {
    /// Every node and edge. Ids are `n<id>` and `e<id>`.
    pub fn full(g: &PropertyGraph) -> Self {
        Self {
            nodes: g
                .nodes()
                .map(|n| ExportNode { id: format!("n{}", n.id.0), label: n.label.to_string(), attrs: n.attrs.clone() })
                .collect(),
            edges: g
                .edges()
                .map(|e| ExportEdge {
                    id: format!("e{}", e.id.0),
                    src: format!("n{}", e.src.0),
                    dst: format!("n{}", e.dst.0),
                    label: e.label.to_string(),
                    attrs: e.attrs.clone(),
                })
                .collect(),
        }
    }

    /// One node per controller (its meta node) with `meta_id`, `name`,
    /// `community` and `pagerank`; one `LINK` edge per projected link
    /// carrying its `weight`. Communities and ranks come from the arguments
    /// when given, otherwise from attributes already stored on the meta node.
    pub fn meta_level(
        g: &PropertyGraph,
        pg: &WeightedGraph,
        communities: Option<&CommunityAssignment>,
        ranks: Option<&RankVector>,
    ) -> Self {
        let nodes = pg
            .nodes()
            .iter()
            .map(|id| {
                let mut attrs = Attrs::new();
                if let Some(n) = g.node(*id) {
                    for key in ["meta_id", "name", "community", "pagerank"] {
                        if let Some(v) = n.attr(key) {
                            attrs.insert(key.into(), v.clone());
                        }
                    }
                }
                if let Some(c) = communities.and_then(|c| c.community_of(*id)) {
                    attrs.insert("community".into(), Value::Int(c as i64));
                }
                if let Some(s) = ranks.and_then(|r| r.score(*id)) {
                    attrs.insert("pagerank".into(), Value::Float(s));
                }
                ExportNode { id: format!("n{}", id.0), label: "meta".into(), attrs }
            })
            .collect();
        let edges = pg
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let mut attrs = Attrs::new();
                attrs.insert("weight".into(), Value::Float(e.weight));
                ExportEdge {
                    id: format!("l{i}"),
                    src: format!("n{}", pg.nodes()[e.src].0),
                    dst: format!("n{}", pg.nodes()[e.dst].0),
                    label: "LINK".into(),
                    attrs,
                }
            })
            .collect();
        Self { nodes, edges }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ExportError + '_ {
    move |source| ExportError::Io { path: path.display().to_string(), source }
}

/// Writes `eg` to `path` (a directory for CSV, a file otherwise).
pub fn export(eg: &ExportGraph, fmt: ExportFormat, path: &Path) -> Result<(), ExportError> {
    match fmt {
        ExportFormat::Graphml => fs::write(path, to_graphml(eg)).map_err(io_err(path)),
        ExportFormat::Dot => fs::write(path, to_dot(eg)).map_err(io_err(path)),
        ExportFormat::JsonGraph => fs::write(path, to_json_graph(eg)).map_err(io_err(path)),
        ExportFormat::CsvNodesEdges => {
            fs::create_dir_all(path).map_err(io_err(path))?;
            let (nodes, edges) = to_csv(eg);
            let np = path.join("nodes.csv");
            fs::write(&np, nodes).map_err(io_err(&np))?;
            let ep = path.join("edges.csv");
            fs::write(&ep, edges).map_err(io_err(&ep))
        }
    }
}

/// Reads back a GraphML, CSV or JSON export. DOT is write-only.
pub fn import(fmt: ExportFormat, path: &Path) -> Result<ExportGraph, ExportError> {
    let read = |p: &Path| fs::read_to_string(p).map_err(io_err(p));
    match fmt {
        ExportFormat::Graphml => from_graphml(&read(path)?),
        ExportFormat::JsonGraph => from_json_graph(&read(path)?),
        ExportFormat::CsvNodesEdges => from_csv(&read(&path.join("nodes.csv"))?, &read(&path.join("edges.csv"))?),
        ExportFormat::Dot => Err(ExportError::Parse { format: "dot", message: "DOT import is not supported".into() }),
    }
}

// ---------------------------------------------------------------------------
// GraphML

/// Reserved GraphML key holding the node or edge label.
pub const GRAPHML_LABEL_KEY: &str = "_label";

fn graphml_type(v: &Value) -> &'static str {
    match v {
        Value::Str(_) => "string",
        Value::Int(_) => "long",
        Value::Float(_) => "double",
        Value::Bool(_) => "boolean",
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::Str(s) => s.clone(),
        Value::Int(i) => i.to_string(),
        Value::Float(x) => x.to_string(),
        Value::Bool(b) => b.to_string(),
    }
}

fn parse_typed(text: &str, ty: &str) -> Option<Value> {
    Some(match ty {
        "string" => Value::Str(text.to_string()),
        "long" | "int" => Value::Int(text.trim().parse().ok()?),
        "double" | "float" => Value::Float(text.trim().parse::<f64>().ok().filter(|x| x.is_finite())?),
        "boolean" => Value::Bool(text.trim().parse().ok()?),
        _ => return None,
    })
}

pub fn to_graphml(eg: &ExportGraph) -> String {
    // key per (domain, name, type) so one name may carry several types
    let mut keys: BTreeMap<(&str, String, &str), String> = BTreeMap::new();
    for n in &eg.nodes {
        for (k, v) in &n.attrs {
            keys.entry(("node", k.clone(), graphml_type(v))).or_default();
        }
    }
    for e in &eg.edges {
        for (k, v) in &e.attrs {
            keys.entry(("edge", k.clone(), graphml_type(v))).or_default();
        }
    }
    for (i, id) in keys.values_mut().enumerate() {
        *id = format!("d{i}");
    }

    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n",
    );
    for domain in ["node", "edge"] {
        out.push_str(&format!(
            "  <key id=\"{domain}{GRAPHML_LABEL_KEY}\" for=\"{domain}\" attr.name=\"{GRAPHML_LABEL_KEY}\" attr.type=\"string\"/>\n"
        ));
    }
    for ((domain, name, ty), id) in &keys {
        out.push_str(&format!(
            "  <key id=\"{id}\" for=\"{domain}\" attr.name=\"{}\" attr.type=\"{ty}\"/>\n",
            escape(name.as_str())
        ));
    }
    out.push_str("  <graph id=\"G\" edgedefault=\"directed\">\n");
    let data = |out: &mut String, domain: &str, attrs: &Attrs| {
        for (k, v) in attrs {
            let id = &keys[&(domain, k.clone(), graphml_type(v))];
            out.push_str(&format!("      <data key=\"{id}\">{}</data>\n", escape(scalar_text(v).as_str())));
        }
    };
    for n in &eg.nodes {
        out.push_str(&format!("    <node id=\"{}\">\n", escape(n.id.as_str())));
        out.push_str(&format!("      <data key=\"node{GRAPHML_LABEL_KEY}\">{}</data>\n", escape(n.label.as_str())));
        data(&mut out, "node", &n.attrs);
        out.push_str("    </node>\n");
    }
    for e in &eg.edges {
        out.push_str(&format!(
            "    <edge id=\"{}\" source=\"{}\" target=\"{}\">\n",
            escape(e.id.as_str()),
            escape(e.src.as_str()),
            escape(e.dst.as_str())
        ));
        out.push_str(&format!("      <data key=\"edge{GRAPHML_LABEL_KEY}\">{}</data>\n", escape(e.label.as_str())));
        data(&mut out, "edge", &e.attrs);
        out.push_str("    </edge>\n");
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

fn xml_attr(e: &BytesStart<'_>, name: &str) -> Result<Option<String>, ExportError> {
    for a in e.attributes() {
        let a = a.map_err(|err| graphml_err(err.to_string()))?;
        if a.key.as_ref() == name.as_bytes() {
            return Ok(Some(a.unescape_value().map_err(|err| graphml_err(err.to_string()))?.into_owned()));
        }
    }
    Ok(None)
}

fn graphml_err(message: impl Into<String>) -> ExportError {
    ExportError::Parse { format: "graphml", message: message.into() }
}

enum Element {
    Node(ExportNode),
    Edge(ExportEdge),
}

pub fn from_graphml(text: &str) -> Result<ExportGraph, ExportError> {
    let mut reader = Reader::from_str(text);
    // key id → (attr name, attr type)
    let mut keys: BTreeMap<String, (String, String)> = BTreeMap::new();
    let mut eg = ExportGraph::default();
    let mut current: Option<Element> = None;
    let mut data_key: Option<String> = None;
    let mut data_text = String::new();

    let open_element = |e: &BytesStart<'_>| -> Result<Option<Element>, ExportError> {
        let need = |name| xml_attr(e, name)?.ok_or_else(|| graphml_err(format!("missing `{name}` attribute")));
        Ok(match e.name().as_ref() {
            b"node" => Some(Element::Node(ExportNode { id: need("id")?, label: String::new(), attrs: Attrs::new() })),
            b"edge" => Some(Element::Edge(ExportEdge {
                id: xml_attr(e, "id")?.unwrap_or_default(),
                src: need("source")?,
                dst: need("target")?,
                label: String::new(),
                attrs: Attrs::new(),
            })),
            _ => None,
        })
    };

    loop {
        match reader.read_event().map_err(|e| graphml_err(e.to_string()))? {
            Event::Eof => break,
            Event::Empty(e) => match e.name().as_ref() {
                b"key" => {
                    let id = xml_attr(&e, "id")?.ok_or_else(|| graphml_err("key without id"))?;
                    let name = xml_attr(&e, "attr.name")?.ok_or_else(|| graphml_err("key without attr.name"))?;
                    let ty = xml_attr(&e, "attr.type")?.unwrap_or_else(|| "string".into());
                    keys.insert(id, (name, ty));
                }
                b"node" | b"edge" => match open_element(&e)? {
                    Some(Element::Node(n)) => eg.nodes.push(n),
                    Some(Element::Edge(ed)) => eg.edges.push(ed),
                    None => {}
                },
                b"data" => {
                    data_key = xml_attr(&e, "key")?;
                    data_text.clear();
                    store_data(&keys, &mut current, data_key.take(), &data_text)?;
                }
                _ => {}
            },
            Event::Start(e) => match e.name().as_ref() {
                b"node" | b"edge" => current = open_element(&e)?,
                b"data" => {
                    data_key = Some(xml_attr(&e, "key")?.ok_or_else(|| graphml_err("data without key"))?);
                    data_text.clear();
                }
                b"key" => {
                    let id = xml_attr(&e, "id")?.ok_or_else(|| graphml_err("key without id"))?;
                    let name = xml_attr(&e, "attr.name")?.ok_or_else(|| graphml_err("key without attr.name"))?;
                    let ty = xml_attr(&e, "attr.type")?.unwrap_or_else(|| "string".into());
                    keys.insert(id, (name, ty));
                }
                _ => {}
            },
            Event::Text(t) => {
                if data_key.is_some() {
                    data_text.push_str(&t.unescape().map_err(|e| graphml_err(e.to_string()))?);
                }
            }
            Event::CData(t) => {
                if data_key.is_some() {
                    data_text.push_str(&String::from_utf8_lossy(&t));
                }
            }
            Event::End(e) => match e.name().as_ref() {
                b"data" => store_data(&keys, &mut current, data_key.take(), &data_text)?,
                b"node" | b"edge" => match current.take() {
                    Some(Element::Node(n)) => eg.nodes.push(n),
                    Some(Element::Edge(ed)) => eg.edges.push(ed),
                    None => {}
                },
                _ => {}
            },
            _ => {}
        }
    }
    Ok(eg)
}

fn store_data(
    keys: &BTreeMap<String, (String, String)>,
    current: &mut Option<Element>,
    key: Option<String>,
    text: &str,
) -> Result<(), ExportError> {
    let Some(key) = key else { return Ok(()) };
    let Some(target) = current.as_mut() else { return Ok(()) };
    let (name, ty) = keys.get(&key).ok_or_else(|| graphml_err(format!("data refers to unknown key `{key}`")))?;
    let (label, attrs) = match target {
        Element::Node(n) => (&mut n.label, &mut n.attrs),
        Element::Edge(e) => (&mut e.label, &mut e.attrs),
    };
    if name == GRAPHML_LABEL_KEY {
        *label = text.to_string();
    } else {
        let v = parse_typed(text, ty).ok_or_else(|| graphml_err(format!("`{text}` is not a valid {ty}")))?;
        attrs.insert(name.clone(), v);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// DOT

fn dot_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn dot_attrs(label: &str, attrs: &Attrs) -> String {
    let mut parts = vec![format!("label={}", dot_quote(label))];
    for (k, v) in attrs {
        parts.push(format!("{}={}", dot_quote(k), dot_quote(&scalar_text(v))));
    }
    parts.join(", ")
}

/// Node labels prefer a `name` attribute and fall back to the node label.
pub fn to_dot(eg: &ExportGraph) -> String {
    let mut out = String::from("digraph tap {\n");
    for n in &eg.nodes {
        let shown = n.attrs.get("name").and_then(|v| v.as_str()).unwrap_or(&n.label);
        out.push_str(&format!("  {} [{}];\n", dot_quote(&n.id), dot_attrs(shown, &n.attrs)));
    }
    for e in &eg.edges {
        out.push_str(&format!("  {} -> {} [{}];\n", dot_quote(&e.src), dot_quote(&e.dst), dot_attrs(&e.label, &e.attrs)));
    }
    out.push_str("}\n");
    out
}

// ---------------------------------------------------------------------------
// CSV

fn csv_string(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).expect("writing to memory cannot fail");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is UTF-8")
}

/// `(nodes.csv, edges.csv)`; the attribute column holds a JSON object.
pub fn to_csv(eg: &ExportGraph) -> (String, String) {
    let mut nodes = vec![vec!["id".to_string(), "label".into(), "attrs".into()]];
    nodes.extend(eg.nodes.iter().map(|n| vec![n.id.clone(), n.label.clone(), attrs_to_json(&n.attrs)]));
    let mut edges = vec![["id", "src", "dst", "label", "attrs"].map(String::from).to_vec()];
    edges.extend(
        eg.edges
            .iter()
            .map(|e| vec![e.id.clone(), e.src.clone(), e.dst.clone(), e.label.clone(), attrs_to_json(&e.attrs)]),
    );
    (csv_string(nodes), csv_string(edges))
}

fn csv_err(message: impl Into<String>) -> ExportError {
    ExportError::Parse { format: "csv", message: message.into() }
}

fn csv_records(text: &str, width: usize) -> Result<Vec<csv::StringRecord>, ExportError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(e.to_string()))?;
        if rec.len() != width {
            return Err(csv_err(format!("expected {width} columns, found {}", rec.len())));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn from_csv(nodes: &str, edges: &str) -> Result<ExportGraph, ExportError> {
    let mut eg = ExportGraph::default();
    for r in csv_records(nodes, 3)? {
        eg.nodes.push(ExportNode { id: r[0].into(), label: r[1].into(), attrs: attrs_from_json(&r[2]).map_err(csv_err)? });
    }
    for r in csv_records(edges, 5)? {
        eg.edges.push(ExportEdge {
            id: r[0].into(),
            src: r[1].into(),
            dst: r[2].into(),
            label: r[3].into(),
            attrs: attrs_from_json(&r[4]).map_err(csv_err)?,
        });
    }
    Ok(eg)
}

// ---------------------------------------------------------------------------
// JSON

fn attrs_json_value(attrs: &Attrs) -> Json {
    serde_json::from_str(&attrs_to_json(attrs)).expect("attribute JSON parses")
}

/// `{"directed": true, "nodes": [...], "edges": [...]}`.
pub fn to_json_graph(eg: &ExportGraph) -> String {
    let nodes: Vec<Json> = eg
        .nodes
        .iter()
        .map(|n| json!({"id": n.id, "label": n.label, "attrs": attrs_json_value(&n.attrs)}))
        .collect();
    let edges: Vec<Json> = eg
        .edges
        .iter()
        .map(|e| json!({"id": e.id, "source": e.src, "target": e.dst, "label": e.label, "attrs": attrs_json_value(&e.attrs)}))
        .collect();
    let mut s = serde_json::to_string_pretty(&json!({"directed": true, "nodes": nodes, "edges": edges})).expect("serializes");
    s.push('\n');
    s
}

fn json_err(message: impl Into<String>) -> ExportError {
    ExportError::Parse { format: "json", message: message.into() }
}

pub fn from_json_graph(text: &str) -> Result<ExportGraph, ExportError> {
    let root: Json = serde_json::from_str(text).map_err(|e| json_err(e.to_string()))?;
    let list = |key: &str| root.get(key).and_then(Json::as_array).ok_or_else(|| json_err(format!("missing `{key}` array")));
    let field = |o: &Json, key: &str| {
        o.get(key).and_then(Json::as_str).map(str::to_string).ok_or_else(|| json_err(format!("missing string `{key}`")))
    };
    let attrs = |o: &Json| -> Result<Attrs, ExportError> {
        let empty = Map::new();
        let map = match o.get("attrs") {
            None => &empty,
            Some(v) => v.as_object().ok_or_else(|| json_err("`attrs` must be an object"))?,
        };
        map.iter()
            .map(|(k, v)| value_from_json(v).map(|v| (k.clone(), v)).ok_or_else(|| json_err(format!("attribute `{k}` is not a scalar"))))
            .collect()
    };
    let mut eg = ExportGraph::default();
    for n in list("nodes")? {
        eg.nodes.push(ExportNode { id: field(n, "id")?, label: field(n, "label")?, attrs: attrs(n)? });
    }
    for e in list("edges")? {
        eg.edges.push(ExportEdge {
            id: field(e, "id")?,
            src: field(e, "source")?,
            dst: field(e, "target")?,
            label: field(e, "label")?,
            attrs: attrs(e)?,
        });
    }
    Ok(eg)
}
