//! Snapshot files: a versioned, tab-separated node table plus edge table.
//!
//! ```text
//! #tap-graph-snapshot<TAB>v1<TAB>next_node=<u64><TAB>next_edge=<u64>
//! N<TAB><node id><TAB><label><TAB><attrs>
//! ...
//! E<TAB><edge id><TAB><src id><TAB><dst id><TAB><label><TAB><attrs>
//! ...
//! ```
//!
//! Ids are the bare integers. `<attrs>` is a single-line JSON object with
//! keys in sorted order. Strings, booleans and integers map to the JSON
//! types; floats are always written with a fraction or exponent (`1.0`,
//! `0.83`) so they read back as floats. Node lines come first, in ascending
//! id order, then edge lines in ascending id order. Lines end with `\n`.

use serde_json::{Map, Value as Json};

use super::{Attrs, Edge, EdgeId, GraphError, Node, NodeId, PropertyGraph, Value};

pub const SNAPSHOT_MAGIC: &str = "#tap-graph-snapshot";
pub const SNAPSHOT_VERSION: &str = "v1";

/// Serializes attributes as a one-line JSON object with sorted keys.
pub fn attrs_to_json(attrs: &Attrs) -> String {
    let mut out = String::from("{");
    for (i, (k, v)) in attrs.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&serde_json::to_string(k).expect("strings serialize"));
        out.push(':');
        out.push_str(&value_to_json(v));
    }
    out.push('}');
    out
}

pub(crate) fn value_to_json(v: &Value) -> String {
    match v {
        Value::Str(s) => serde_json::to_string(s).expect("strings serialize"),
        Value::Int(i) => i.to_string(),
        Value::Float(x) => {
            let s = serde_json::to_string(x).expect("finite floats serialize");
            if s.contains(['.', 'e', 'E']) {
                s
            } else {
                format!("{s}.0")
            }
        }
        Value::Bool(b) => b.to_string(),
    }
}

pub(crate) fn value_from_json(v: &Json) -> Option<Value> {
    Some(match v {
        Json::String(s) => Value::Str(s.clone()),
        Json::Bool(b) => Value::Bool(*b),
        Json::Number(n) => {
            let text = n.to_string();
            if !text.contains(['.', 'e', 'E']) {
                if let Some(i) = n.as_i64() {
                    return Some(Value::Int(i));
                }
            }
            Value::Float(n.as_f64().filter(|x| x.is_finite())?)
        }
        _ => return None,
    })
}

pub fn attrs_from_json(text: &str) -> Result<Attrs, String> {
    let map: Map<String, Json> = serde_json::from_str(text).map_err(|e| e.to_string())?;
    map.into_iter()
        .map(|(k, v)| {
            value_from_json(&v)
                .map(|v| (k.clone(), v))
                .ok_or_else(|| format!("attribute `{k}` is not a scalar"))
        })
        .collect()
}

pub fn save_snapshot(g: &PropertyGraph) -> String {
    let (next_node, next_edge) = g.counters();
    let mut out = format!("{SNAPSHOT_MAGIC}\t{SNAPSHOT_VERSION}\tnext_node={next_node}\tnext_edge={next_edge}\n");
    for n in g.nodes() {
        out.push_str(&format!("N\t{}\t{}\t{}\n", n.id.0, n.label, attrs_to_json(&n.attrs)));
    }
    for e in g.edges() {
        out.push_str(&format!(
            "E\t{}\t{}\t{}\t{}\t{}\n",
            e.id.0,
            e.src.0,
            e.dst.0,
            e.label,
            attrs_to_json(&e.attrs)
        ));
    }
    out
}

pub fn load_snapshot(text: &str) -> Result<PropertyGraph, GraphError> {
    let err = |line: usize, message: String| GraphError::Snapshot { line, message };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let fields: Vec<&str> = header.split('\t').collect();
    if fields.len() != 4 || fields[0] != SNAPSHOT_MAGIC {
        return Err(err(1, "missing snapshot header".into()));
    }
    if fields[1] != SNAPSHOT_VERSION {
        return Err(err(1, format!("unsupported snapshot version `{}`", fields[1])));
    }
    let counter = |field: &str, name: &str| -> Result<u64, GraphError> {
        field
            .strip_prefix(name)
            .and_then(|v| v.strip_prefix('='))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| err(1, format!("bad `{name}` counter")))
    };
    let next_node = counter(fields[2], "next_node")?;
    let next_edge = counter(fields[3], "next_edge")?;

    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for (i, line) in lines {
        let ln = i + 1;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        let id = |s: &str| s.parse::<u64>().map_err(|_| err(ln, format!("bad id `{s}`")));
        match f.as_slice() {
            ["N", nid, label, attrs] => nodes.push(Node {
                id: NodeId(id(nid)?),
                label: label.parse().map_err(|e: GraphError| err(ln, e.to_string()))?,
                attrs: attrs_from_json(attrs).map_err(|m| err(ln, m))?,
            }),
            ["E", eid, src, dst, label, attrs] => edges.push(Edge {
                id: EdgeId(id(eid)?),
                src: NodeId(id(src)?),
                dst: NodeId(id(dst)?),
                label: label.parse().map_err(|e: GraphError| err(ln, e.to_string()))?,
                attrs: attrs_from_json(attrs).map_err(|m| err(ln, m))?,
            }),
            _ => return Err(err(ln, "unrecognized record".into())),
        }
    }
    PropertyGraph::from_parts(nodes, edges, next_node, next_edge)
}
