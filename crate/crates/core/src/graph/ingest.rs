//! TILT document → subgraph transform.
//!
//! Each document becomes one tree:
//!
//! ```text
//! meta ─HAS→ tilt ─HAS→ controller
//!                 └HAS→ dataDisclosed* ─HAS→ purpose* | legalBasis* | storage* | recipient*
//! ```
//!
//! Scalar fields become node attributes, including scalar entries of the
//! documents' `extra` maps. Nested unrecognized structures stay in the
//! document only.

use serde_json::{Map, Value as Json};

use super::{Attrs, GraphError, NodeId, NodeLabel, PropertyGraph, Value};
use crate::tilt::{self, TiltDocument};

#[derive(Debug, Clone, Copy)]
pub struct IngestOptions {
    /// Re-ingesting a known `meta_id` replaces the old subgraph. When false it
    /// is an error instead.
    pub replace_on_reingest: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            replace_on_reingest: true,
        }
    }
}

/// Ingests with default options (replace on re-ingest).
pub fn ingest(doc: &TiltDocument, g: &mut PropertyGraph) -> Result<NodeId, GraphError> {
    ingest_with(doc, g, IngestOptions::default())
}

pub fn ingest_with(doc: &TiltDocument, g: &mut PropertyGraph, opts: IngestOptions) -> Result<NodeId, GraphError> {
    let issues = tilt::validate_tilt(doc);
    if let Some(first) = issues.iter().find(|i| i.severity == tilt::Severity::Error) {
        return Err(GraphError::InvalidDocument {
            meta_id: doc.meta.id.clone(),
            first: format!("{}: {}", first.path, first.message),
        });
    }
    if let Some(existing) = g.meta_by_id(&doc.meta.id) {
        if !opts.replace_on_reingest {
            return Err(GraphError::Duplicate(doc.meta.id.clone()));
        }
        g.delete_node(existing)?;
    }

    let mut meta_attrs = scalar_extras(&doc.meta.extra);
    meta_attrs.insert("meta_id".into(), doc.meta.id.clone().into());
    meta_attrs.insert("name".into(), doc.meta.name.clone().into());
    let meta = g.create_node(NodeLabel::Meta, meta_attrs, None)?;

    let mut tilt_attrs = scalar_extras(&doc.extra);
    let countries = doc.third_countries();
    if !countries.is_empty() {
        tilt_attrs.insert("third_countries".into(), countries.join(",").into());
    }
    let tilt_node = g.create_node(NodeLabel::Tilt, tilt_attrs, Some(meta))?;

    let c = &doc.controller;
    let mut ca = scalar_extras(&c.extra);
    ca.insert("name".into(), c.name.clone().into());
    put_opt(&mut ca, "country", &c.country);
    put_opt(&mut ca, "sector", &c.sector);
    if let Some(Ok(sector)) = c.sector() {
        ca.insert("isic_section".into(), sector.section.to_string().into());
    }
    put_opt(&mut ca, "division", &c.division);
    put_opt(&mut ca, "address", &c.address);
    if let Some(Json::String(r)) = &c.representative {
        ca.insert("representative".into(), r.clone().into());
    }
    g.create_node(NodeLabel::Controller, ca, Some(tilt_node))?;

    for entry in &doc.data_disclosed {
        let mut da = scalar_extras(&entry.extra);
        da.insert("entry_id".into(), entry.entry_id.clone().into());
        da.insert("category".into(), entry.category.clone().into());
        let d = g.create_node(NodeLabel::DataDisclosed, da, Some(tilt_node))?;

        for p in &entry.purposes {
            let mut a = scalar_extras(&p.extra);
            a.insert("purpose".into(), p.purpose.clone().into());
            a.insert("description".into(), p.description.clone().into());
            g.create_node(NodeLabel::Purpose, a, Some(d))?;
        }
        for l in &entry.legal_bases {
            let mut a = scalar_extras(&l.extra);
            a.insert("reference".into(), l.reference.trim().to_string().into());
            a.insert("description".into(), l.description.clone().into());
            g.create_node(NodeLabel::LegalBasis, a, Some(d))?;
        }
        for s in &entry.storage {
            if s.temporal.is_empty() {
                g.create_node(NodeLabel::Storage, scalar_extras(&s.extra), Some(d))?;
            }
            for t in &s.temporal {
                let mut a = scalar_extras(&s.extra);
                a.extend(scalar_extras(&t.extra));
                a.insert("temporal_description".into(), t.description.clone().into());
                put_opt(&mut a, "ttl", &t.ttl);
                if let Some(days) = t.ttl_days().and_then(|d| i64::try_from(d).ok()) {
                    a.insert("ttl_days".into(), days.into());
                }
                g.create_node(NodeLabel::Storage, a, Some(d))?;
            }
        }
        for r in &entry.recipients {
            let mut a = scalar_extras(&r.extra);
            a.insert("name".into(), r.name.clone().into());
            put_opt(&mut a, "country", &r.country);
            put_opt(&mut a, "division", &r.division);
            put_opt(&mut a, "address", &r.address);
            put_opt(&mut a, "category", &r.category);
            g.create_node(NodeLabel::Recipient, a, Some(d))?;
        }
    }
    Ok(meta)
}

fn put_opt(attrs: &mut Attrs, key: &str, v: &Option<String>) {
    if let Some(s) = v {
        attrs.insert(key.to_string(), s.clone().into());
    }
}

fn scalar_extras(extra: &Map<String, Json>) -> Attrs {
    extra
        .iter()
        .filter_map(|(k, v)| {
            let value = match v {
                Json::String(s) => Value::Str(s.clone()),
                Json::Bool(b) => Value::Bool(*b),
                Json::Number(n) => match n.as_i64() {
                    Some(i) => Value::Int(i),
                    None => Value::Float(n.as_f64().filter(|x| x.is_finite())?),
                },
                _ => return None,
            };
            Some((k.clone(), value))
        })
        .collect()
}
