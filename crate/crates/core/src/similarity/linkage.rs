use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::{clean_text, CleaningPolicy, Metric, SimilarityError};
use crate::attrs;
use crate::graph::{EdgeLabel, GraphError, NodeId, NodeLabel, PropertyGraph};

/// A node label plus the attribute whose text is compared.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selector {
    pub label: NodeLabel,
    pub attr: String,
}

impl Selector {
    pub fn new(label: NodeLabel, attr: impl Into<String>) -> Self {
        Self { label, attr: attr.into() }
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.label, self.attr)
    }
}

/// `label.attr`, e.g. `recipient.name`.
impl FromStr for Selector {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (label, attr) = s
            .split_once('.')
            .filter(|(_, a)| !a.is_empty())
            .ok_or_else(|| GraphError::UnknownLabel(s.to_string()))?;
        Ok(Self::new(label.parse()?, attr))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkageSpec {
    pub metric: Metric,
    threshold: f64,
    pub source: Selector,
    pub target: Selector,
    pub cleaning: CleaningPolicy,
}

impl LinkageSpec {
    pub const DEFAULT_THRESHOLD: f64 = 0.6;

    /// Default selectors (`meta.name` → `recipient.name`) and full cleaning.
    pub fn new(metric: Metric, threshold: f64) -> Result<Self, SimilarityError> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(SimilarityError::Threshold(threshold));
        }
        Ok(Self {
            metric,
            threshold,
            source: Selector::new(NodeLabel::Meta, "name"),
            target: Selector::new(NodeLabel::Recipient, "name"),
            cleaning: CleaningPolicy::ALL,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn with_selectors(mut self, source: Selector, target: Selector) -> Self {
        self.source = source;
        self.target = target;
        self
    }

    pub fn with_cleaning(mut self, cleaning: CleaningPolicy) -> Self {
        self.cleaning = cleaning;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkReport {
    pub metric: Metric,
    pub threshold: f64,
    pub pairs_evaluated: usize,
    pub edges_created: usize,
    /// Stale edges of the same metric removed before linking.
    pub edges_removed: usize,
    /// Score counts in ten equal-width bins over `[0, 1]`; 1.0 falls in the
    /// last bin.
    pub histogram: [usize; 10],
}

impl LinkReport {
    /// Tab-separated `key<TAB>value` lines.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "metric\t{}\nthreshold\t{}\npairs_evaluated\t{}\nedges_created\t{}\nedges_removed\t{}\n",
            self.metric, self.threshold, self.pairs_evaluated, self.edges_created, self.edges_removed
        );
        for (i, n) in self.histogram.iter().enumerate() {
            out.push_str(&format!("histogram[{:.1},{:.1}{}\t{}\n", i as f64 / 10.0, (i + 1) as f64 / 10.0, if i == 9 { "]" } else { ")" }, n));
        }
        out
    }
}

fn bin(score: f64) -> usize {
    ((score * 10.0).floor() as usize).min(9)
}

fn selected(g: &PropertyGraph, sel: &Selector, cleaning: &CleaningPolicy) -> Vec<(NodeId, Option<NodeId>, String)> {
    g.nodes_with_label(sel.label)
        .filter_map(|n| {
            let text = n.str_attr(&sel.attr)?;
            Some((n.id, g.root_meta(n.id), clean_text(text, cleaning)))
        })
        .collect()
}

/// Scores every (source, target) pair from different documents and creates
/// a `SIMILAR_TO` edge source → target when the score is strictly above the
/// threshold. Existing `SIMILAR_TO` edges with the same metric are removed
/// first, so the result only reflects the current spec.
pub fn link_entities(g: &mut PropertyGraph, spec: &LinkageSpec) -> Result<LinkReport, SimilarityError> {
    let stale: Vec<_> = g
        .edges()
        .filter(|e| e.label == EdgeLabel::SimilarTo && e.attrs.get("metric").and_then(|v| v.as_str()) == Some(spec.metric.as_str()))
        .map(|e| e.id)
        .collect();
    for id in &stale {
        g.delete_edge(*id)?;
    }

    let sources = selected(g, &spec.source, &spec.cleaning);
    let targets = selected(g, &spec.target, &spec.cleaning);
    let metric = spec.metric;

    // recipient names repeat a lot; score each distinct text once per source
    let mut distinct: Vec<&str> = targets.iter().map(|(_, _, t)| t.as_str()).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let slot: Vec<usize> = targets
        .iter()
        .map(|(_, _, t)| distinct.binary_search(&t.as_str()).expect("text is listed"))
        .collect();

    let scored: Vec<(NodeId, NodeId, f64)> = sources
        .par_iter()
        .flat_map_iter(|(s, s_doc, s_text)| {
            let scores: Vec<f64> = distinct.iter().map(|t| metric.score(s_text, t)).collect();
            targets
                .iter()
                .zip(&slot)
                .filter(move |((t, t_doc, _), _)| t != s && (s_doc.is_none() || s_doc != t_doc))
                .map(move |((t, _, _), &k)| (*s, *t, scores[k]))
                .collect::<Vec<_>>()
        })
        .collect();

    let mut histogram = [0usize; 10];
    let mut created = 0;
    for &(s, t, score) in &scored {
        histogram[bin(score)] += 1;
        if score > spec.threshold {
            g.create_edge(
                s,
                t,
                EdgeLabel::SimilarTo,
                attrs! {"metric" => metric.as_str(), "score" => score, "threshold" => spec.threshold},
            )?;
            created += 1;
        }
    }

    Ok(LinkReport {
        metric,
        threshold: spec.threshold,
        pairs_evaluated: scored.len(),
        edges_created: created,
        edges_removed: stale.len(),
        histogram,
    })
}
