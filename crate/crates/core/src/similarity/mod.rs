//! String similarity kernels and name cleaning.
//!
//! All kernels work on Unicode scalar values (`char`s), not bytes, and return
//! scores in `[0, 1]` where 1 means identical.

mod linkage;

pub use linkage::{link_entities, LinkReport, LinkageSpec, Selector};

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimilarityError {
    #[error("unknown metric `{0}` (expected levenshtein_normalized, jaro_winkler or sorensen_dice)")]
    UnknownMetric(String),
    #[error("threshold {0} outside [0, 1]")]
    Threshold(f64),
    #[error("unknown cleaning step `{0}` (expected lower, punct, suffix, ws, all or none)")]
    UnknownCleaningStep(String),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    LevenshteinNormalized,
    JaroWinkler,
    SorensenDice,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::LevenshteinNormalized, Metric::JaroWinkler, Metric::SorensenDice];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::LevenshteinNormalized => "levenshtein_normalized",
            Metric::JaroWinkler => "jaro_winkler",
            Metric::SorensenDice => "sorensen_dice",
        }
    }

    pub fn score(self, a: &str, b: &str) -> f64 {
        match self {
            Metric::LevenshteinNormalized => levenshtein_normalized(a, b),
            Metric::JaroWinkler => jaro_winkler(a, b),
            Metric::SorensenDice => sorensen_dice(a, b),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = SimilarityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "levenshtein_normalized" | "levenshtein" => Ok(Metric::LevenshteinNormalized),
            "jaro_winkler" => Ok(Metric::JaroWinkler),
            "sorensen_dice" | "sorensen" => Ok(Metric::SorensenDice),
            other => Err(SimilarityError::UnknownMetric(other.to_string())),
        }
    }
}

// ---------------------------------------------------------------------------
// Cleaning

/// Legal-form tokens removed by [`CleaningPolicy::strip_legal_suffixes`].
pub const LEGAL_SUFFIXES: [&str; 8] = ["ltd", "gmbh", "inc", "llc", "ag", "se", "co", "corp"];

/// Which normalization steps [`clean_text`] applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CleaningPolicy {
    pub lowercase: bool,
    /// Replaces every character that is neither alphanumeric nor whitespace
    /// with a space.
    pub strip_punctuation: bool,
    /// Removes trailing [`LEGAL_SUFFIXES`] tokens (case-insensitive, a
    /// trailing `.` on the token is ignored), repeatedly.
    pub strip_legal_suffixes: bool,
    /// Trims and replaces runs of whitespace with one space.
    pub collapse_whitespace: bool,
}

impl CleaningPolicy {
    pub const ALL: CleaningPolicy = CleaningPolicy {
        lowercase: true,
        strip_punctuation: true,
        strip_legal_suffixes: true,
        collapse_whitespace: true,
    };

    pub const NONE: CleaningPolicy = CleaningPolicy {
        lowercase: false,
        strip_punctuation: false,
        strip_legal_suffixes: false,
        collapse_whitespace: false,
    };
}

impl Default for CleaningPolicy {
    fn default() -> Self {
        CleaningPolicy::ALL
    }
}

/// Comma-separated steps: `lower`, `punct`, `suffix`, `ws`, or `all` / `none`.
impl FromStr for CleaningPolicy {
    type Err = SimilarityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = CleaningPolicy::NONE;
        for step in s.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match step {
                "all" => p = CleaningPolicy::ALL,
                "none" => p = CleaningPolicy::NONE,
                "lower" => p.lowercase = true,
                "punct" => p.strip_punctuation = true,
                "suffix" => p.strip_legal_suffixes = true,
                "ws" => p.collapse_whitespace = true,
                other => return Err(SimilarityError::UnknownCleaningStep(other.to_string())),
            }
        }
        Ok(p)
    }
}

impl fmt::Display for CleaningPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let steps: Vec<&str> = [
            (self.lowercase, "lower"),
            (self.strip_punctuation, "punct"),
            (self.strip_legal_suffixes, "suffix"),
            (self.collapse_whitespace, "ws"),
        ]
        .into_iter()
        .filter_map(|(on, name)| on.then_some(name))
        .collect();
        if steps.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&steps.join(","))
        }
    }
}

fn is_legal_suffix(token: &str) -> bool {
    let t = token.trim_end_matches('.');
    LEGAL_SUFFIXES.iter().any(|s| t.eq_ignore_ascii_case(s))
}

fn strip_trailing_suffixes(s: &str) -> String {
    let mut cur = s;
    loop {
        let trimmed = cur.trim_end();
        let start = trimmed
            .char_indices()
            .rev()
            .find(|&(_, c)| c.is_whitespace())
            .map_or(0, |(i, c)| i + c.len_utf8());
        let token = &trimmed[start..];
        if token.is_empty() || !is_legal_suffix(token) {
            return cur.to_string();
        }
        cur = trimmed[..start].trim_end();
    }
}

/// Applies the enabled steps in the fixed order lowercase → strip punctuation
/// → strip legal suffixes → collapse whitespace.
pub fn clean_text(s: &str, p: &CleaningPolicy) -> String {
    let mut out = s.to_string();
    if p.lowercase {
        out = out.to_lowercase();
    }
    if p.strip_punctuation {
        out = out
            .chars()
            .map(|c| if c.is_alphanumeric() || c.is_whitespace() { c } else { ' ' })
            .collect();
    }
    if p.strip_legal_suffixes {
        out = strip_trailing_suffixes(&out);
    }
    if p.collapse_whitespace {
        out = out.split_whitespace().collect::<Vec<_>>().join(" ");
    }
    out
}

// ---------------------------------------------------------------------------
// Kernels

/// Edit distance with unit-cost insertions, deletions and substitutions.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let above = row[j + 1];
            let cost = usize::from(ca != cb);
            row[j + 1] = (diag + cost).min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[b.len()]
}

/// `1 - d / max(|a|, |b|)`; 1 when both strings are empty.
pub fn levenshtein_normalized(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / longest as f64
}

/// Plain Jaro similarity. The arguments are put in a canonical order (shorter
/// first, then lexicographic) so the result is symmetric. Returns 0 when
/// either string is empty.
pub fn jaro(a: &str, b: &str) -> f64 {
    let mut s1: Vec<char> = a.chars().collect();
    let mut s2: Vec<char> = b.chars().collect();
    if (s1.len(), &s1) > (s2.len(), &s2) {
        std::mem::swap(&mut s1, &mut s2);
    }
    if s1.is_empty() || s2.is_empty() {
        return 0.0;
    }
    let window = (s1.len().max(s2.len()) / 2).saturating_sub(1);
    let mut matched2 = vec![false; s2.len()];
    let mut matches1 = Vec::with_capacity(s1.len());
    for (i, &c) in s1.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(s2.len());
        for j in lo..hi {
            if !matched2[j] && s2[j] == c {
                matched2[j] = true;
                matches1.push(c);
                break;
            }
        }
    }
    let m = matches1.len();
    if m == 0 {
        return 0.0;
    }
    let matches2 = s2.iter().zip(&matched2).filter(|(_, &hit)| hit).map(|(&c, _)| c);
    let half_transpositions = matches1.iter().zip(matches2).filter(|(x, y)| **x != *y).count();
    let t = half_transpositions as f64 / 2.0;
    let m = m as f64;
    (m / s1.len() as f64 + m / s2.len() as f64 + (m - t) / m) / 3.0
}

/// Jaro–Winkler with prefix scale 0.1 and a common prefix of at most 4 chars.
pub fn jaro_winkler(a: &str, b: &str) -> f64 {
    let j = jaro(a, b);
    let prefix = a.chars().zip(b.chars()).take(4).take_while(|(x, y)| x == y).count();
    j + prefix as f64 * 0.1 * (1.0 - j)
}

fn bigrams(chars: &[char]) -> HashMap<(char, char), usize> {
    let mut m = HashMap::new();
    for w in chars.windows(2) {
        *m.entry((w[0], w[1])).or_insert(0) += 1;
    }
    m
}

/// Sørensen–Dice coefficient over character-bigram multisets,
/// `2|X ∩ Y| / (|X| + |Y|)`. Strings shorter than two characters have no
/// bigrams; for those the score is 1 if the strings are equal and 0 otherwise.
pub fn sorensen_dice(a: &str, b: &str) -> f64 {
    let ca: Vec<char> = a.chars().collect();
    let cb: Vec<char> = b.chars().collect();
    if ca.len() < 2 || cb.len() < 2 {
        return if ca == cb { 1.0 } else { 0.0 };
    }
    let xa = bigrams(&ca);
    let xb = bigrams(&cb);
    let common: usize = xa
        .iter()
        .map(|(k, &n)| n.min(xb.get(k).copied().unwrap_or(0)))
        .sum();
    2.0 * common as f64 / ((ca.len() - 1) + (cb.len() - 1)) as f64
}
