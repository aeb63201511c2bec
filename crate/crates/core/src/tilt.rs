//! TILT transparency documents: parsing, validation and serialization.
//!
//! Only the part of the TILT schema that the analyses use is typed: `meta`,
//! `controller` (with its ISIC `sector`), `dataDisclosed` with purposes, legal
//! bases, storage periods and recipients, and `thirdCountryTransfers`. Every
//! other key, at every level, is kept verbatim in an `extra` map and written
//! back out on serialization.
//!
//! Documents are plain JSON, one per file. A directory of such files is a
//! corpus (see [`load_corpus`]).

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{Map, Value};
use thiserror::Error;

/// Errors raised while turning raw text into a [`TiltDocument`].
#[derive(Debug, Error)]
pub enum TiltError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<TiltError>,
    },
}

impl TiltError {
    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        TiltError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// One provider's transparency information.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltDocument {
    pub meta: Meta,
    pub controller: ControllerInfo,
    pub data_disclosed: Vec<DataDisclosed>,
    pub third_country_transfers: Vec<ThirdCountryTransfer>,
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Meta {
    /// `meta._id`, the document identifier.
    pub id: String,
    pub name: String,
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ControllerInfo {
    pub name: String,
    pub country: Option<String>,
    /// Raw ISIC classification as written in the document, e.g. `"J"` or `"J62"`.
    /// Use [`ControllerInfo::sector`] for the parsed form.
    pub sector: Option<String>,
    pub division: Option<String>,
    pub address: Option<String>,
    /// TILT allows either a plain string or a contact object here.
    pub representative: Option<Value>,
    pub extra: Map<String, Value>,
}

impl ControllerInfo {
    pub fn sector(&self) -> Option<Result<Sector, SectorError>> {
        self.sector.as_deref().map(Sector::from_str)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DataDisclosed {
    pub entry_id: String,
    pub category: String,
    pub purposes: Vec<Purpose>,
    pub legal_bases: Vec<LegalBasis>,
    pub storage: Vec<StorageEntry>,
    pub recipients: Vec<RecipientRef>,
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Purpose {
    pub purpose: String,
    pub description: String,
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LegalBasis {
    /// Raw reference string, e.g. `GDPR-6-1-a`. See [`LegalBasis::parsed`].
    pub reference: String,
    pub description: String,
    pub extra: Map<String, Value>,
}

impl LegalBasis {
    pub fn parsed(&self) -> Result<LegalBasisRef, LegalBasisError> {
        self.reference.parse()
    }
}

/// A storage statement; TILT nests one or more temporal periods inside.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StorageEntry {
    pub temporal: Vec<StoragePeriod>,
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StoragePeriod {
    pub description: String,
    /// ISO 8601 duration as written, e.g. `P6M`.
    pub ttl: Option<String>,
    pub extra: Map<String, Value>,
}

impl StoragePeriod {
    /// Storage period in days, when either the `ttl` duration or the
    /// description can be read mechanically. Months count as 30 days and years
    /// as 365.
    pub fn ttl_days(&self) -> Option<u64> {
        self.ttl
            .as_deref()
            .and_then(parse_iso_duration_days)
            .or_else(|| parse_textual_duration_days(&self.description))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecipientRef {
    pub name: String,
    pub country: Option<String>,
    pub division: Option<String>,
    pub address: Option<String>,
    pub category: Option<String>,
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ThirdCountryTransfer {
    pub country: String,
    pub extra: Map<String, Value>,
}

// ---------------------------------------------------------------------------
// Legal bases and ISIC sectors

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LegalBasisError {
    #[error("empty legal basis reference")]
    Empty,
    #[error("malformed GDPR reference `{0}` (expected GDPR-<article>[-<paragraph>[-<letter>]])")]
    Malformed(String),
    #[error("`{0}`: Art. 6(1) only has letters a to f")]
    LetterOutOfRange(String),
}

/// Canonical legal basis reference.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LegalBasisRef {
    Gdpr {
        article: u32,
        paragraph: Option<u32>,
        letter: Option<char>,
    },
    /// National or other law, kept as written.
    Other(String),
}

impl LegalBasisRef {
    /// `Some('a'..='f')` for Art. 6(1) references.
    pub fn art6_letter(&self) -> Option<char> {
        match self {
            LegalBasisRef::Gdpr {
                article: 6,
                paragraph: Some(1),
                letter,
            } => *letter,
            _ => None,
        }
    }
}

impl FromStr for LegalBasisRef {
    type Err = LegalBasisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(LegalBasisError::Empty);
        }
        let Some(rest) = s.strip_prefix("GDPR-") else {
            return Ok(LegalBasisRef::Other(s.to_string()));
        };
        let malformed = || LegalBasisError::Malformed(s.to_string());
        let parts: Vec<&str> = rest.split('-').collect();
        if parts.is_empty() || parts.len() > 3 {
            return Err(malformed());
        }
        let number = |p: &str| -> Result<u32, LegalBasisError> {
            if p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit()) {
                return Err(malformed());
            }
            p.parse().map_err(|_| malformed())
        };
        let article = number(parts[0])?;
        let paragraph = parts.get(1).map(|p| number(p)).transpose()?;
        let letter = match parts.get(2) {
            None => None,
            Some(p) => {
                let mut chars = p.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) if c.is_ascii_lowercase() => Some(c),
                    _ => return Err(malformed()),
                }
            }
        };
        if article == 6 && paragraph == Some(1) {
            if let Some(c) = letter {
                if !('a'..='f').contains(&c) {
                    return Err(LegalBasisError::LetterOutOfRange(s.to_string()));
                }
            }
        }
        Ok(LegalBasisRef::Gdpr {
            article,
            paragraph,
            letter,
        })
    }
}

impl fmt::Display for LegalBasisRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LegalBasisRef::Gdpr {
                article,
                paragraph,
                letter,
            } => {
                write!(f, "GDPR-{article}")?;
                if let Some(p) = paragraph {
                    write!(f, "-{p}")?;
                }
                if let Some(l) = letter {
                    write!(f, "-{l}")?;
                }
                Ok(())
            }
            LegalBasisRef::Other(s) => f.write_str(s),
        }
    }
}

/// ISIC rev. 4 section letter, `A` through `U`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IsicSection(char);

impl IsicSection {
    pub const INFORMATION_AND_COMMUNICATION: IsicSection = IsicSection('J');

    pub fn new(letter: char) -> Option<Self> {
        ('A'..='U').contains(&letter).then_some(IsicSection(letter))
    }

    pub fn letter(self) -> char {
        self.0
    }

    pub fn all() -> impl Iterator<Item = IsicSection> {
        ('A'..='U').map(IsicSection)
    }
}

impl fmt::Display for IsicSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{0}` is not an ISIC section (A-U, optionally followed by a division)")]
pub struct SectorError(pub String);

/// Parsed sector classification: section letter plus optional free-form division.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sector {
    pub section: IsicSection,
    pub division: Option<String>,
}

impl FromStr for Sector {
    type Err = SectorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        let mut chars = trimmed.chars();
        let section = chars
            .next()
            .and_then(IsicSection::new)
            .ok_or_else(|| SectorError(s.to_string()))?;
        let rest = chars.as_str();
        // "J62", "J 62", "J - Information and communication"; but not "Jx".
        if rest.starts_with(|c: char| c.is_alphabetic()) {
            return Err(SectorError(s.to_string()));
        }
        let division = rest
            .trim_start_matches(|c: char| c.is_whitespace() || c == '-' || c == ':')
            .trim();
        Ok(Sector {
            section,
            division: (!division.is_empty()).then(|| division.to_string()),
        })
    }
}

fn parse_iso_duration_days(s: &str) -> Option<u64> {
    let body = s.trim().strip_prefix('P')?;
    if body.is_empty() || body.contains('T') {
        return None;
    }
    let mut days = 0u64;
    let mut num = String::new();
    for c in body.chars() {
        if c.is_ascii_digit() {
            num.push(c);
            continue;
        }
        let n: u64 = num.parse().ok()?;
        num.clear();
        days += n * match c {
            'Y' => 365,
            'M' => 30,
            'W' => 7,
            'D' => 1,
            _ => return None,
        };
    }
    num.is_empty().then_some(days)
}

fn parse_textual_duration_days(s: &str) -> Option<u64> {
    let lower = s.trim().to_lowercase();
    let mut words = lower.split_whitespace();
    let n: u64 = words.next()?.parse().ok()?;
    let unit = words.next()?.trim_end_matches(['.', ',']);
    if words.next().is_some() {
        return None;
    }
    let factor = match unit {
        "day" | "days" => 1,
        "week" | "weeks" => 7,
        "month" | "months" => 30,
        "year" | "years" => 365,
        _ => return None,
    };
    Some(n * factor)
}

// ---------------------------------------------------------------------------
// Parsing

/// Parses one TILT document from JSON text.
pub fn parse_tilt(raw: &str) -> Result<TiltDocument, TiltError> {
    let value: Value = serde_json::from_str(raw).map_err(|e| TiltError::Syntax(e.to_string()))?;
    from_value(value)
}

/// Builds a document from an already parsed JSON value.
pub fn from_value(value: Value) -> Result<TiltDocument, TiltError> {
    let Value::Object(mut root) = value else {
        return Err(TiltError::schema("$", "document must be a JSON object"));
    };

    let mut meta_obj = take_object(&mut root, "meta", "$")?
        .ok_or_else(|| TiltError::schema("$.meta", "missing required object"))?;
    let meta = Meta {
        id: take_string(&mut meta_obj, "_id", "$.meta")?
            .filter(|s| !s.is_empty())
            .ok_or_else(|| TiltError::schema("$.meta._id", "missing required field"))?,
        name: take_string(&mut meta_obj, "name", "$.meta")?.unwrap_or_default(),
        extra: meta_obj,
    };

    let mut ctrl = take_object(&mut root, "controller", "$")?
        .ok_or_else(|| TiltError::schema("$.controller", "missing required object"))?;
    let controller = ControllerInfo {
        name: take_string(&mut ctrl, "name", "$.controller")?
            .filter(|s| !s.is_empty())
            .ok_or_else(|| TiltError::schema("$.controller.name", "missing required field"))?,
        country: take_string(&mut ctrl, "country", "$.controller")?,
        sector: take_string(&mut ctrl, "sector", "$.controller")?,
        division: take_string(&mut ctrl, "division", "$.controller")?,
        address: take_string(&mut ctrl, "address", "$.controller")?,
        representative: ctrl.remove("representative").filter(|v| !v.is_null()),
        extra: ctrl,
    };

    let data_disclosed = take_array(&mut root, "dataDisclosed", "$")?
        .into_iter()
        .enumerate()
        .map(|(i, v)| parse_data_disclosed(v, &format!("$.dataDisclosed[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;

    let third_country_transfers = take_array(&mut root, "thirdCountryTransfers", "$")?
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let path = format!("$.thirdCountryTransfers[{i}]");
            let mut obj = as_object(v, &path)?;
            Ok(ThirdCountryTransfer {
                country: take_string(&mut obj, "country", &path)?.unwrap_or_default(),
                extra: obj,
            })
        })
        .collect::<Result<Vec<_>, TiltError>>()?;

    Ok(TiltDocument {
        meta,
        controller,
        data_disclosed,
        third_country_transfers,
        extra: root,
    })
}

fn parse_data_disclosed(v: Value, path: &str) -> Result<DataDisclosed, TiltError> {
    let mut obj = as_object(v, path)?;
    let entry_id = take_string(&mut obj, "_id", path)?.unwrap_or_default();
    let category = take_string(&mut obj, "category", path)?.unwrap_or_default();

    let purposes = take_array(&mut obj, "purposes", path)?
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let p = format!("{path}.purposes[{i}]");
            let mut o = as_object(v, &p)?;
            Ok(Purpose {
                purpose: take_string(&mut o, "purpose", &p)?.unwrap_or_default(),
                description: take_string(&mut o, "description", &p)?.unwrap_or_default(),
                extra: o,
            })
        })
        .collect::<Result<Vec<_>, TiltError>>()?;

    let legal_bases = take_array(&mut obj, "legalBases", path)?
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let p = format!("{path}.legalBases[{i}]");
            let mut o = as_object(v, &p)?;
            Ok(LegalBasis {
                reference: take_string(&mut o, "reference", &p)?.unwrap_or_default(),
                description: take_string(&mut o, "description", &p)?.unwrap_or_default(),
                extra: o,
            })
        })
        .collect::<Result<Vec<_>, TiltError>>()?;

    let storage = take_array(&mut obj, "storage", path)?
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let p = format!("{path}.storage[{i}]");
            let mut o = as_object(v, &p)?;
            let temporal = take_array(&mut o, "temporal", &p)?
                .into_iter()
                .enumerate()
                .map(|(j, v)| {
                    let tp = format!("{p}.temporal[{j}]");
                    let mut t = as_object(v, &tp)?;
                    Ok(StoragePeriod {
                        description: take_string(&mut t, "description", &tp)?.unwrap_or_default(),
                        ttl: take_string(&mut t, "ttl", &tp)?,
                        extra: t,
                    })
                })
                .collect::<Result<Vec<_>, TiltError>>()?;
            Ok(StorageEntry { temporal, extra: o })
        })
        .collect::<Result<Vec<_>, TiltError>>()?;

    let recipients = take_array(&mut obj, "recipients", path)?
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let p = format!("{path}.recipients[{i}]");
            let mut o = as_object(v, &p)?;
            Ok(RecipientRef {
                name: take_string(&mut o, "name", &p)?.unwrap_or_default(),
                country: take_string(&mut o, "country", &p)?,
                division: take_string(&mut o, "division", &p)?,
                address: take_string(&mut o, "address", &p)?,
                category: take_string(&mut o, "category", &p)?,
                extra: o,
            })
        })
        .collect::<Result<Vec<_>, TiltError>>()?;

    Ok(DataDisclosed {
        entry_id,
        category,
        purposes,
        legal_bases,
        storage,
        recipients,
        extra: obj,
    })
}

fn as_object(v: Value, path: &str) -> Result<Map<String, Value>, TiltError> {
    match v {
        Value::Object(m) => Ok(m),
        other => Err(TiltError::schema(
            path,
            format!("expected object, found {}", type_name(&other)),
        )),
    }
}

fn take_object(
    obj: &mut Map<String, Value>,
    key: &str,
    path: &str,
) -> Result<Option<Map<String, Value>>, TiltError> {
    match obj.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => as_object(v, &format!("{path}.{key}")).map(Some),
    }
}

fn take_array(obj: &mut Map<String, Value>, key: &str, path: &str) -> Result<Vec<Value>, TiltError> {
    match obj.remove(key) {
        None | Some(Value::Null) => Ok(Vec::new()),
        Some(Value::Array(a)) => Ok(a),
        Some(other) => Err(TiltError::schema(
            format!("{path}.{key}"),
            format!("expected array, found {}", type_name(&other)),
        )),
    }
}

/// Strings are taken as-is; numbers and booleans are accepted and stringified
/// since older corpus files are loose about e.g. numeric ids.
fn take_string(obj: &mut Map<String, Value>, key: &str, path: &str) -> Result<Option<String>, TiltError> {
    match obj.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(Value::Number(n)) => Ok(Some(n.to_string())),
        Some(Value::Bool(b)) => Ok(Some(b.to_string())),
        Some(other) => Err(TiltError::schema(
            format!("{path}.{key}"),
            format!("expected string, found {}", type_name(&other)),
        )),
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

// ---------------------------------------------------------------------------
// Serialization

fn put_opt(obj: &mut Map<String, Value>, key: &str, v: &Option<String>) {
    if let Some(s) = v {
        obj.insert(key.to_string(), Value::String(s.clone()));
    }
}

fn with_extra(extra: &Map<String, Value>) -> Map<String, Value> {
    extra.clone()
}

impl TiltDocument {
    /// Converts back into TILT JSON. Unrecognized keys are restored from `extra`.
    pub fn to_value(&self) -> Value {
        let mut root = with_extra(&self.extra);

        let mut meta = with_extra(&self.meta.extra);
        meta.insert("_id".into(), Value::String(self.meta.id.clone()));
        meta.insert("name".into(), Value::String(self.meta.name.clone()));
        root.insert("meta".into(), Value::Object(meta));

        let c = &self.controller;
        let mut ctrl = with_extra(&c.extra);
        ctrl.insert("name".into(), Value::String(c.name.clone()));
        put_opt(&mut ctrl, "country", &c.country);
        put_opt(&mut ctrl, "sector", &c.sector);
        put_opt(&mut ctrl, "division", &c.division);
        put_opt(&mut ctrl, "address", &c.address);
        if let Some(r) = &c.representative {
            ctrl.insert("representative".into(), r.clone());
        }
        root.insert("controller".into(), Value::Object(ctrl));

        let entries = self.data_disclosed.iter().map(DataDisclosed::to_value).collect();
        root.insert("dataDisclosed".into(), Value::Array(entries));

        if !self.third_country_transfers.is_empty() {
            let tct = self
                .third_country_transfers
                .iter()
                .map(|t| {
                    let mut o = with_extra(&t.extra);
                    o.insert("country".into(), Value::String(t.country.clone()));
                    Value::Object(o)
                })
                .collect();
            root.insert("thirdCountryTransfers".into(), Value::Array(tct));
        }
        Value::Object(root)
    }

    /// Pretty-printed JSON with a trailing newline. Keys are emitted in sorted
    /// order, so output is stable for identical documents.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("JSON values always serialize");
        s.push('\n');
        s
    }

    /// Distinct ISO country codes of third-country transfers, sorted.
    pub fn third_countries(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .third_country_transfers
            .iter()
            .map(|t| t.country.clone())
            .filter(|c| !c.is_empty())
            .collect();
        v.sort();
        v.dedup();
        v
    }
}

impl DataDisclosed {
    fn to_value(&self) -> Value {
        let mut o = with_extra(&self.extra);
        o.insert("_id".into(), Value::String(self.entry_id.clone()));
        o.insert("category".into(), Value::String(self.category.clone()));
        let purposes = self
            .purposes
            .iter()
            .map(|p| {
                let mut m = with_extra(&p.extra);
                m.insert("purpose".into(), Value::String(p.purpose.clone()));
                m.insert("description".into(), Value::String(p.description.clone()));
                Value::Object(m)
            })
            .collect();
        o.insert("purposes".into(), Value::Array(purposes));
        let bases = self
            .legal_bases
            .iter()
            .map(|l| {
                let mut m = with_extra(&l.extra);
                m.insert("reference".into(), Value::String(l.reference.clone()));
                m.insert("description".into(), Value::String(l.description.clone()));
                Value::Object(m)
            })
            .collect();
        o.insert("legalBases".into(), Value::Array(bases));
        let storage = self
            .storage
            .iter()
            .map(|s| {
                let mut m = with_extra(&s.extra);
                let temporal = s
                    .temporal
                    .iter()
                    .map(|t| {
                        let mut tm = with_extra(&t.extra);
                        tm.insert("description".into(), Value::String(t.description.clone()));
                        put_opt(&mut tm, "ttl", &t.ttl);
                        Value::Object(tm)
                    })
                    .collect();
                m.insert("temporal".into(), Value::Array(temporal));
                Value::Object(m)
            })
            .collect();
        o.insert("storage".into(), Value::Array(storage));
        let recipients = self
            .recipients
            .iter()
            .map(|r| {
                let mut m = with_extra(&r.extra);
                m.insert("name".into(), Value::String(r.name.clone()));
                put_opt(&mut m, "country", &r.country);
                put_opt(&mut m, "division", &r.division);
                put_opt(&mut m, "address", &r.address);
                put_opt(&mut m, "category", &r.category);
                Value::Object(m)
            })
            .collect();
        o.insert("recipients".into(), Value::Array(recipients));
        Value::Object(o)
    }
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    pub severity: Severity,
    pub path: String,
    pub message: String,
}

impl ValidationIssue {
    fn error(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            path: path.into(),
            message: message.into(),
        }
    }

    fn warning(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.severity, self.path, self.message)
    }
}

fn is_country_code(s: &str) -> bool {
    s.len() == 2 && s.bytes().all(|b| b.is_ascii_uppercase())
}

/// Checks a document against the model invariants. Issues are returned in
/// document order; an empty list means the document is fully valid.
pub fn validate_tilt(doc: &TiltDocument) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();

    if doc.meta.id.trim().is_empty() {
        issues.push(ValidationIssue::error("$.meta._id", "document id is empty"));
    }
    if doc.meta.name.trim().is_empty() {
        issues.push(ValidationIssue::warning("$.meta.name", "document name is empty"));
    }

    let c = &doc.controller;
    if c.name.trim().is_empty() {
        issues.push(ValidationIssue::error("$.controller.name", "controller name is empty"));
    }
    match c.sector() {
        None => issues.push(ValidationIssue::warning(
            "$.controller.sector",
            "no ISIC sector classification",
        )),
        Some(Err(e)) => issues.push(ValidationIssue::error("$.controller.sector", e.to_string())),
        Some(Ok(_)) => {}
    }
    if let Some(country) = &c.country {
        if !is_country_code(country) {
            issues.push(ValidationIssue::warning(
                "$.controller.country",
                format!("`{country}` is not an ISO 3166-1 alpha-2 code"),
            ));
        }
    }

    let mut seen_ids = HashSet::new();
    for (i, entry) in doc.data_disclosed.iter().enumerate() {
        let base = format!("$.dataDisclosed[{i}]");
        if entry.entry_id.is_empty() {
            issues.push(ValidationIssue::warning(format!("{base}._id"), "entry has no id"));
        } else if !seen_ids.insert(entry.entry_id.as_str()) {
            issues.push(ValidationIssue::error(
                format!("{base}._id"),
                format!("duplicate entry id `{}`", entry.entry_id),
            ));
        }
        if entry.category.trim().is_empty() {
            issues.push(ValidationIssue::error(format!("{base}.category"), "category is empty"));
        }
        for (j, lb) in entry.legal_bases.iter().enumerate() {
            if let Err(e) = lb.parsed() {
                issues.push(ValidationIssue::error(
                    format!("{base}.legalBases[{j}].reference"),
                    e.to_string(),
                ));
            }
        }
        for (j, r) in entry.recipients.iter().enumerate() {
            if r.name.trim().is_empty() {
                issues.push(ValidationIssue::error(
                    format!("{base}.recipients[{j}].name"),
                    "recipient name is empty",
                ));
            }
            if let Some(country) = &r.country {
                if !is_country_code(country) {
                    issues.push(ValidationIssue::warning(
                        format!("{base}.recipients[{j}].country"),
                        format!("`{country}` is not an ISO 3166-1 alpha-2 code"),
                    ));
                }
            }
        }
    }

    for (i, t) in doc.third_country_transfers.iter().enumerate() {
        if !is_country_code(&t.country) {
            issues.push(ValidationIssue::warning(
                format!("$.thirdCountryTransfers[{i}].country"),
                format!("`{}` is not an ISO 3166-1 alpha-2 code", t.country),
            ));
        }
    }

    issues
}

pub fn has_errors(issues: &[ValidationIssue]) -> bool {
    issues.iter().any(|i| i.severity == Severity::Error)
}

/// Cross-document checks: `meta._id` must be unique within a corpus.
pub fn validate_corpus(docs: &[TiltDocument]) -> Vec<(usize, ValidationIssue)> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashMap::new();
    for (i, doc) in docs.iter().enumerate() {
        for issue in validate_tilt(doc) {
            out.push((i, issue));
        }
        if let Some(first) = seen.insert(doc.meta.id.as_str(), i) {
            out.push((
                i,
                ValidationIssue::error(
                    "$.meta._id",
                    format!("id `{}` already used by document #{first}", doc.meta.id),
                ),
            ));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Corpus loading

/// A document together with the file it came from.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub path: PathBuf,
    pub document: TiltDocument,
}

fn is_tilt_file(p: &Path) -> bool {
    let hidden = p
        .file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n.starts_with('_') || n.starts_with('.'));
    !hidden && matches!(p.extension().and_then(|e| e.to_str()), Some("json") | Some("tilt"))
}

/// Lists the `.json`/`.tilt` files of a corpus directory in sorted order.
/// Names starting with `_` or `.` are skipped; sidecar files use that.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, TiltError> {
    let read = fs::read_dir(dir).map_err(|source| TiltError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files = Vec::new();
    for entry in read {
        let entry = entry.map_err(|source| TiltError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let p = entry.path();
        if p.is_file() && is_tilt_file(&p) {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

pub fn load_file(path: &Path) -> Result<TiltDocument, TiltError> {
    let raw = fs::read_to_string(path).map_err(|source| TiltError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_tilt(&raw).map_err(|e| TiltError::InFile {
        path: path.to_path_buf(),
        source: Box::new(e),
    })
}

/// Loads every document of a corpus directory, in file-name order.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>, TiltError> {
    corpus_files(dir)?
        .into_iter()
        .map(|path| {
            let document = load_file(&path)?;
            Ok(CorpusEntry { path, document })
        })
        .collect()
}
