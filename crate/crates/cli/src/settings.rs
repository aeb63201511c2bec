//! Optional TOML settings file.
//!
//! Top-level `graph` and `corpus`, plus one table per command whose keys are
//! the command's long flags with `-` spelled `_`:
//!
//! ```toml
//! graph = "work/tap.graph"
//! [link]
//! metric = "jaro_winkler"
//! threshold = 0.8
//! ```

use std::fs;
use std::path::Path;

use serde_json::Value as Json;

use crate::error::{CliError, CliResult};

const KNOWN: &[(&str, &[&str])] = &[
    ("", &["graph", "corpus"]),
    ("link", &["metric", "threshold", "clean", "source", "target"]),
    ("cluster", &["edges", "score_cut", "binary", "seed", "min_gain", "max_passes"]),
    ("rank", &["edges", "score_cut", "binary", "damping", "tol", "max_iter", "top"]),
    ("network", &["edges", "score_cut", "binary", "depth"]),
    ("synth", &["n", "mu_dd", "mu_purposes", "clusters", "intra_weight", "p_link", "seed", "out"]),
    ("export", &["format", "level"]),
];

#[derive(Debug, Default)]
pub struct Settings {
    table: toml::Table,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::Usage(format!("settings file {}: {}", path.display(), e.message())))?;
        let s = Self { table };
        s.check()?;
        Ok(s)
    }

    fn check(&self) -> CliResult {
        let top = KNOWN[0].1;
        for (key, value) in &self.table {
            if top.contains(&key.as_str()) {
                continue;
            }
            let Some((_, keys)) = KNOWN.iter().find(|(s, _)| !s.is_empty() && s == key) else {
                return Err(CliError::Usage(format!("unknown settings key `{key}`")));
            };
            let toml::Value::Table(t) = value else {
                return Err(CliError::Usage(format!("settings `{key}` must be a table")));
            };
            if let Some(k) = t.keys().find(|k| !keys.contains(&k.as_str())) {
                return Err(CliError::Usage(format!("unknown settings key `{key}.{k}`")));
            }
        }
        Ok(())
    }

    fn raw(&self, section: &str, key: &str) -> Option<&toml::Value> {
        if section.is_empty() {
            self.table.get(key)
        } else {
            self.table.get(section)?.as_table()?.get(key)
        }
    }

    /// The flag when given, else the settings entry, else `None`.
    pub fn pick<T: serde::de::DeserializeOwned>(&self, flag: Option<T>, section: &str, key: &str) -> CliResult<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        let Some(v) = self.raw(section, key) else { return Ok(None) };
        // through JSON so integers are accepted where floats are expected
        let json: Json = serde_json::to_value(v).map_err(|e| CliError::Usage(e.to_string()))?;
        serde_json::from_value(json)
            .map(Some)
            .map_err(|e| CliError::Usage(format!("settings `{}`: {e}", if section.is_empty() { key.to_string() } else { format!("{section}.{key}") })))
    }

    pub fn flag(&self, flag: bool, section: &str, key: &str) -> CliResult<bool> {
        Ok(flag || self.pick::<bool>(None, section, key)?.unwrap_or(false))
    }
}
