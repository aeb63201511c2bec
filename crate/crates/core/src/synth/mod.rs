//! Synthetic TILT corpora.
//!
//! Each controller gets a Poisson number of data-disclosed entries, each
//! entry a Poisson number of purposes, one legal basis drawn from a
//! categorical distribution over GDPR Art. 6(1)(a)–(f), one storage period
//! and exactly one recipient. With probability `p_recipient_link` that
//! recipient is another generated controller, chosen with weight
//! `intra_cluster_weight` for controllers in the same cluster and 1 otherwise;
//! otherwise it is an external organisation.
//!
//! Randomness comes from one ChaCha8 generator per concern (clusters, counts,
//! content, links), all derived from the seed, so changing for example the
//! link weights leaves the entry counts untouched.

mod poisson;
pub mod vocab;

pub use poisson::{sample_poisson, INVERSION_LIMIT};

use std::collections::{BTreeMap, HashMap};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Map;
use thiserror::Error;

use crate::tilt::{
    ControllerInfo, DataDisclosed, LegalBasis, Meta, Purpose, RecipientRef, StorageEntry, StoragePeriod,
    ThirdCountryTransfer, TiltDocument,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("corpus has no generation metadata")]
    MissingMetadata,
}

const STREAM_CLUSTERS: u64 = 1;
const STREAM_COUNTS: u64 = 2;
const STREAM_CONTENT: u64 = 3;
const STREAM_LINKS: u64 = 4;

/// Probability that a synthetic document declares a third-country transfer.
const P_THIRD_COUNTRY: f64 = 0.25;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ClusterSpec {
    /// Each controller picks one of `n` clusters uniformly; cluster `k` gets
    /// sector `vocab::SECTORS[k % len]`.
    Uniform { n: usize },
    /// One cluster per sector, chosen with the given weights.
    Sectors { weights: Vec<(String, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_controllers: usize,
    pub mu_data_disclosed: f64,
    pub mu_purposes: f64,
    pub clusters: ClusterSpec,
    pub intra_cluster_weight: f64,
    pub p_recipient_link: f64,
    /// Weights for GDPR-6-1-a through GDPR-6-1-f.
    pub legal_basis_weights: [f64; 6],
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_controllers: 50,
            mu_data_disclosed: 7.0,
            mu_purposes: 1.0,
            clusters: ClusterSpec::Uniform { n: 5 },
            intra_cluster_weight: 1.0,
            p_recipient_link: 0.3,
            legal_basis_weights: [1.0; 6],
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Config(m));
        if self.n_controllers == 0 {
            return bad("n_controllers must be positive".into());
        }
        for (name, mu) in [("mu_data_disclosed", self.mu_data_disclosed), ("mu_purposes", self.mu_purposes)] {
            if !(mu.is_finite() && mu >= 0.0) {
                return bad(format!("{name} must be a finite number >= 0, got {mu}"));
            }
        }
        match &self.clusters {
            ClusterSpec::Uniform { n } if *n == 0 => return bad("number of clusters must be positive".into()),
            ClusterSpec::Sectors { weights } => {
                if weights.is_empty() || weights.iter().any(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
                    return bad("sector weights must be nonnegative and non-empty".into());
                }
                if weights.iter().map(|(_, w)| w).sum::<f64>() <= 0.0 {
                    return bad("sector weights must not all be zero".into());
                }
            }
            _ => {}
        }
        if !(self.intra_cluster_weight.is_finite() && self.intra_cluster_weight >= 1.0) {
            return bad(format!("intra_cluster_weight must be >= 1, got {}", self.intra_cluster_weight));
        }
        if !(0.0..=1.0).contains(&self.p_recipient_link) {
            return bad(format!("p_recipient_link must be in [0, 1], got {}", self.p_recipient_link));
        }
        let w = &self.legal_basis_weights;
        if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || w.iter().sum::<f64>() <= 0.0 {
            return bad("legal basis weights must be nonnegative with a positive sum".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedController {
    pub meta_id: String,
    pub cluster: usize,
    pub sector: String,
}

/// Ground truth for one cross-controller recipient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedLink {
    pub source: String,
    pub entry_id: String,
    pub target: String,
    pub intra_cluster: bool,
}

/// Sidecar written next to a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationMetadata {
    pub seed: u64,
    pub config: SynthConfig,
    pub controllers: Vec<GeneratedController>,
    pub links: Vec<GeneratedLink>,
}

impl GenerationMetadata {
    pub fn cluster_of(&self, meta_id: &str) -> Option<usize> {
        self.controllers.iter().find(|c| c.meta_id == meta_id).map(|c| c.cluster)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub documents: Vec<TiltDocument>,
    pub metadata: GenerationMetadata,
}

/// Meta id of generated controller `k`.
pub fn controller_id(k: usize) -> String {
    format!("controller-{k}")
}

const ONSETS: [char; 15] = ['b', 'd', 'f', 'g', 'h', 'k', 'l', 'm', 'n', 'p', 'r', 's', 't', 'v', 'z'];
const VOWELS: [char; 5] = ['a', 'e', 'i', 'o', 'u'];
const LEGAL_FORMS: [&str; 7] = ["GmbH", "AG", "Ltd", "SE", "Inc", "LLC", "Corp"];

/// Display name of generated controller `k`: a four-syllable word and a
/// legal form, e.g. `Rizotefa GmbH`. Distinct for `k < 75^4`; the index
/// spreads over the syllable space so neighbours share no prefix, keeping
/// unrelated names far apart under the string metrics.
pub fn controller_name(k: usize) -> String {
    const SPACE: u64 = 75 * 75 * 75 * 75;
    // 7_919_177 is coprime to 75, so this is a bijection on 0..SPACE
    let mut x = (k as u64 % SPACE) * 7_919_177 % SPACE;
    let mut word = String::new();
    for _ in 0..4 {
        let syl = (x % 75) as usize;
        x /= 75;
        word.push(ONSETS[syl / 5]);
        word.push(VOWELS[syl % 5]);
    }
    let mut chars = word.chars();
    let first = chars.next().expect("four syllables").to_ascii_uppercase();
    let form = LEGAL_FORMS[k % LEGAL_FORMS.len()];
    match k as u64 / SPACE {
        0 => format!("{first}{} {form}", chars.as_str()),
        round => format!("{first}{} {round} {form}", chars.as_str()),
    }
}

fn assign_clusters(cfg: &SynthConfig) -> (Vec<usize>, Vec<String>) {
    let mut rng = stream(cfg.seed, STREAM_CLUSTERS);
    match &cfg.clusters {
        ClusterSpec::Uniform { n } => {
            let sectors = (0..*n).map(|k| vocab::SECTORS[k % vocab::SECTORS.len()].to_string()).collect();
            ((0..cfg.n_controllers).map(|_| rng.random_range(0..*n)).collect(), sectors)
        }
        ClusterSpec::Sectors { weights } => {
            let dist = WeightedIndex::new(weights.iter().map(|(_, w)| *w)).expect("validated weights");
            let sectors = weights.iter().map(|(s, _)| s.clone()).collect();
            ((0..cfg.n_controllers).map(|_| dist.sample(&mut rng)).collect(), sectors)
        }
    }
}

/// Picks a link target for `source` with same-cluster controllers weighted
/// by `w`. `None` when there is no other controller.
fn pick_target(rng: &mut ChaCha8Rng, source: usize, cluster: &[usize], members: &[Vec<usize>], w: f64) -> Option<usize> {
    let n = cluster.len();
    let own = &members[cluster[source]];
    let same = own.len() - 1;
    let other = n - own.len();
    let total = w * same as f64 + other as f64;
    if total == 0.0 {
        return None;
    }
    if rng.random::<f64>() * total < w * same as f64 {
        let j = rng.random_range(0..same);
        let pos = own.iter().position(|&c| c == source).expect("source is in its cluster");
        Some(own[if j >= pos { j + 1 } else { j }])
    } else {
        let mut r = rng.random_range(0..other);
        for (c, m) in members.iter().enumerate() {
            if c == cluster[source] {
                continue;
            }
            if r < m.len() {
                return Some(m[r]);
            }
            r -= m.len();
        }
        unreachable!("r < number of controllers outside the cluster")
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<SyntheticCorpus, SynthError> {
    cfg.validate()?;
    let n = cfg.n_controllers;
    let (cluster, sectors) = assign_clusters(cfg);
    let mut members = vec![Vec::new(); sectors.len()];
    for (k, c) in cluster.iter().enumerate() {
        members[*c].push(k);
    }

    let mut counts = stream(cfg.seed, STREAM_COUNTS);
    let mut content = stream(cfg.seed, STREAM_CONTENT);
    let mut links = stream(cfg.seed, STREAM_LINKS);
    let basis = WeightedIndex::new(cfg.legal_basis_weights).expect("validated weights");
    let pick = |rng: &mut ChaCha8Rng, xs: &[&str]| xs[rng.random_range(0..xs.len())].to_string();

    let mut documents = Vec::with_capacity(n);
    let mut truth = Vec::new();
    for k in 0..n {
        let id = controller_id(k);
        let name = controller_name(k);
        let n_entries = sample_poisson(&mut counts, cfg.mu_data_disclosed);
        let mut entries = Vec::with_capacity(n_entries as usize);
        for e in 0..n_entries {
            let entry_id = format!("{id}-d{e}");
            let n_purposes = sample_poisson(&mut counts, cfg.mu_purposes);
            let purposes = (0..n_purposes)
                .map(|_| Purpose {
                    purpose: pick(&mut content, vocab::PURPOSES),
                    description: String::new(),
                    extra: Map::new(),
                })
                .collect();
            let letter = vocab::LEGAL_BASIS_LETTERS[basis.sample(&mut content)];
            let (desc, ttl) = vocab::STORAGE[content.random_range(0..vocab::STORAGE.len())];
            let category = pick(&mut content, vocab::CATEGORIES);
            let external = pick(&mut content, vocab::EXTERNAL_RECIPIENTS);

            let target = if links.random::<f64>() < cfg.p_recipient_link {
                pick_target(&mut links, k, &cluster, &members, cfg.intra_cluster_weight)
            } else {
                None
            };
            let recipient = match target {
                Some(t) => {
                    truth.push(GeneratedLink {
                        source: id.clone(),
                        entry_id: entry_id.clone(),
                        target: controller_id(t),
                        intra_cluster: cluster[t] == cluster[k],
                    });
                    controller_name(t)
                }
                None => external,
            };
            entries.push(DataDisclosed {
                entry_id,
                category,
                purposes,
                legal_bases: vec![LegalBasis {
                    reference: format!("GDPR-6-1-{letter}"),
                    description: String::new(),
                    extra: Map::new(),
                }],
                storage: vec![StorageEntry {
                    temporal: vec![StoragePeriod {
                        description: desc.to_string(),
                        ttl: Some(ttl.to_string()),
                        extra: Map::new(),
                    }],
                    extra: Map::new(),
                }],
                recipients: vec![RecipientRef {
                    name: recipient,
                    ..RecipientRef::default()
                }],
                extra: Map::new(),
            });
        }
        let third_country_transfers = if content.random::<f64>() < P_THIRD_COUNTRY {
            vec![ThirdCountryTransfer {
                country: pick(&mut content, vocab::THIRD_COUNTRIES),
                extra: Map::new(),
            }]
        } else {
            Vec::new()
        };
        documents.push(TiltDocument {
            meta: Meta {
                id: id.clone(),
                name: name.clone(),
                extra: Map::new(),
            },
            controller: ControllerInfo {
                name: name.clone(),
                country: Some(pick(&mut content, vocab::COUNTRIES)),
                sector: Some(sectors[cluster[k]].clone()),
                ..ControllerInfo::default()
            },
            data_disclosed: entries,
            third_country_transfers,
            extra: Map::new(),
        });
    }

    Ok(SyntheticCorpus {
        documents,
        metadata: GenerationMetadata {
            seed: cfg.seed,
            config: cfg.clone(),
            controllers: (0..n)
                .map(|k| GeneratedController {
                    meta_id: controller_id(k),
                    cluster: cluster[k],
                    sector: sectors[cluster[k]].clone(),
                })
                .collect(),
            links: truth,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MixingStats {
    /// Recipients naming another generated controller.
    pub links: usize,
    /// Of those, recipients in the source's own cluster.
    pub intra: usize,
}

impl MixingStats {
    /// `None` when there are no cross-controller links.
    pub fn fraction(&self) -> Option<f64> {
        (self.links > 0).then(|| self.intra as f64 / self.links as f64)
    }
}

/// Counts recipients in `docs` whose name is the controller name of another
/// generated controller, and how many of those share the source's cluster.
/// Cluster ids come from the generation metadata.
pub fn cluster_mixing(docs: &[TiltDocument], meta: Option<&GenerationMetadata>) -> Result<MixingStats, SynthError> {
    let meta = meta.ok_or(SynthError::MissingMetadata)?;
    let cluster: HashMap<&str, usize> = meta.controllers.iter().map(|c| (c.meta_id.as_str(), c.cluster)).collect();
    let by_name: HashMap<&str, &str> = docs.iter().map(|d| (d.controller.name.as_str(), d.meta.id.as_str())).collect();
    let mut stats = MixingStats { links: 0, intra: 0 };
    for doc in docs {
        let Some(&own) = cluster.get(doc.meta.id.as_str()) else { continue };
        for r in doc.data_disclosed.iter().flat_map(|d| &d.recipients) {
            let Some(&target) = by_name.get(r.name.as_str()) else { continue };
            if target == doc.meta.id {
                continue;
            }
            if let Some(&theirs) = cluster.get(target) {
                stats.links += 1;
                stats.intra += usize::from(theirs == own);
            }
        }
    }
    Ok(stats)
}

/// Empirical distributions of a corpus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub documents: usize,
    /// Entries per controller → number of controllers.
    pub entries_histogram: BTreeMap<u64, usize>,
    pub mean_data_disclosed: f64,
    /// Purposes per controller → number of controllers.
    pub purposes_histogram: BTreeMap<u64, usize>,
    pub mean_purposes_per_controller: f64,
    /// Total purposes over total entries; 0 without entries.
    pub mean_purposes_per_entry: f64,
    pub total_entries: usize,
    pub legal_basis_frequency: BTreeMap<String, usize>,
    /// ISIC section letter (or `unknown`) → controllers.
    pub sector_frequency: BTreeMap<String, usize>,
}

impl CorpusStats {
    /// A config reproducing these distributions for `n` controllers.
    pub fn to_config(&self, n_controllers: usize, seed: u64) -> SynthConfig {
        let mut weights = [0.0; 6];
        for (reference, count) in &self.legal_basis_frequency {
            if let Some(letter) = reference.strip_prefix("GDPR-6-1-").and_then(|l| l.chars().next()) {
                if let Some(i) = vocab::LEGAL_BASIS_LETTERS.iter().position(|c| *c == letter) {
                    weights[i] += *count as f64;
                }
            }
        }
        if weights.iter().sum::<f64>() == 0.0 {
            weights = [1.0; 6];
        }
        SynthConfig {
            n_controllers,
            mu_data_disclosed: self.mean_data_disclosed,
            mu_purposes: self.mean_purposes_per_entry,
            clusters: ClusterSpec::Sectors {
                weights: self.sector_frequency.iter().map(|(s, c)| (s.clone(), *c as f64)).collect(),
            },
            seed,
            legal_basis_weights: weights,
            ..SynthConfig::default()
        }
    }
}

pub fn estimate_distributions(corpus: &[TiltDocument]) -> Result<CorpusStats, SynthError> {
    if corpus.is_empty() {
        return Err(SynthError::EmptyCorpus);
    }
    let mut stats = CorpusStats {
        documents: corpus.len(),
        entries_histogram: BTreeMap::new(),
        mean_data_disclosed: 0.0,
        purposes_histogram: BTreeMap::new(),
        mean_purposes_per_controller: 0.0,
        mean_purposes_per_entry: 0.0,
        total_entries: 0,
        legal_basis_frequency: BTreeMap::new(),
        sector_frequency: BTreeMap::new(),
    };
    let mut total_purposes = 0usize;
    for doc in corpus {
        let entries = doc.data_disclosed.len();
        let purposes: usize = doc.data_disclosed.iter().map(|d| d.purposes.len()).sum();
        stats.total_entries += entries;
        total_purposes += purposes;
        *stats.entries_histogram.entry(entries as u64).or_insert(0) += 1;
        *stats.purposes_histogram.entry(purposes as u64).or_insert(0) += 1;
        for l in doc.data_disclosed.iter().flat_map(|d| &d.legal_bases) {
            *stats.legal_basis_frequency.entry(l.reference.trim().to_string()).or_insert(0) += 1;
        }
        let sector = match doc.controller.sector() {
            Some(Ok(s)) => s.section.to_string(),
            _ => "unknown".to_string(),
        };
        *stats.sector_frequency.entry(sector).or_insert(0) += 1;
    }
    let n = corpus.len() as f64;
    stats.mean_data_disclosed = stats.total_entries as f64 / n;
    stats.mean_purposes_per_controller = total_purposes as f64 / n;
    if stats.total_entries > 0 {
        stats.mean_purposes_per_entry = total_purposes as f64 / stats.total_entries as f64;
    }
    Ok(stats)
}
