use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Transparency-graph pipeline: ingest TILT documents, link entities,
/// analyze the data-sharing network, generate synthetic corpora and simulate
/// market dynamics.
///
/// Graph commands read and write a snapshot file (`--graph`). Options left
/// unset fall back to the `--settings` file, then to the documented default.
#[derive(Debug, Parser)]
#[command(name = "tap", version)]
pub struct Cli {
    /// Graph snapshot used by the graph commands [default: tap.graph]
    #[arg(long, global = true, value_name = "FILE")]
    pub graph: Option<PathBuf>,

    /// TOML settings file with defaults for any option; flags take precedence
    #[arg(long, global = true, value_name = "FILE")]
    pub settings: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a corpus directory into a fresh graph snapshot
    Ingest(IngestArgs),
    /// Check every document of a corpus directory
    Validate(CorpusArgs),
    /// Create SIMILAR_TO edges between controller names and recipient names
    Link(LinkArgs),
    /// Run a path pattern and print the projected columns
    Query(QueryArgs),
    /// Louvain communities of the controller network
    Cluster(ClusterArgs),
    /// PageRank of the controller network
    Rank(RankArgs),
    /// Distribution and legal-basis reports
    Report(ReportArgs),
    /// Controllers reachable from one controller
    Network(NetworkArgs),
    /// Generate a synthetic TILT corpus
    Synth(SynthArgs),
    /// Run a market-dynamics simulation on the current graph
    Simulate(SimulateArgs),
    /// Write the graph in an interchange format
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Corpus directory [default: $TAP_CORPUS]
    pub corpus: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,

    /// Leave out documents that fail validation instead of aborting
    #[arg(long)]
    pub skip_invalid: bool,

    /// Write the report here instead of stdout
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LinkArgs {
    /// levenshtein_normalized, jaro_winkler or sorensen_dice [default: sorensen_dice]
    #[arg(long)]
    pub metric: Option<String>,

    /// Pairs scoring strictly above this are linked [default: 0.6]
    #[arg(long)]
    pub threshold: Option<f64>,

    /// Cleaning steps: comma-separated lower,punct,suffix,ws, or all / none [default: all]
    #[arg(long)]
    pub clean: Option<String>,

    /// Source attribute as label.attr [default: meta.name]
    #[arg(long)]
    pub source: Option<String>,

    /// Target attribute as label.attr [default: recipient.name]
    #[arg(long)]
    pub target: Option<String>,

    /// Write the report here instead of stdout
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Pattern, e.g. `(m:meta)-[:HAS]->(t:tilt) RETURN m.name`
    pub pattern: String,

    /// Write the rows here instead of stdout
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

/// Which cross edges form the controller network.
#[derive(Debug, Args)]
pub struct NetworkEdgeArgs {
    /// both, shares or similar [default: both]
    #[arg(long)]
    pub edges: Option<String>,

    /// SIMILAR_TO edges are kept only above this score [default: 0]
    #[arg(long)]
    pub score_cut: Option<f64>,

    /// Weight kept SIMILAR_TO edges 1 instead of their score
    #[arg(long)]
    pub binary: bool,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub network: NetworkEdgeArgs,

    /// Shuffle the node visit order with this seed [default: ascending order]
    #[arg(long)]
    pub seed: Option<u64>,

    /// Stop when a level gains less modularity than this [default: 1e-7]
    #[arg(long)]
    pub min_gain: Option<f64>,

    /// Maximum number of aggregation levels [default: 32]
    #[arg(long)]
    pub max_passes: Option<usize>,

    /// Write the table here instead of stdout
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub network: NetworkEdgeArgs,

    /// Damping factor [default: 0.85]
    #[arg(long)]
    pub damping: Option<f64>,

    /// L1 convergence tolerance [default: 1e-8]
    #[arg(long)]
    pub tol: Option<f64>,

    /// Iteration cap [default: 100]
    #[arg(long)]
    pub max_iter: Option<usize>,

    /// Print only the best N controllers [default: all]
    #[arg(long)]
    pub top: Option<usize>,

    /// Write the table here instead of stdout
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// data_categories_per_controller, purposes_per_controller,
    /// recipients_per_controller, legal_basis_frequency or legal_bases_by_sector
    #[arg(long)]
    pub kind: String,

    /// Write the report here instead of stdout
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NetworkArgs {
    /// Meta id of the starting controller
    #[arg(long)]
    pub root: String,

    /// Maximum number of hops [default: 1]
    #[arg(long)]
    pub depth: Option<usize>,

    #[command(flatten)]
    pub network: NetworkEdgeArgs,

    /// Write the report here instead of stdout
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of controllers [default: 50]
    #[arg(long)]
    pub n: Option<usize>,

    /// Mean number of dataDisclosed entries per controller [default: 7]
    #[arg(long)]
    pub mu_dd: Option<f64>,

    /// Mean number of purposes per entry [default: 1]
    #[arg(long)]
    pub mu_purposes: Option<f64>,

    /// Number of sector clusters [default: 5]
    #[arg(long)]
    pub clusters: Option<usize>,

    /// Relative weight of same-cluster link targets [default: 1]
    #[arg(long)]
    pub intra_weight: Option<f64>,

    /// Probability that an entry's recipient is another controller [default: 0.3]
    #[arg(long)]
    pub p_link: Option<f64>,

    /// Random seed [default: chosen from the clock and reported]
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Dynamics configuration (TOML key-value file)
    #[arg(long, value_name = "FILE")]
    pub config: PathBuf,

    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,

    /// Override the configuration's seed
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// graphml, dot, csv or json [default: graphml]
    #[arg(long)]
    pub format: Option<String>,

    /// meta (one node per controller) or full [default: meta]
    #[arg(long)]
    pub level: Option<String>,

    /// Output file, or directory for csv
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}
