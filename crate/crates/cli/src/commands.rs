use std::fs;
use std::path::{Path, PathBuf};

use tap_core::analytics::{
    distribution, legal_bases_by_sector, louvain, pagerank, project, sharing_network, DistributionKind, LouvainConfig,
    PageRankConfig, Projection, SimilarityWeight,
};
use tap_core::dynamics::{simulate, DynamicsConfig, SimulationResult};
use tap_core::export::{export, ExportFormat, ExportGraph};
use tap_core::graph::{ingest, load_snapshot, query, save_snapshot, GraphError, Pattern, PropertyGraph, Value};
use tap_core::similarity::{link_entities, CleaningPolicy, LinkageSpec, Metric, Selector};
use tap_core::synth::{generate, ClusterSpec, SynthConfig};
use tap_core::tilt::{self, corpus_files, load_file, validate_corpus, TiltDocument};

use crate::args::{
    Cli, ClusterArgs, Command, CorpusArgs, ExportArgs, IngestArgs, LinkArgs, NetworkArgs, NetworkEdgeArgs, QueryArgs,
    RankArgs, ReportArgs, SimulateArgs, SynthArgs,
};
use crate::error::{CliError, CliResult};
use crate::provenance::{auto_seed, digest, Header};
use crate::settings::Settings;

pub const CORPUS_ENV: &str = "TAP_CORPUS";
const DEFAULT_GRAPH: &str = "tap.graph";

struct Ctx {
    settings: Settings,
    graph_flag: Option<PathBuf>,
}

impl Ctx {
    fn graph_path(&self) -> CliResult<PathBuf> {
        Ok(self
            .settings
            .pick(self.graph_flag.clone(), "", "graph")?
            .unwrap_or_else(|| PathBuf::from(DEFAULT_GRAPH)))
    }

    fn corpus_dir(&self, args: &CorpusArgs) -> CliResult<PathBuf> {
        if let Some(p) = self.settings.pick(args.corpus.clone(), "", "corpus")? {
            return Ok(p);
        }
        std::env::var_os(CORPUS_ENV)
            .map(PathBuf::from)
            .ok_or_else(|| CliError::Usage(format!("no corpus directory given and {CORPUS_ENV} is not set")))
    }

    /// Loads the snapshot and returns it with its digest.
    fn load_graph(&self) -> CliResult<(PropertyGraph, String)> {
        let path = self.graph_path()?;
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::io(&path, format!("{e} (run `tap ingest` to create the graph)")))?;
        let g = load_snapshot(&text)?;
        Ok((g, digest([("snapshot", text.as_bytes())])))
    }

    fn save_graph(&self, g: &PropertyGraph) -> CliResult {
        let path = self.graph_path()?;
        write_file(&path, &save_snapshot(g))
    }
}

fn write_file(path: &Path, text: &str) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn run(cli: Cli) -> CliResult {
    let ctx = Ctx { settings: Settings::load(cli.settings.as_deref())?, graph_flag: cli.graph };
    match cli.command {
        Command::Ingest(a) => cmd_ingest(&ctx, a),
        Command::Validate(a) => cmd_validate(&ctx, a),
        Command::Link(a) => cmd_link(&ctx, a),
        Command::Query(a) => cmd_query(&ctx, a),
        Command::Cluster(a) => cmd_cluster(&ctx, a),
        Command::Rank(a) => cmd_rank(&ctx, a),
        Command::Report(a) => cmd_report(&ctx, a),
        Command::Network(a) => cmd_network(&ctx, a),
        Command::Synth(a) => cmd_synth(&ctx, a),
        Command::Simulate(a) => cmd_simulate(&ctx, a),
        Command::Export(a) => cmd_export(&ctx, a),
    }
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Raw bytes of every corpus file, for the digest, with parse results.
struct LoadedCorpus {
    files: Vec<(String, Vec<u8>)>,
    parsed: Vec<(String, Result<TiltDocument, tilt::TiltError>)>,
}

fn load_dir(dir: &Path) -> CliResult<LoadedCorpus> {
    let mut files = Vec::new();
    let mut parsed = Vec::new();
    for path in corpus_files(dir)? {
        let name = file_name(&path);
        let bytes = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        files.push((name.clone(), bytes));
        parsed.push((name, load_file(&path)));
    }
    Ok(LoadedCorpus { files, parsed })
}

impl LoadedCorpus {
    fn digest(&self) -> String {
        digest(self.files.iter().map(|(n, b)| (n.as_str(), b.as_slice())))
    }
}

fn cmd_validate(ctx: &Ctx, a: CorpusArgs) -> CliResult {
    let dir = ctx.corpus_dir(&a)?;
    let corpus = load_dir(&dir)?;
    let mut out = Header { command: "validate", input_sha256: corpus.digest(), seed: None }.render();

    let docs: Vec<(usize, &TiltDocument)> =
        corpus.parsed.iter().enumerate().filter_map(|(i, (_, r))| r.as_ref().ok().map(|d| (i, d))).collect();
    let owned: Vec<TiltDocument> = docs.iter().map(|(_, d)| (*d).clone()).collect();
    let mut issues: Vec<Vec<tilt::ValidationIssue>> = vec![Vec::new(); corpus.parsed.len()];
    for (k, issue) in validate_corpus(&owned) {
        issues[docs[k].0].push(issue);
    }

    out.push_str("file\terrors\twarnings\n");
    let mut failing = 0;
    for (i, (name, parsed)) in corpus.parsed.iter().enumerate() {
        match parsed {
            Err(e) => {
                failing += 1;
                out.push_str(&format!("{name}\t1\t0\n"));
                let msg = match e {
                    tilt::TiltError::InFile { source, .. } => source.to_string(),
                    other => other.to_string(),
                };
                out.push_str(&format!("  error\t$\t{msg}\n"));
            }
            Ok(_) => {
                let errs = issues[i].iter().filter(|x| x.severity == tilt::Severity::Error).count();
                failing += usize::from(errs > 0);
                out.push_str(&format!("{name}\t{errs}\t{}\n", issues[i].len() - errs));
                for issue in &issues[i] {
                    out.push_str(&format!("  {issue}\n"));
                }
            }
        }
    }
    out.push_str(&format!("files\t{}\nfiles_with_errors\t{failing}\n", corpus.parsed.len()));
    print!("{out}");
    if failing > 0 {
        return Err(CliError::data("validation", format!("{failing} of {} files have errors", corpus.parsed.len())));
    }
    Ok(())
}

fn cmd_ingest(ctx: &Ctx, a: IngestArgs) -> CliResult {
    let dir = ctx.corpus_dir(&a.corpus)?;
    let corpus = load_dir(&dir)?;
    let input = corpus.digest();
    let total = corpus.files.len();
    let mut docs = Vec::new();
    let mut names = Vec::new();
    for (name, parsed) in corpus.parsed {
        match parsed {
            Ok(d) => {
                docs.push(d);
                names.push(name);
            }
            Err(e) if a.skip_invalid => eprintln!("skipped\t{name}\t{e}"),
            Err(e) => return Err(e.into()),
        }
    }
    let mut keep = vec![true; docs.len()];
    for (i, issue) in validate_corpus(&docs) {
        if issue.severity != tilt::Severity::Error || !keep[i] {
            continue;
        }
        if !a.skip_invalid {
            return Err(CliError::data("validation", format!("{}: {} {}", names[i], issue.path, issue.message)));
        }
        eprintln!("skipped\t{}\t{} {}", names[i], issue.path, issue.message);
        keep[i] = false;
    }

    let mut g = PropertyGraph::new();
    for (doc, _) in docs.iter().zip(&keep).filter(|(_, k)| **k) {
        ingest(doc, &mut g)?;
    }
    ctx.save_graph(&g)?;
    let skipped = total - keep.iter().filter(|k| **k).count();
    let mut out = Header { command: "ingest", input_sha256: input, seed: None }.render();
    out.push_str(&format!(
        "documents\t{}\nskipped\t{skipped}\ncontrollers\t{}\nnodes\t{}\nedges\t{}\n",
        total,
        g.meta_nodes().len(),
        g.node_count(),
        g.edge_count()
    ));
    emit(a.out.as_deref(), &out)
}

fn cmd_link(ctx: &Ctx, a: LinkArgs) -> CliResult {
    let s = &ctx.settings;
    let metric: Metric = match s.pick(a.metric, "link", "metric")? {
        Some(m) => m.parse().map_err(usage)?,
        None => Metric::SorensenDice,
    };
    let threshold = s.pick(a.threshold, "link", "threshold")?.unwrap_or(LinkageSpec::DEFAULT_THRESHOLD);
    let mut spec = LinkageSpec::new(metric, threshold).map_err(usage)?;
    if let Some(c) = s.pick(a.clean, "link", "clean")? {
        spec = spec.with_cleaning(c.parse::<CleaningPolicy>().map_err(usage)?);
    }
    let source: Option<String> = s.pick(a.source, "link", "source")?;
    let target: Option<String> = s.pick(a.target, "link", "target")?;
    if source.is_some() || target.is_some() {
        let src = match source {
            Some(t) => t.parse::<Selector>().map_err(usage)?,
            None => spec.source.clone(),
        };
        let dst = match target {
            Some(t) => t.parse::<Selector>().map_err(usage)?,
            None => spec.target.clone(),
        };
        spec = spec.with_selectors(src, dst);
    }

    let (mut g, input) = ctx.load_graph()?;
    let report = link_entities(&mut g, &spec)?;
    ctx.save_graph(&g)?;
    let mut out = Header { command: "link", input_sha256: input, seed: None }.render();
    out.push_str(&format!("cleaning\t{}\nsource\t{}\ntarget\t{}\n", spec.cleaning, spec.source, spec.target));
    out.push_str(&report.to_text());
    emit(a.out.as_deref(), &out)
}

fn cell(v: &Option<Value>) -> String {
    v.as_ref().map(|v| v.to_string().replace(['\t', '\n'], " ")).unwrap_or_default()
}

fn cmd_query(ctx: &Ctx, a: QueryArgs) -> CliResult {
    let pattern = Pattern::parse(&a.pattern).map_err(|e| match e {
        GraphError::Pattern(m) => CliError::Usage(format!("malformed pattern: {m}")),
        other => CliError::Usage(other.to_string()),
    })?;
    let (g, input) = ctx.load_graph()?;
    let rows = query(&g, &pattern)?;
    let mut out = Header { command: "query", input_sha256: input, seed: None }.render();
    out.push_str(&pattern.columns().join("\t"));
    out.push('\n');
    for r in &rows {
        out.push_str(&r.values.iter().map(cell).collect::<Vec<_>>().join("\t"));
        out.push('\n');
    }
    emit(a.out.as_deref(), &out)
}

fn projection(s: &Settings, n: NetworkEdgeArgs, section: &str) -> CliResult<Projection> {
    let mut p = Projection::default();
    match s.pick(n.edges, section, "edges")?.as_deref() {
        None | Some("both") => {}
        Some("shares") => p.similar_to = false,
        Some("similar") => p.shares_with = false,
        Some(other) => return Err(CliError::Usage(format!("--edges must be both, shares or similar, got `{other}`"))),
    }
    p.similarity_cut = s.pick(n.score_cut, section, "score_cut")?.unwrap_or(0.0);
    if !p.similarity_cut.is_finite() {
        return Err(CliError::Usage("--score-cut must be finite".into()));
    }
    if s.flag(n.binary, section, "binary")? {
        p.weighting = SimilarityWeight::Binary;
    }
    Ok(p)
}

fn meta_id(g: &PropertyGraph, id: tap_core::graph::NodeId) -> String {
    g.node(id).and_then(|n| n.str_attr("meta_id")).unwrap_or_default().to_string()
}

fn meta_name(g: &PropertyGraph, id: tap_core::graph::NodeId) -> String {
    g.node(id).and_then(|n| n.str_attr("name")).unwrap_or_default().to_string()
}

fn csv_text(rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).map_err(|e| CliError::data("io", e))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::data("io", e))?;
    String::from_utf8(bytes).map_err(|e| CliError::data("io", e))
}

fn cmd_cluster(ctx: &Ctx, a: ClusterArgs) -> CliResult {
    let s = &ctx.settings;
    let rule = projection(s, a.network, "cluster")?;
    let defaults = LouvainConfig::default();
    let cfg = LouvainConfig {
        min_gain: s.pick(a.min_gain, "cluster", "min_gain")?.unwrap_or(defaults.min_gain),
        max_passes: s.pick(a.max_passes, "cluster", "max_passes")?.unwrap_or(defaults.max_passes),
        seed: s.pick(a.seed, "cluster", "seed")?,
        prior: None,
    };
    let (mut g, input) = ctx.load_graph()?;
    let pg = project(&g, &rule)?.to_undirected();
    let result = louvain(&pg, &cfg)?;
    for (&id, &c) in result.nodes().iter().zip(result.communities()) {
        let mut attrs = tap_core::graph::Attrs::new();
        attrs.insert("community".into(), Value::Int(c as i64));
        g.update_node_attrs(id, attrs)?;
    }
    ctx.save_graph(&g)?;

    let mut out = Header { command: "cluster", input_sha256: input, seed: cfg.seed }.render();
    out.push_str(&format!(
        "# communities {}\n# modularity {}\n# passes {}\n",
        result.count(),
        result.modularity,
        result.passes
    ));
    let rows = std::iter::once(vec!["meta_id".into(), "name".into(), "community".into()]).chain(
        result
            .nodes()
            .iter()
            .zip(result.communities())
            .map(|(&id, c)| vec![meta_id(&g, id), meta_name(&g, id), c.to_string()]),
    );
    out.push_str(&csv_text(rows)?);
    emit(a.out.as_deref(), &out)
}

fn cmd_rank(ctx: &Ctx, a: RankArgs) -> CliResult {
    let s = &ctx.settings;
    let rule = projection(s, a.network, "rank")?;
    let defaults = PageRankConfig::default();
    let cfg = PageRankConfig {
        damping: s.pick(a.damping, "rank", "damping")?.unwrap_or(defaults.damping),
        tol: s.pick(a.tol, "rank", "tol")?.unwrap_or(defaults.tol),
        max_iter: s.pick(a.max_iter, "rank", "max_iter")?.unwrap_or(defaults.max_iter),
    };
    let top: Option<usize> = s.pick(a.top, "rank", "top")?;
    let (mut g, input) = ctx.load_graph()?;
    let pg = project(&g, &rule)?;
    let ranks = pagerank(&pg, &cfg).map_err(|e| match e {
        tap_core::analytics::AnalyticsError::InvalidParameter(m) => CliError::Usage(m),
        other => other.into(),
    })?;
    for (&id, &score) in ranks.nodes().iter().zip(ranks.scores()) {
        let mut attrs = tap_core::graph::Attrs::new();
        attrs.insert("pagerank".into(), Value::Float(score));
        g.update_node_attrs(id, attrs)?;
    }
    ctx.save_graph(&g)?;

    let mut out = Header { command: "rank", input_sha256: input, seed: None }.render();
    out.push_str(&format!(
        "# damping {}\n# iterations {}\n# converged {}\n",
        ranks.damping, ranks.iterations_used, ranks.converged
    ));
    let ranked = ranks.ranked();
    let shown = top.unwrap_or(ranked.len()).min(ranked.len());
    let rows = std::iter::once(vec!["rank".into(), "meta_id".into(), "name".into(), "pagerank".into()]).chain(
        ranked[..shown]
            .iter()
            .enumerate()
            .map(|(i, (id, score))| vec![(i + 1).to_string(), meta_id(&g, *id), meta_name(&g, *id), score.to_string()]),
    );
    out.push_str(&csv_text(rows)?);
    emit(a.out.as_deref(), &out)
}

fn cmd_report(ctx: &Ctx, a: ReportArgs) -> CliResult {
    let (g, input) = ctx.load_graph()?;
    let mut out = Header { command: "report", input_sha256: input, seed: None }.render();
    if a.kind == "legal_bases_by_sector" {
        let table = legal_bases_by_sector(&g);
        out.push_str("kind\tlegal_bases_by_sector\n# rows\nmeta_id\tcontroller\tsector\tdata_category\tlegal_basis\n");
        for r in &table.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                meta_id(&g, r.meta),
                r.controller_name,
                r.sector.as_deref().unwrap_or(""),
                r.data_category,
                r.legal_basis
            ));
        }
        out.push_str("# aggregate\ngroup\tlegal_basis\tcontrollers\n");
        for agg in &table.aggregate {
            out.push_str(&format!("{}\t{}\t{}\n", agg.group, agg.basis, agg.controller_count));
        }
    } else {
        let kind: DistributionKind = a.kind.parse().map_err(usage)?;
        let d = distribution(&g, kind);
        out.push_str(&format!("kind\t{}\ncontrollers\t{}\nmean\t{}\n", d.kind, d.controllers, d.mean));
        out.push_str("value\tcount\n");
        for (k, n) in &d.histogram {
            out.push_str(&format!("{k}\t{n}\n"));
        }
    }
    emit(a.out.as_deref(), &out)
}

fn cmd_network(ctx: &Ctx, a: NetworkArgs) -> CliResult {
    let s = &ctx.settings;
    let rule = projection(s, a.network, "network")?;
    let depth = s.pick(a.depth, "network", "depth")?.unwrap_or(1);
    let (g, input) = ctx.load_graph()?;
    let net = sharing_network(&g, &a.root, depth, &rule)?;
    let mut out = Header { command: "network", input_sha256: input, seed: None }.render();
    out.push_str(&format!("root\t{}\ndepth\t{depth}\n# members\nmeta_id\tname\tdistance\n", a.root));
    for m in &net.members {
        out.push_str(&format!("{}\t{}\t{}\n", m.meta_id, meta_name(&g, m.meta), m.distance));
    }
    out.push_str("# links\nfrom\tto\tweight\n");
    for (src, dst, w) in &net.edges {
        out.push_str(&format!("{}\t{}\t{w}\n", meta_id(&g, *src), meta_id(&g, *dst)));
    }
    emit(a.out.as_deref(), &out)
}

fn cmd_synth(ctx: &Ctx, a: SynthArgs) -> CliResult {
    let s = &ctx.settings;
    let d = SynthConfig::default();
    let seed = match s.pick(a.seed, "synth", "seed")? {
        Some(seed) => seed,
        None => {
            let seed = auto_seed();
            eprintln!("seed\t{seed}");
            seed
        }
    };
    let clusters = match s.pick(a.clusters, "synth", "clusters")? {
        Some(n) => ClusterSpec::Uniform { n },
        None => d.clusters.clone(),
    };
    let cfg = SynthConfig {
        n_controllers: s.pick(a.n, "synth", "n")?.unwrap_or(d.n_controllers),
        mu_data_disclosed: s.pick(a.mu_dd, "synth", "mu_dd")?.unwrap_or(d.mu_data_disclosed),
        mu_purposes: s.pick(a.mu_purposes, "synth", "mu_purposes")?.unwrap_or(d.mu_purposes),
        clusters,
        intra_cluster_weight: s.pick(a.intra_weight, "synth", "intra_weight")?.unwrap_or(d.intra_cluster_weight),
        p_recipient_link: s.pick(a.p_link, "synth", "p_link")?.unwrap_or(d.p_recipient_link),
        legal_basis_weights: d.legal_basis_weights,
        seed,
    };
    cfg.validate().map_err(usage)?;
    let out_dir: PathBuf = s.pick(a.out, "synth", "out")?.ok_or_else(|| CliError::Usage("synth needs --out <DIR>".into()))?;

    let corpus = generate(&cfg)?;
    fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    for doc in &corpus.documents {
        write_file(&out_dir.join(format!("{}.json", doc.meta.id)), &(doc.to_json_string() + "\n"))?;
    }
    let meta = serde_json::to_string_pretty(&corpus.metadata).map_err(|e| CliError::data("synth", e))? + "\n";
    write_file(&out_dir.join("_generation.json"), &meta)?;

    let cfg_json = serde_json::to_string(&cfg).map_err(|e| CliError::data("synth", e))?;
    let mut out = Header { command: "synth", input_sha256: digest([("config", cfg_json.as_bytes())]), seed: Some(seed) }
        .render();
    out.push_str(&format!(
        "documents\t{}\nlinks\t{}\nintra_cluster_links\t{}\nmetadata\t_generation.json\n",
        corpus.documents.len(),
        corpus.metadata.links.len(),
        corpus.metadata.links.iter().filter(|l| l.intra_cluster).count()
    ));
    print!("{out}");
    Ok(())
}

fn metrics_csv(result: &SimulationResult) -> CliResult<String> {
    let header = [
        "iteration",
        "controllers",
        "node_count",
        "edge_count",
        "projected_edges",
        "communities",
        "modularity",
        "top_pagerank",
    ];
    let rows = std::iter::once(header.map(String::from).to_vec()).chain(result.timeline.samples.iter().map(|m| {
        let top: Vec<String> = m.top_pagerank.iter().map(|(id, s)| format!("{id}={s}")).collect();
        vec![
            m.iteration.to_string(),
            m.controllers.to_string(),
            m.node_count.to_string(),
            m.edge_count.to_string(),
            m.projected_edges.to_string(),
            m.communities.to_string(),
            m.modularity.to_string(),
            top.join(";"),
        ]
    }));
    csv_text(rows)
}

fn counts_csv(result: &SimulationResult) -> CliResult<String> {
    let header = ["iteration", "controllers", "cumulative_merges", "edges_added"];
    let rows = std::iter::once(header.map(String::from).to_vec()).chain(result.timeline.counts.iter().map(|c| {
        vec![
            c.iteration.to_string(),
            c.controllers.to_string(),
            c.cumulative_merges.to_string(),
            c.edges_added.to_string(),
        ]
    }));
    csv_text(rows)
}

fn cmd_simulate(ctx: &Ctx, a: SimulateArgs) -> CliResult {
    let text = fs::read_to_string(&a.config).map_err(|e| CliError::io(&a.config, e))?;
    let mut cfg = DynamicsConfig::from_toml(&text).map_err(usage)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let (g, graph_digest) = ctx.load_graph()?;
    let result = simulate(&g, &cfg)?;

    let dir = &a.out;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut events = String::new();
    for e in &result.events {
        events.push_str(&serde_json::to_string(e).map_err(|e| CliError::data("dynamics", e))?);
        events.push('\n');
    }
    write_file(&dir.join("events.jsonl"), &events)?;
    write_file(&dir.join("metrics.csv"), &metrics_csv(&result)?)?;
    write_file(&dir.join("counts.csv"), &counts_csv(&result)?)?;
    write_file(&dir.join("final.graph"), &save_snapshot(&result.graph))?;
    write_file(&dir.join("config.toml"), &cfg.to_toml())?;

    let effective = cfg.to_toml();
    let input = digest([("snapshot", graph_digest.as_bytes()), ("config", effective.as_bytes())]);
    let last = result.timeline.counts.last();
    let mut out = Header { command: "simulate", input_sha256: input, seed: Some(cfg.seed) }.render();
    out.push_str(&format!(
        "iterations\t{}\nevents\t{}\ncontrollers\t{}\nmerges\t{}\nsamples\t{}\n",
        cfg.iterations,
        result.events.len(),
        last.map_or(0, |c| c.controllers),
        last.map_or(0, |c| c.cumulative_merges),
        result.timeline.samples.len()
    ));
    write_file(&dir.join("report.txt"), &out)?;
    print!("{out}");
    Ok(())
}

fn cmd_export(ctx: &Ctx, a: ExportArgs) -> CliResult {
    let s = &ctx.settings;
    let format: ExportFormat = s
        .pick(a.format, "export", "format")?
        .unwrap_or_else(|| "graphml".to_string())
        .parse()
        .map_err(usage)?;
    let level = s.pick(a.level, "export", "level")?.unwrap_or_else(|| "meta".to_string());
    let (g, _) = ctx.load_graph()?;
    if g.is_empty() {
        return Err(CliError::data("export", "graph is empty"));
    }
    let eg = match level.as_str() {
        "full" => ExportGraph::full(&g),
        "meta" => ExportGraph::meta_level(&g, &project(&g, &Projection::default())?, None, None),
        other => return Err(CliError::Usage(format!("--level must be meta or full, got `{other}`"))),
    };
    export(&eg, format, &a.out)?;
    Ok(())
}
