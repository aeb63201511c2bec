use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tap_core::export::{import, ExportFormat};
use tap_core::graph::load_snapshot;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn tap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tap"))
        .current_dir(dir)
        .env_remove("TAP_CORPUS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = tap(dir, args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn corpus() -> String {
    fixtures().join("corpus").display().to_string()
}

#[test]
fn validate_fixture_corpus_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["validate", &corpus()]);
    for f in ["alpha.json", "beta.json", "gamma.json", "delta.json", "epsilon.json"] {
        assert!(out.contains(&format!("{f}\t0\t")), "{out}");
    }
    assert!(out.contains("files_with_errors\t0"));
}

#[test]
fn validate_reports_broken_file_as_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c");
    fs::create_dir(&c).unwrap();
    fs::write(c.join("bad.json"), "{ not json").unwrap();
    fs::write(c.join("nameless.json"), r#"{"meta": {"_id": "x"}, "controller": {"name": ""}}"#).unwrap();
    let out = tap(dir.path(), &["validate", c.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error\tkind=validation\tmessage="), "{stderr}");
    assert!(String::from_utf8_lossy(&out.stdout).contains("bad.json\t1\t0"));
}

#[test]
fn corpus_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_tap"))
        .current_dir(dir.path())
        .env("TAP_CORPUS", corpus())
        .arg("validate")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(tap(dir.path(), &["validate"]).status.code(), Some(2));
}

#[test]
fn malformed_query_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["ingest", &corpus()]);
    for pattern in ["(m:meta", "(m:nosuchlabel)", "(m:meta)-[:HAS]->(t:tilt) RETURN x.name"] {
        let out = tap(dir.path(), &["query", pattern]);
        assert_eq!(out.status.code(), Some(2), "{pattern}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error\tkind=usage\t"));
    }
}

#[test]
fn unknown_flags_and_values_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["ingest", &corpus()]);
    assert_eq!(tap(dir.path(), &["link", "--bogus"]).status.code(), Some(2));
    assert_eq!(tap(dir.path(), &["link", "--metric", "cosine"]).status.code(), Some(2));
    assert_eq!(tap(dir.path(), &["link", "--threshold", "1.5"]).status.code(), Some(2));
    assert_eq!(tap(dir.path(), &["report", "--kind", "nope"]).status.code(), Some(2));
    assert_eq!(tap(dir.path(), &["export", "--format", "svg", "--out", "x"]).status.code(), Some(2));
    assert_eq!(tap(dir.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn missing_graph_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = tap(dir.path(), &["report", "--kind", "data_categories_per_controller"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error\tkind=io\t"));
}

#[test]
fn pipeline_to_dot_has_one_node_per_controller() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["ingest", &corpus()]);
    let link = ok(d, &["link", "--metric", "sorensen_dice", "--threshold", "0.6"]);
    assert!(link.contains("edges_created\t"));
    ok(d, &["cluster"]);
    ok(d, &["export", "--format", "dot", "--out", "net.dot"]);
    let dot = fs::read_to_string(d.join("net.dot")).unwrap();
    let controllers = fs::read_dir(fixtures().join("corpus")).unwrap().count();
    let node_statements = dot.lines().filter(|l| l.trim_start().starts_with('"') && !l.contains("->")).count();
    assert_eq!(node_statements, controllers);
    assert!(dot.lines().all(|l| !l.contains("->") || l.contains("label=\"LINK\"")));
    assert!(dot.contains("\"community\"="));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path();
        let mut all = ok(d, &["ingest", &corpus()]);
        all += &ok(d, &["link"]);
        all += &ok(d, &["cluster", "--seed", "5"]);
        all += &ok(d, &["rank"]);
        all += &ok(d, &["report", "--kind", "legal_bases_by_sector"]);
        all += &ok(d, &["network", "--root", "alpha", "--depth", "2"]);
        for fmt in ["graphml", "dot", "json"] {
            ok(d, &["export", "--format", fmt, "--level", "full", "--out", "out.x"]);
            all += &fs::read_to_string(d.join("out.x")).unwrap();
        }
        all + &fs::read_to_string(d.join("tap.graph")).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn reports_carry_provenance_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["ingest", &corpus()]);
    let lines: Vec<&str> = out.lines().take(4).collect();
    assert!(lines[0].starts_with("# tap "));
    assert_eq!(lines[1], "# command ingest");
    let digest = lines[2].strip_prefix("# input-sha256 ").unwrap();
    assert_eq!(digest.len(), 64);
    assert!(digest.bytes().all(|b| b.is_ascii_hexdigit()));
    assert_eq!(lines[3], "# seed none");
}

#[test]
fn graphml_export_reimports_with_counts_and_attributes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["ingest", &corpus()]);
    ok(d, &["link"]);
    let g = load_snapshot(&fs::read_to_string(d.join("tap.graph")).unwrap()).unwrap();
    for (fmt, name) in [("graphml", "g.graphml"), ("json", "g.json"), ("csv", "g_csv")] {
        ok(d, &["export", "--format", fmt, "--level", "full", "--out", name]);
        let eg = import(fmt.parse::<ExportFormat>().unwrap(), &d.join(name)).unwrap();
        assert_eq!(eg.nodes.len(), g.node_count());
        assert_eq!(eg.edges.len(), g.edge_count());
        let attrs: usize = eg.nodes.iter().map(|n| n.attrs.len()).sum();
        assert_eq!(attrs, g.nodes().map(|n| n.attrs.len()).sum::<usize>());
    }
}

#[test]
fn settings_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("tap.toml"), "graph = \"work/g.snap\"\n[link]\nmetric = \"jaro_winkler\"\nthreshold = 0.9\n").unwrap();
    ok(d, &["--settings", "tap.toml", "ingest", &corpus()]);
    assert!(d.join("work/g.snap").exists());
    let out = ok(d, &["--settings", "tap.toml", "link"]);
    assert!(out.contains("metric\tjaro_winkler") && out.contains("threshold\t0.9"));
    let out = ok(d, &["--settings", "tap.toml", "link", "--threshold", "0.7"]);
    assert!(out.contains("threshold\t0.7"));

    fs::write(d.join("bad.toml"), "[link]\nmetrc = \"x\"\n").unwrap();
    assert_eq!(tap(d, &["--settings", "bad.toml", "link"]).status.code(), Some(2));
}

#[test]
fn synth_then_ingest_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = ["synth", "--n", "12", "--mu-dd", "3", "--clusters", "3", "--seed", "9", "--out", "syn"];
    let first = ok(d, &args);
    assert!(first.contains("# seed 9"));
    let meta = fs::read_to_string(d.join("syn/_generation.json")).unwrap();
    let again = ok(d, &["synth", "--n", "12", "--mu-dd", "3", "--clusters", "3", "--seed", "9", "--out", "syn2"]);
    assert_eq!(first, again);
    assert_eq!(meta, fs::read_to_string(d.join("syn2/_generation.json")).unwrap());

    ok(d, &["validate", "syn"]);
    let ingest = ok(d, &["ingest", "syn"]);
    assert!(ingest.contains("controllers\t12"), "{ingest}");
}

#[test]
fn synth_without_seed_reports_the_chosen_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = tap(dir.path(), &["synth", "--n", "3", "--out", "s"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let seed_line = stdout.lines().find(|l| l.starts_with("# seed ")).unwrap();
    let seed: u64 = seed_line["# seed ".len()..].parse().unwrap();
    assert!(String::from_utf8_lossy(&out.stderr).contains(&format!("seed\t{seed}")));
}

#[test]
fn simulate_writes_all_outputs_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--n", "15", "--mu-dd", "2", "--seed", "4", "--out", "syn"]);
    ok(d, &["ingest", "syn"]);
    fs::write(
        d.join("dyn.toml"),
        "iterations = 20\nedges_per_iteration = 2\nattachment_rule = \"centrality_weighted\"\n\
         p_merge = 0.2\nmerge_pair_rule = \"uniform\"\nrecluster_every = 5\nseed = 3\n",
    )
    .unwrap();
    ok(d, &["simulate", "--config", "dyn.toml", "--out", "run1"]);
    ok(d, &["simulate", "--config", "dyn.toml", "--out", "run2"]);
    for f in ["events.jsonl", "metrics.csv", "counts.csv", "final.graph", "report.txt"] {
        let a = fs::read(d.join("run1").join(f)).unwrap();
        assert_eq!(a, fs::read(d.join("run2").join(f)).unwrap(), "{f}");
    }
    let metrics = fs::read_to_string(d.join("run1/metrics.csv")).unwrap();
    // t = 0, 5, 10, 15, 20
    assert_eq!(metrics.lines().count(), 1 + 5);
    let events = fs::read_to_string(d.join("run1/events.jsonl")).unwrap();
    for line in events.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.get("iteration").is_some() && v.get("kind").is_some());
    }
    load_snapshot(&fs::read_to_string(d.join("run1/final.graph")).unwrap()).unwrap();

    fs::write(d.join("bad.toml"), "iterations = 1\nunknown_key = 3\n").unwrap();
    assert_eq!(tap(d, &["simulate", "--config", "bad.toml", "--out", "r"]).status.code(), Some(2));
}
