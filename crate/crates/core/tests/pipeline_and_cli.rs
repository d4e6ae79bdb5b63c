//! End-to-end pipeline runs and the command-line surface: artifact
//! inventory, provenance stamping, byte-identical reruns, stage-labeled
//! aborts with partial outputs preserved, and process exit codes.

mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use synclust::error::Error;
use synclust::pipeline::{run_pipeline, RunConfig, TauGrid};
use synclust::OperatorKind;

/// Two triangles joined by a bridge, as an edge-list file with comments.
fn write_triangles(dir: &Path) -> PathBuf {
    let p = dir.join("triangles.edges");
    std::fs::write(
        &p,
        "# bridged triangles\n0 1\n1 2\n0 2\n3 4\n4 5\n3 5\n2 3\n",
    )
    .unwrap();
    p
}

fn write_side_tables(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let truth = dir.join("truth.csv");
    std::fs::write(&truth, "0,a\n1,a\n2,a\n3,b\n4,b\n5,b\n").unwrap();
    let activity = dir.join("votes.csv");
    std::fs::write(
        &activity,
        "0,x\n0,y\n1,x\n1,y\n2,x\n3,z\n3,w\n4,z\n4,w\n5,z\n",
    )
    .unwrap();
    let attrs = dir.join("attrs.csv");
    std::fs::write(
        &attrs,
        "node,team\n0,red\n1,red\n2,red\n3,blue\n4,blue\n5,blue\n",
    )
    .unwrap();
    (truth, activity, attrs)
}

fn full_config(dir: &Path) -> RunConfig {
    let graph = write_triangles(dir);
    let (truth, activity, attrs) = write_side_tables(dir);
    RunConfig {
        graph,
        operators: vec![OperatorKind::Laplacian, OperatorKind::Replicator],
        runs: 50,
        seed: 7,
        tau_grid: TauGrid::Scaled {
            points: 10,
            min_factor: 0.1,
            max_factor: 10.0,
        },
        mu_schedule: vec![1.0, 0.3],
        truth: Some(truth),
        activity: Some(activity),
        attributes: Some(attrs),
        out_dir: dir.join("out"),
        ..RunConfig::default()
    }
}

/// The full bundle: every expected artifact in write order, provenance in
/// every file, and sensible metric content on a graph with known structure.
#[test]
fn pipeline_writes_full_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = full_config(tmp.path());
    let bundle = run_pipeline(&cfg).unwrap();

    let expected: Vec<PathBuf> = [
        "config_echo.json",
        "spectrum_laplacian.csv",
        "nmi_course_laplacian.csv",
        "dendrogram_laplacian.nwk",
        "partition_laplacian.json",
        "onion_laplacian.json",
        "spectrum_replicator.csv",
        "nmi_course_replicator.csv",
        "dendrogram_replicator.nwk",
        "partition_replicator.json",
        "onion_replicator.json",
        "metrics.json",
    ]
    .iter()
    .map(PathBuf::from)
    .collect();
    assert_eq!(bundle.files, expected);

    // Every artifact exists and carries the config hash.
    for f in &bundle.files {
        let text = std::fs::read_to_string(bundle.out_dir.join(f)).unwrap();
        assert!(
            text.contains(&bundle.config_hash),
            "{} lacks provenance",
            f.display()
        );
    }

    // Both triangles are perfectly recoverable on this grid.
    let ops = &bundle.metrics["operators"];
    for kind in ["laplacian", "replicator"] {
        let m = &ops[kind];
        assert_eq!(m["best_nmi"].as_f64(), Some(1.0), "{kind} best NMI");
        assert_eq!(m["misassigned_at_best"].as_array().map(Vec::len), Some(0));
        assert!(m["sync_timescale"].as_f64().unwrap() > 0.0);
        assert!(m["tau_star"].as_f64().unwrap() > 0.0);
        for mu in ["1", "0.3"] {
            assert!(m["covotes"][mu]["unweighted_mean"].as_f64().unwrap() >= 0.0);
            let purity = m["purity"]["team"][mu]["weighted_mean"].as_f64().unwrap();
            assert!((0.0..=1.0).contains(&purity), "{kind} mu={mu}: {purity}");
        }
        assert_eq!(m["notes"].as_array().map(Vec::len), Some(0));
    }

    // The partition document records the dendrogram cut at the truth count.
    let part: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(bundle.out_dir.join("partition_laplacian.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(part["dendrogram_cut"]["k"].as_u64(), Some(2));
    let cut: BTreeMap<String, Vec<String>> =
        serde_json::from_value(part["dendrogram_cut"]["communities"].clone()).unwrap();
    let mut groups: Vec<Vec<String>> = cut.into_values().collect();
    for g in &mut groups {
        g.sort();
    }
    groups.sort();
    assert_eq!(
        groups,
        vec![
            vec!["0".to_string(), "1".into(), "2".into()],
            vec!["3".to_string(), "4".into(), "5".into()],
        ]
    );
}

/// Re-running the identical config reproduces every artifact byte for byte.
#[test]
fn pipeline_rerun_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = full_config(tmp.path());
    let first = run_pipeline(&cfg).unwrap();
    let snapshot: BTreeMap<PathBuf, Vec<u8>> = first
        .files
        .iter()
        .map(|f| (f.clone(), std::fs::read(first.out_dir.join(f)).unwrap()))
        .collect();
    let second = run_pipeline(&cfg).unwrap();
    assert_eq!(first.files, second.files);
    assert_eq!(first.config_hash, second.config_hash);
    for (f, bytes) in &snapshot {
        let again = std::fs::read(second.out_dir.join(f)).unwrap();
        assert_eq!(&again, bytes, "{} changed between runs", f.display());
    }
}

/// Optional stages are skipped with a note, not silently.
#[test]
fn pipeline_skips_optional_stages() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        graph: write_triangles(tmp.path()),
        operators: vec![OperatorKind::Laplacian],
        runs: 10,
        tau_grid: TauGrid::Explicit(vec![0.5, 2.0]),
        mu_schedule: Vec::new(),
        out_dir: tmp.path().join("out"),
        ..RunConfig::default()
    };
    let bundle = run_pipeline(&cfg).unwrap();
    assert!(!bundle
        .files
        .iter()
        .any(|f| f.to_string_lossy().contains("onion")));
    assert!(!bundle
        .files
        .iter()
        .any(|f| f.to_string_lossy().contains("nmi_course")));
    let notes = bundle.metrics["operators"]["laplacian"]["notes"]
        .as_array()
        .unwrap()
        .clone();
    assert!(notes.iter().any(|n| n.as_str().unwrap().contains("onion skipped")));
    // Without a course, tau_star falls back to the middle of the grid.
    assert_eq!(
        bundle.metrics["operators"]["laplacian"]["tau_star"].as_f64(),
        Some(2.0)
    );
    assert_eq!(
        bundle.metrics["operators"]["laplacian"]["best_nmi"],
        serde_json::Value::Null
    );
}

/// Failures carry the stage name, and everything written before the failure
/// stays on disk.
#[test]
fn pipeline_aborts_with_stage_and_keeps_partials() {
    let tmp = tempfile::tempdir().unwrap();
    // A truth label for a node the graph does not have fails the load stage.
    let mut cfg = full_config(tmp.path());
    let ghost = tmp.path().join("ghost.csv");
    std::fs::write(&ghost, "ghost,a\n").unwrap();
    cfg.truth = Some(ghost);
    cfg.out_dir = tmp.path().join("out_ghost");
    match run_pipeline(&cfg) {
        Err(Error::Stage { stage, .. }) => assert_eq!(stage, "load"),
        other => panic!("expected load-stage error, got {other:?}"),
    }
    assert!(cfg.out_dir.join("config_echo.json").exists());

    // The modularity operator has no equilibrium, so the metrics stage of a
    // truth-scored run fails -- after earlier operators completed.
    let mut cfg = full_config(tmp.path());
    cfg.operators = vec![OperatorKind::Laplacian, OperatorKind::Modularity];
    cfg.out_dir = tmp.path().join("out_modularity");
    match run_pipeline(&cfg) {
        Err(Error::Stage { stage, source }) => {
            assert_eq!(stage, "metrics-modularity");
            assert!(matches!(*source, Error::NoSteadyState { .. }));
        }
        other => panic!("expected metrics-stage error, got {other:?}"),
    }
    for kept in [
        "config_echo.json",
        "spectrum_laplacian.csv",
        "nmi_course_laplacian.csv",
        "partition_laplacian.json",
        "onion_laplacian.json",
        "spectrum_modularity.csv",
    ] {
        assert!(cfg.out_dir.join(kept).exists(), "{kept} missing");
    }
}

// ---------------------------------------------------------------------------
// Command-line surface
// ---------------------------------------------------------------------------

fn synclust() -> Command {
    Command::new(env!("CARGO_BIN_EXE_synclust"))
}

/// Exit codes follow the documented categories: 0 ok, 1 usage, 2 data,
/// 3 numerical.
#[test]
fn cli_exit_codes_cover_categories() {
    let tmp = tempfile::tempdir().unwrap();
    let graph = write_triangles(tmp.path());
    let out = tmp.path().join("out");

    let ok = synclust()
        .args(["spectrum", "--operator", "laplacian", "--k", "4"])
        .arg("--graph")
        .arg(&graph)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(out.join("spectrum_laplacian.csv").exists());

    // Usage: no operator given for a single-operator subcommand.
    let usage = synclust()
        .args(["spectrum"])
        .arg("--graph")
        .arg(&graph)
        .output()
        .unwrap();
    assert_eq!(usage.status.code(), Some(1));
    // Usage: unknown flag is a parse error.
    let parse = synclust().args(["spectrum", "--bogus"]).output().unwrap();
    assert_eq!(parse.status.code(), Some(1));

    // Data: the graph file does not exist.
    let data = synclust()
        .args(["spectrum", "--operator", "laplacian", "--graph", "/nonexistent.edges"])
        .output()
        .unwrap();
    assert_eq!(data.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&data.stderr).contains("error:"));

    // Numerical: a forced oversized Euler step diverges.
    let numerical = synclust()
        .args([
            "simulate",
            "--operator",
            "laplacian",
            "--method",
            "euler",
            "--euler-step",
            "2.0",
            "--times",
            "400",
            "--runs",
            "1",
        ])
        .arg("--graph")
        .arg(&graph)
        .arg("--out")
        .arg(tmp.path().join("sim"))
        .output()
        .unwrap();
    assert_eq!(
        numerical.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&numerical.stderr)
    );
}

/// Generated benchmarks round-trip through the other subcommands: the edge
/// list and truth files it writes are directly consumable.
#[test]
fn cli_generate_roundtrip() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bench");
    let gen = synclust()
        .args([
            "generate", "--n", "36", "--l1", "2", "--l2", "2", "--z-in1", "6", "--z-in2", "2",
            "--z-out", "1", "--seed", "3",
        ])
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(gen.status.code(), Some(0), "{}", String::from_utf8_lossy(&gen.stderr));
    let edges = out.join("bench.edges");
    for f in ["bench.edges", "bench_level1.csv", "bench_level2.csv"] {
        assert!(out.join(f).exists(), "{f} missing");
    }

    // The comment-bearing artifacts load straight back in.
    let spectrum = synclust()
        .args(["spectrum", "--operator", "laplacian", "--k", "6"])
        .arg("--graph")
        .arg(&edges)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(spectrum.status.code(), Some(0), "{}", String::from_utf8_lossy(&spectrum.stderr));

    let comm = synclust()
        .args(["communities", "--operator", "laplacian", "--t", "2.0", "--mu", "1.0", "--runs", "30"])
        .arg("--graph")
        .arg(&edges)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(comm.status.code(), Some(0), "{}", String::from_utf8_lossy(&comm.stderr));
    let doc: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.join("communities_laplacian.json")).unwrap(),
    )
    .unwrap();
    let communities = doc["communities"].as_object().unwrap();
    let covered: usize = communities.values().map(|v| v.as_array().unwrap().len()).sum();
    assert_eq!(covered, 36, "every node appears in exactly one community");

    let nmi = synclust()
        .args(["evaluate", "nmi", "--operators", "laplacian", "--taus", "0.5,2,8", "--runs", "30"])
        .arg("--graph")
        .arg(&edges)
        .arg("--truth")
        .arg(out.join("bench_level2.csv"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(nmi.status.code(), Some(0), "{}", String::from_utf8_lossy(&nmi.stderr));
    let course = std::fs::read_to_string(out.join("nmi_course_laplacian.csv")).unwrap();
    assert!(course.starts_with("# config_hash="));
    assert_eq!(course.lines().filter(|l| !l.starts_with('#')).count(), 4, "header + 3 taus");

    // The communities JSON feeds the reference-data metrics.
    let votes = out.join("votes.csv");
    let mut body = String::new();
    for v in 0..36 {
        body.push_str(&format!("{v},item{}\n", v / 18));
    }
    std::fs::write(&votes, body).unwrap();
    let covotes = synclust()
        .args(["evaluate", "covotes", "--min-size", "2"])
        .arg("--graph")
        .arg(&edges)
        .arg("--activity")
        .arg(&votes)
        .arg("--communities")
        .arg(out.join("communities_laplacian.json"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(covotes.status.code(), Some(0), "{}", String::from_utf8_lossy(&covotes.stderr));
    assert!(out.join("covotes.json").exists());
}

/// The config file drives the pipeline subcommand, and a second identical
/// invocation reproduces the metrics byte for byte.
#[test]
fn cli_config_file_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let graph = write_triangles(tmp.path());
    let (truth, _, _) = write_side_tables(tmp.path());
    let out = tmp.path().join("out");
    let cfg_path = tmp.path().join("run.json");
    let cfg = serde_json::json!({
        "graph": graph,
        "operators": ["laplacian", "rw-norm"],
        "runs": 20,
        "seed": 11,
        "tau_grid": [0.5, 2.0, 8.0],
        "mu_schedule": [1.0],
        "truth": truth,
        "out_dir": out,
    });
    std::fs::write(&cfg_path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();

    let run = |label: &str| {
        let o = synclust()
            .arg("--config")
            .arg(&cfg_path)
            .arg("pipeline")
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{label}: {}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out.join("metrics.json")).unwrap()
    };
    let first = run("first");
    assert!(out.join("nmi_course_rw-norm.csv").exists());
    assert!(out.join("onion_laplacian.json").exists());
    let second = run("second");
    assert_eq!(first, second, "pipeline reruns must be byte-identical");

    // A config file with an unknown key is rejected up front as usage error.
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"graph": "g.edges", "nonsense": 1}"#).unwrap();
    let o = synclust().arg("--config").arg(&bad).arg("pipeline").output().unwrap();
    assert_eq!(o.status.code(), Some(2), "parse errors are data errors");
}
