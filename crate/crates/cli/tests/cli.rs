use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_viewpoint"))
}

fn sample_corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/sample_corpus.jsonl")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Data rows of a CSV written with `# ` provenance lines and a header.
fn data_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(str::to_owned)
        .collect()
}

#[test]
fn missing_corpus_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["train", "--corpus", "/nonexistent/corpus.jsonl", "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not exist"));

    let out = run(&["train", "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "topcs = 4\n").unwrap();
    let out = run(&["train", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["train", "--scheme", "nouns"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_corpus_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("broken.jsonl");
    fs::write(&corpus, "{not json}\n").unwrap();
    let out = run(&["train", "--corpus", s(&corpus), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn train_is_deterministic_and_traces_every_sweep() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let corpus = sample_corpus();
    for dir in [&a, &b] {
        let out = run(&["train", "--corpus", s(&corpus), "--topics", "4", "--sweeps", "40", "--out", s(dir.path())]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let cp_a = fs::read_to_string(a.path().join("checkpoint.json")).unwrap();
    let cp_b = fs::read_to_string(b.path().join("checkpoint.json")).unwrap();
    // the output dir is part of the echoed config
    assert_eq!(cp_a.replace(s(a.path()), "OUT"), cp_b.replace(s(b.path()), "OUT"));
    assert!(cp_a.contains("\"code_version\""));
    assert_eq!(data_rows(&a.path().join("loglik.csv")).len(), 40);
    let trace = fs::read_to_string(a.path().join("loglik.csv")).unwrap();
    assert!(trace.starts_with("# code_version: "));
    assert!(trace.contains("# seed: 1"));
}

#[test]
fn config_file_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    let body = serde_json::json!({
        "corpus": sample_corpus(),
        "output_dir": dir.path().join("out"),
        "model": "lda",
        "topics": 3,
        "sweeps": 25,
        "seed": 11,
    });
    fs::write(&cfg, body.to_string()).unwrap();
    let out = run(&["train", "--config", s(&cfg), "--seed", "12"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cp: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/checkpoint.json")).unwrap()).unwrap();
    assert_eq!(cp["model"]["kind"], "lda");
    assert_eq!(cp["config"]["seed"], 12);
    assert_eq!(cp["config"]["topics"], 3);

    let out = run(&["evaluate", s(&dir.path().join("out/checkpoint.json"))]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/evaluate_topics.json")).unwrap()).unwrap();
    let acc = report["result"]["cv"]["mean_accuracy"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&acc));
    assert_eq!(report["result"]["cv"]["folds"], 5);

    let out = run(&["groups", s(&dir.path().join("out/checkpoint.json"))]);
    assert_eq!(out.status.code(), Some(2), "groups need a CorrLDA2 checkpoint");
}

#[test]
fn groups_report_is_additive() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = sample_corpus();
    let out = run(&["train", "--corpus", s(&corpus), "--topics", "6", "--sweeps", "150", "--out", s(dir.path())]);
    assert!(out.status.success());
    let out = run(&["groups", s(&dir.path().join("checkpoint.json"))]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let groups: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("groups.json")).unwrap()).unwrap();
    let reports = groups["result"]["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    let mut covered = 0;
    for r in reports {
        let rows = r["topic_rows"].as_array().unwrap();
        let sum: f64 = rows.iter().map(|row| row["weight"].as_f64().unwrap()).sum();
        assert!((sum - r["score"].as_f64().unwrap()).abs() < 1e-12);
        let sign = r["aspect_weight"].as_f64().unwrap();
        assert_eq!(r["viewpoint"], if sign < 0.0 { "palestinian" } else { "israeli" });
        covered += rows.len();
    }
    covered += groups["result"]["groups"]["neutral"].as_array().unwrap().len();
    assert_eq!(covered, 6);
    let text = fs::read_to_string(dir.path().join("groups.txt")).unwrap();
    assert!(text.contains("Group of aspect 0"));
}

#[test]
fn sweep_has_one_row_per_topic_count_and_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = sample_corpus();
    let out = run(&[
        "sweep",
        "--corpus",
        s(&corpus),
        "--topic-range",
        "2:6:2",
        "--schemes",
        "opinion+ne,ne",
        "--sweeps",
        "30",
        "--jobs",
        "2",
        "--out",
        s(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = data_rows(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 3 * 2);
    assert!(rows[0].starts_with("2,opinion+ne,"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sweep.json")).unwrap()).unwrap();
    assert_eq!(report["result"]["points"].as_array().unwrap().len(), 6);

    let out = run(&["sweep", "--corpus", s(&corpus), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2), "sweep without a topic range");
}

#[test]
fn sweep_output_does_not_depend_on_jobs() {
    let corpus = sample_corpus();
    let mut csvs = Vec::new();
    for jobs in ["1", "3"] {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&[
            "sweep", "--corpus", s(&corpus), "--topic-range", "2,3,4", "--sweeps", "20", "--jobs", jobs, "--out",
            s(dir.path()),
        ]);
        assert!(out.status.success());
        csvs.push(data_rows(&dir.path().join("sweep.csv")));
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn accuracy_curve_rows() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = sample_corpus();
    let out = run(&[
        "accuracy-curve",
        "--corpus",
        s(&corpus),
        "--model",
        "corrlda2",
        "--topic-range",
        "2,4",
        "--sweeps",
        "20",
        "--out",
        s(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = data_rows(&dir.path().join("accuracy_curve.csv"));
    assert_eq!(rows.len(), 2 * 3);
    assert!(rows.iter().any(|r| r.starts_with("4,corrlda2,combined,")));
}

#[test]
fn stats_reports_every_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["stats", "--corpus", s(&sample_corpus()), "--out", s(dir.path())]);
    assert!(out.status.success());
    let stats: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stats["documents"], 60);
    assert_eq!(stats["schemes"].as_array().unwrap().len(), 4);
    assert!(dir.path().join("stats.json").is_file());
}
