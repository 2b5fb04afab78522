//! End-to-end tests of the `driftlab` binary: flags, file outputs,
//! manifests, exit codes, and reproducibility.

use sha2::{Digest, Sha256};
use std::path::Path;
use std::process::{Command, Output};

use driftlab::stats::SeedSpec;
use driftlab::trajectory::{planted_fixture, PlantedFixtureConfig};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_driftlab"))
        .args(args)
        .output()
        .expect("binary must launch")
}

fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

fn csv_rows(text: &str) -> Vec<&str> {
    text.lines().skip(1).filter(|l| !l.is_empty()).collect()
}

#[test]
fn simulate_default_emits_trace_grids_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let output = run(&["simulate", "--out-dir", out.to_str().unwrap()]);
    assert_exit(&output, 0);

    // f_pre plus generations 0..=10.
    let trace = read(&out.join("trace.csv"));
    let rows = csv_rows(&trace);
    assert_eq!(rows.len(), 12, "trace:\n{trace}");
    assert!(rows[0].starts_with("-1,"));
    assert!(rows[11].starts_with("10,"));

    // One 512-point density grid per fitted model.
    assert!(out.join("pdf_pre.csv").exists());
    for k in 0..=10 {
        let grid = read(&out.join(format!("pdf_gen_{k:02}.csv")));
        assert_eq!(csv_rows(&grid).len(), 512);
    }

    // Manifest digests every output correctly.
    let manifest: serde_json::Value = serde_json::from_str(&read(&out.join("manifest.json"))).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["master_seed"], 42);
    assert_eq!(manifest["config"]["mode"], "wmle");
    let outputs = manifest["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 13); // trace + 12 grids
    for entry in outputs {
        let bytes = std::fs::read(out.join(entry["path"].as_str().unwrap())).unwrap();
        let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(entry["sha256"].as_str().unwrap(), digest);
        assert_eq!(entry["bytes"].as_u64().unwrap() as usize, bytes.len());
    }
}

#[test]
fn simulate_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let output = run(&[
            "simulate",
            "--out-dir",
            out.to_str().unwrap(),
            "--n-samples",
            "20000",
            "--generations",
            "4",
            "--seed",
            "123",
        ]);
        assert_exit(&output, 0);
    }
    for name in ["trace.csv", "pdf_pre.csv", "pdf_gen_03.csv"] {
        assert_eq!(
            std::fs::read(a.join(name)).unwrap(),
            std::fs::read(b.join(name)).unwrap(),
            "{name} differs between identical runs"
        );
    }
}

#[test]
fn simulate_mle_mode_stays_on_target() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mle");
    let output = run(&[
        "simulate",
        "--out-dir",
        out.to_str().unwrap(),
        "--mode",
        "mle",
        "--generations",
        "10",
    ]);
    assert_exit(&output, 0);
    for row in csv_rows(&read(&out.join("trace.csv"))) {
        let fields: Vec<&str> = row.split(',').collect();
        let gen: i32 = fields[0].parse().unwrap();
        let mean: f64 = fields[3].parse().unwrap();
        if gen >= 0 {
            assert!((mean - 0.5).abs() <= 0.01, "gen {gen} mean {mean}");
        }
    }
}

#[test]
fn malformed_config_exits_2_with_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("broken.json");
    std::fs::write(&cfg, "{\"sim\": {").unwrap();
    let out = dir.path().join("never");
    let output = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_exit(&output, 2);
    assert!(!out.exists(), "no partial outputs on config error");
}

#[test]
fn collapse_single_replication_exits_2_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let output = run(&[
        "collapse",
        "--out-dir",
        out.to_str().unwrap(),
        "--replications",
        "1",
        "--mode",
        "mle",
        "--n-samples",
        "200",
    ]);
    assert_exit(&output, 2);
    assert!(!out.exists());
}

#[test]
fn collapse_with_mitigation_emits_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("collapse.json");
    std::fs::write(
        &cfg,
        r#"{
  "seed": {"master_seed": 11, "stream_label": "cli-collapse"},
  "sim": {
    "n_samples": 200,
    "generations": 10,
    "mode": "mle",
    "mitigation": "preservation",
    "preserve_fraction": 0.10
  }
}"#,
    )
    .unwrap();
    let out = dir.path().join("ens");
    let output = run(&[
        "collapse",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
        "--replications",
        "10",
    ]);
    assert_exit(&output, 0);

    let dispersion = read(&out.join("dispersion.csv"));
    assert_eq!(csv_rows(&dispersion).len(), 11, "{dispersion}");
    assert!(out.join("dispersion_baseline.csv").exists());
    assert!(out.join("trace_rep000.csv").exists());
    assert!(out.join("trace_rep009.csv").exists());
    let comparison: serde_json::Value =
        serde_json::from_str(&read(&out.join("comparison.json"))).unwrap();
    assert_eq!(comparison["mitigation"], "preservation");
    assert!(comparison["dispersion_reduced"].is_boolean());
}

#[test]
fn project_default_reproduces_plug_in_magnitudes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("proj");
    let output = run(&["project", "--out-dir", out.to_str().unwrap()]);
    assert_exit(&output, 0);
    let rows: Vec<String> = csv_rows(&read(&out.join("trajectory.csv")))
        .iter()
        .map(|s| s.to_string())
        .collect();
    assert_eq!(rows.len(), 3);
    let magnitudes: Vec<f64> = rows
        .iter()
        .map(|r| r.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!((magnitudes[0] - 2.1).abs() < 1e-12);
    assert!((magnitudes[1] - 2.2).abs() < 1e-12);
    assert!((magnitudes[2] - 2.3).abs() < 1e-12);
    assert!(rows.iter().all(|r| r.ends_with(",0")), "no flips expected");
}

#[test]
fn project_flip_and_zero_gradient_configs() {
    let dir = tempfile::tempdir().unwrap();
    let flip_cfg = dir.path().join("flip.json");
    std::fs::write(
        &flip_cfg,
        r#"{"projection": {
  "dim": 2, "u": [1.0, 0.0], "eta": 1.0,
  "loss": {"kind": "linear", "gradient": [3.0, 0.0]},
  "steps": 1, "rule": "projected", "initial_theta": [2.0, 0.0]
}}"#,
    )
    .unwrap();
    let out = dir.path().join("flip");
    assert_exit(
        &run(&["project", "--config", flip_cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]),
        0,
    );
    let row = csv_rows(&read(&out.join("trajectory.csv")))[0].to_string();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[4], "1", "flip flag must be set: {row}");
    let magnitude: f64 = fields[2].parse().unwrap();
    assert!((magnitude - 1.0).abs() < 1e-12);

    let zero_cfg = dir.path().join("zero.json");
    std::fs::write(
        &zero_cfg,
        r#"{"projection": {
  "dim": 2, "u": [1.0, 0.0], "eta": 0.5,
  "loss": {"kind": "linear", "gradient": [0.0, 0.0]},
  "steps": 3, "rule": "projected", "initial_theta": [2.0, 0.5]
}}"#,
    )
    .unwrap();
    let out = dir.path().join("zero");
    assert_exit(
        &run(&["project", "--config", zero_cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]),
        0,
    );
    for row in csv_rows(&read(&out.join("trajectory.csv"))) {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[1], "0"); // c_t
        assert_eq!(fields[2], "2"); // bias magnitude unchanged
    }
}

#[test]
fn analyze_recovers_planted_structure_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = planted_fixture(
        &PlantedFixtureConfig {
            n_signals: 300,
            planted_a: 30,
            planted_b: 30,
            overlap: 10,
            ..PlantedFixtureConfig::default()
        },
        &SeedSpec::new(77, "cli-analyze"),
    )
    .unwrap();
    let csv_path = dir.path().join("trajectories.csv");
    let mut buf = Vec::new();
    fixture.matrix.write_csv(&mut buf).unwrap();
    std::fs::write(&csv_path, &buf).unwrap();

    let out = dir.path().join("analysis");
    let output = run(&[
        "analyze",
        csv_path.to_str().unwrap(),
        "--outcome",
        "bias",
        "--compare",
        "quality",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_exit(&output, 0);

    assert_eq!(csv_rows(&read(&out.join("results_bias.csv"))).len(), 300);
    assert_eq!(csv_rows(&read(&out.join("results_quality.csv"))).len(), 300);

    let report: serde_json::Value = serde_json::from_str(&read(&out.join("report.json"))).unwrap();
    assert_eq!(report["threshold"], 0.05);
    let bias_significant = report["outcomes"]["bias"]["significant"]
        .as_object()
        .unwrap();
    let recalled = fixture
        .truth_a
        .iter()
        .filter(|name| bias_significant.contains_key(*name))
        .count();
    assert!(recalled >= 27, "recalled only {recalled}/30 planted signals");
    let overlap = &report["overlap"];
    assert_eq!(overlap["universe"], 300);
    assert!(overlap["intersection_size"].as_u64().unwrap() >= 8);
    assert!(overlap["jaccard"].as_f64().unwrap() > 0.0);
    assert!(overlap["hypergeometric_p"].as_f64().unwrap() < 1e-6);
}

#[test]
fn analyze_missing_outcome_exits_3_listing_available() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("t.csv");
    std::fs::write(&csv_path, "version,y:bias,x:n1\n1,0.5,0.1\n2,0.6,0.2\n3,0.7,0.4\n4,0.8,0.3\n")
        .unwrap();
    let output = run(&[
        "analyze",
        csv_path.to_str().unwrap(),
        "--outcome",
        "quality",
        "--out-dir",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_exit(&output, 3);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("bias"), "stderr should list available outcomes: {stderr}");
}

#[test]
fn aggregate_bias_series_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let labels = dir.path().join("labels.jsonl");
    std::fs::write(
        &labels,
        concat!(
            r#"{"generation":0,"article_id":"a","label":"left"}"#, "\n",
            r#"{"generation":0,"article_id":"b","label":"center"}"#, "\n",
            r#"{"generation":0,"article_id":"c","label":"right"}"#, "\n",
            r#"{"generation":0,"article_id":"d","label":"right"}"#, "\n",
            r#"{"generation":1,"article_id":"e","label":"left"}"#, "\n",
            r#"{"generation":1,"article_id":"f","label":"right"}"#, "\n",
            r#"{"generation":1,"article_id":"g","label":"right"}"#, "\n",
            r#"{"generation":1,"article_id":"h","label":"right"}"#, "\n",
        ),
    )
    .unwrap();
    let out = dir.path().join("agg");
    let output = run(&[
        "aggregate",
        labels.to_str().unwrap(),
        "--kind",
        "bias",
        "--side",
        "right",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_exit(&output, 0);
    assert_eq!(
        read(&out.join("series_right_prop.csv")),
        "generation,value\n0,0.5\n1,0.75\n"
    );
}

#[test]
fn aggregate_quality_series_and_gap_error() {
    let dir = tempfile::tempdir().unwrap();
    let sentences = dir.path().join("sentences.jsonl");
    std::fs::write(
        &sentences,
        concat!(
            r#"{"generation":0,"article_id":"a","sentence_index":0,"category":"clean"}"#, "\n",
            r#"{"generation":0,"article_id":"b","sentence_index":0,"category":"clean"}"#, "\n",
            r#"{"generation":1,"article_id":"c","sentence_index":0,"category":"clean"}"#, "\n",
            r#"{"generation":1,"article_id":"c","sentence_index":1,"category":"mild_gibberish"}"#, "\n",
        ),
    )
    .unwrap();
    let out = dir.path().join("agg");
    let output = run(&[
        "aggregate",
        sentences.to_str().unwrap(),
        "--kind",
        "quality",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_exit(&output, 0);
    assert_eq!(
        read(&out.join("series_quality_index.csv")),
        "generation,value\n0,3\n1,2.5\n"
    );

    let gappy = dir.path().join("gappy.jsonl");
    std::fs::write(
        &gappy,
        concat!(
            r#"{"generation":0,"article_id":"a","label":"left"}"#, "\n",
            r#"{"generation":2,"article_id":"b","label":"right"}"#, "\n",
        ),
    )
    .unwrap();
    let output = run(&[
        "aggregate",
        gappy.to_str().unwrap(),
        "--kind",
        "bias",
        "--out-dir",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_exit(&output, 3);
    assert!(String::from_utf8_lossy(&output.stderr).contains("missing"));
}
