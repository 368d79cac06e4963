//! End-to-end checks of the `poclab` binary: formats, determinism, and exit
//! codes (0 success, 1 validation, 2 I/O).

use std::path::PathBuf;
use std::process::{Command, Output};

use poclab_core::{CnfFormula, MultiHypergraph};

fn poclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poclab"))
        .args(args)
        .output()
        .expect("spawn poclab")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn temp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("poclab-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn sample_emits_parsable_deterministic_fixture() {
    let args = [
        "sample", "--n", "50", "--d", "2", "--lambda", "3.0", "--seed", "11",
    ];
    let first = poclab(&args);
    assert!(first.status.success());
    let text = stdout(&first);
    let h = MultiHypergraph::parse_fixture_str(&text).unwrap();
    assert_eq!(h.vertex_count(), 50);
    let second = poclab(&args);
    assert_eq!(first.stdout, second.stdout, "same seed, same bytes");
}

#[test]
fn core_peel_reads_fixture_files() {
    let fixture = temp_path("triangle.txt");
    std::fs::write(&fixture, "4 2\n0 1\n1 2\n0 2\n2 3\n").unwrap();
    let out = poclab(&[
        "core",
        "--algo",
        "peel",
        "--input",
        fixture.to_str().unwrap(),
        "--k",
        "2",
    ]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["core"]["core_vertices"], serde_json::json!([0, 1, 2]));
    std::fs::remove_file(&fixture).ok();
}

#[test]
fn core_cutoff_reports_trace() {
    let out = poclab(&[
        "core", "--algo", "cutoff", "--n", "40", "--d", "2", "--lambda", "4.0", "--k", "3",
        "--seed", "5",
    ]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(json["trace"]["final_theta"].as_f64().unwrap() >= 0.0);
    assert!(json["trace"]["theta_steps"].is_array());
}

#[test]
fn threshold_and_predict_report_numerics() {
    let out = poclab(&["threshold", "--k", "3", "--d", "2"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let lambda_crit = json["lambda_crit"].as_f64().unwrap();
    assert!((lambda_crit - 3.3509).abs() < 1e-3);
    assert_eq!(json["attained"], serde_json::json!(true));

    let out = poclab(&["predict", "--lambda", "4.0", "--k", "3", "--d", "2"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((json["core_fraction"].as_f64().unwrap() - 0.6647).abs() < 1e-3);

    let absent = poclab(&["predict", "--lambda", "3.0", "--k", "3", "--d", "2"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&absent)).unwrap();
    assert!(json["x_star"].is_null());
}

#[test]
fn sweep_csv_is_bit_identical_across_worker_counts() {
    let config = temp_path("sweep.json");
    std::fs::write(
        &config,
        r#"{"model":"poc","n":300,"d":2,"k":3,"lambda_grid":[2.0,4.0],"trials_per_point":4,"master_seed":17}"#,
    )
    .unwrap();
    let out1 = temp_path("sweep1.csv");
    let out8 = temp_path("sweep8.csv");
    for (path, workers) in [(&out1, "1"), (&out8, "8")] {
        let out = poclab(&[
            "sweep",
            "--config",
            config.to_str().unwrap(),
            "--out",
            path.to_str().unwrap(),
            "--workers",
            workers,
        ]);
        assert!(out.status.success(), "sweep failed: {out:?}");
    }
    let bytes1 = std::fs::read(&out1).unwrap();
    let bytes8 = std::fs::read(&out8).unwrap();
    assert_eq!(bytes1, bytes8);
    let text = String::from_utf8(bytes1).unwrap();
    assert!(text.starts_with("model,n,d,k,param,"));
    assert_eq!(text.lines().count(), 1 + 2 * 4);
    for p in [&config, &out1, &out8] {
        std::fs::remove_file(p).ok();
    }
}

#[test]
fn sat_round_trips_dimacs_through_files() {
    let dimacs = temp_path("formula.cnf");
    let run = poclab(&[
        "sat",
        "--n-vars",
        "60",
        "--k",
        "3",
        "--density",
        "1.5",
        "--trials",
        "1",
        "--seed",
        "3",
        "--dimacs-out",
        dimacs.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let text = std::fs::read_to_string(&dimacs).unwrap();
    let formula = CnfFormula::parse_dimacs_str(&text).unwrap();
    assert_eq!(formula.n_vars(), 60);
    assert_eq!(formula.clause_count(), 90);
    assert_eq!(formula.to_dimacs_string(), text, "bit-exact round trip");

    let eliminate = poclab(&["sat", "--input", dimacs.to_str().unwrap(), "--seed", "4"]);
    assert!(eliminate.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&eliminate)).unwrap();
    assert_eq!(json["n_clauses"], serde_json::json!(90));
    std::fs::remove_file(&dimacs).ok();
}

#[test]
fn exit_code_one_on_validation_errors() {
    // Numeric domain error from the library.
    let out = poclab(&["threshold", "--k", "1", "--d", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());

    // Usage error from flag parsing.
    let out = poclab(&["threshold", "--k", "notanumber", "--d", "2"]);
    assert_eq!(out.status.code(), Some(1));

    // Missing required parameter.
    let out = poclab(&["predict", "--k", "3", "--d", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_code_two_on_io_errors() {
    let out = poclab(&[
        "core",
        "--algo",
        "peel",
        "--k",
        "2",
        "--input",
        "/nonexistent/fixture.txt",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = poclab(&[
        "sample",
        "--n",
        "10",
        "--lambda",
        "2.0",
        "--out",
        "/nonexistent/dir/out.txt",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(poclab(&["--help"]).status.code(), Some(0));
    assert_eq!(poclab(&["--version"]).status.code(), Some(0));
}
