use std::path::Path;
use std::process::{Command, Output};

use john_core::io::write_matrix_market;
use john_core::PolytopeInstance;

fn john(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_john")).args(args).output().expect("binary runs")
}

fn json_field(report: &str, key: &str) -> String {
    let prefix = format!("\"{key}\": ");
    let line = report.lines().find_map(|l| l.trim().strip_prefix(&prefix)).unwrap_or_else(|| panic!("no {key}"));
    line.trim_end_matches(',').to_string()
}

fn diamond_file(dir: &Path) -> String {
    let path = dir.join("diamond.mtx");
    let inst = PolytopeInstance::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0]]).unwrap();
    write_matrix_market(&inst, &path).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn identity_cube_is_exact() {
    let out = john(&["solve", "--gen", "identity-cube:5", "--eps", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let report = String::from_utf8(out.stdout).unwrap();
    assert_eq!(json_field(&report, "epsilon_achieved").parse::<f64>().unwrap(), 0.0);
    assert_eq!(json_field(&report, "certified"), "true");
}

#[test]
fn gaussian_instance_certifies() {
    let out = john(&["solve", "--gen", "gaussian-dense:200x10:seed=7", "--eps", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(json_field(&report, "max_sigma").parse::<f64>().unwrap() <= 1.1);
    assert_eq!(json_field(&report, "algorithm"), "\"fixed-point\"");
}

#[test]
fn verify_accepts_the_diamond_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = diamond_file(dir.path());
    let w = dir.path().join("w.json");
    std::fs::write(&w, "[0, 0, 1, 1]").unwrap();
    let out = john(&["verify", "--input", &mtx, "--weights", w.to_str().unwrap(), "--eps", "0.01"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    std::fs::write(&w, "[0.5, 0.5, 0.5, 0.5]").unwrap();
    let out = john(&["verify", "--input", &mtx, "--weights", w.to_str().unwrap(), "--eps", "0.01"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn too_few_iterations_exit_one() {
    let out = john(&["solve", "--gen", "gaussian-dense:200x10:seed=7", "--eps", "0.5", "--iters", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_field(&String::from_utf8(out.stdout).unwrap(), "certified"), "false");
}

#[test]
fn errors_exit_two_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.mtx");
    let cases = [
        (vec!["solve", "--gen", "gaussian-dense:5x10"], "dimension"),
        (vec!["solve", "--input", missing.to_str().unwrap()], "io"),
        (vec!["solve", "--gen", "identity-cube:3", "--eps", "2"], "domain"),
    ];
    for (args, kind) in cases {
        let out = john(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err: serde_json::Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
        assert_eq!(err["error"], kind);
    }

    let bad = dir.path().join("bad.mtx");
    std::fs::write(&bad, "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n1 2 1\n").unwrap();
    let out = john(&["solve", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert_eq!(err["error"], "zero_row");
}

#[test]
fn csv_trace_has_one_row_per_iteration() {
    let out = john(&["solve", "--gen", "gaussian-dense:200x10:seed=7", "--eps", "0.1", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iter,max_sigma,weight_sum,wall_ms"));
    // ⌈20·ln 20⌉ iterations.
    assert_eq!(lines.count(), 60);
}

#[test]
fn reports_are_deterministic_modulo_wall_time() {
    let args = ["solve-sketched", "--gen", "gaussian-dense:80x4:seed=2", "--eps", "0.5", "--seed", "5"];
    let strip = |o: Output| -> String {
        String::from_utf8(o.stdout).unwrap().lines().filter(|l| !l.contains("wall_ms")).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(strip(john(&args)), strip(john(&args)));
    let other = ["solve-sketched", "--gen", "gaussian-dense:80x4:seed=2", "--eps", "0.5", "--seed", "6"];
    assert_ne!(strip(john(&args)), strip(john(&other)));
}

#[test]
fn outputs_go_to_files() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let weights = dir.path().join("w.json");
    let mtx = dir.path().join("inst.mtx");

    let out = john(&["gen", "--gen", "sparse-bernoulli:300x6:density=0.2:seed=3", "--out", mtx.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());

    let out = john(&[
        "solve",
        "--input",
        mtx.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
        "--weights-out",
        weights.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let w = john_core::io::read_weights(&weights).unwrap();
    assert!((w.sum() - 6.0).abs() < 1e-9);

    let out = john(&["verify", "--input", mtx.to_str().unwrap(), "--weights", weights.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(&report).unwrap().contains("\"n\": 6"));
}

#[test]
fn volume_mode_divides_epsilon_by_n() {
    let out = john(&["solve", "--gen", "gaussian-dense:50x5:seed=1", "--eps", "0.5", "--volume-mode"]);
    assert_eq!(out.status.code(), Some(0));
    let report = String::from_utf8(out.stdout).unwrap();
    assert_eq!(json_field(&report, "epsilon_target").parse::<f64>().unwrap(), 0.1);
    // ⌈(2/0.1)·ln 10⌉
    assert_eq!(json_field(&report, "iterations"), "47");
}

#[test]
fn oracle_and_sketched_subcommands_certify() {
    let out = john(&["oracle", "--gen", "gaussian-dense:60x4:seed=1", "--eps", "1e-6"]);
    assert_eq!(out.status.code(), Some(0));
    let out = john(&["solve-sketched", "--gen", "rotated-diamond:seed=2", "--eps", "0.5", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let report = String::from_utf8(out.stdout).unwrap();
    assert_eq!(json_field(&report, "epsilon_target").parse::<f64>().unwrap(), 1.25);
}

#[test]
fn bench_emits_one_row_per_cell() {
    let out = john(&["bench", "--m-list", "50,100", "--n-list", "3,5", "--eps-list", "0.5,0.2", "--repeats", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], john_cli::BENCH_HEADER);
    assert_eq!(rows.len(), 9);
    assert!(rows[1..].iter().all(|r| r.ends_with(",true")));
}
