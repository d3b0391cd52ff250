use std::process::{Command, Output};

use serde_json::Value;

fn heightlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heightlab")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = heightlab(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn verify_output_is_reproducible() {
    let a = heightlab(&["verify", "all", "--seed", "42"]);
    let b = heightlab(&["verify", "all", "--seed", "42", "--threads", "2"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["seed"], 42);
}

#[test]
fn projective_line_local_factor() {
    let v = json(&["zeta", "local", "p1", "--p", "7", "--s", "2"]);
    assert_eq!(v["local_factor"]["exact"], "8/7");
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn heisenberg_orbit() {
    let v = json(&["orbit", "analyze", "h3", "--ell", "5,1,2"]);
    assert_eq!(v["stratum"]["d"], serde_json::json!([0, 1, 2]));
    assert_eq!(v["pfaffian"], "-5");
    assert_eq!(v["representative"], serde_json::json!(["5", "0", "0"]));
    assert_eq!(v["orbit_dim"], 2);
}

#[test]
fn polarization_is_maximal_isotropic() {
    let v = json(&["polarize", "--algebra", "k4", "--ell", "1,2,3,4"]);
    assert_eq!(v["dim"], v["expected_dim"]);
    assert_eq!(v["isotropic"], true);
    assert_eq!(v["subalgebra"], true);
}

#[test]
fn invariants_symmetrize_to_central_elements() {
    let v = json(&["envelope", "sym", "k4"]);
    for inv in v["invariants"].as_array().unwrap() {
        assert_eq!(inv["central"], true);
    }
}

#[test]
fn count_csv_feeds_fit() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("p2.csv");
    let ckpt = dir.path().join("ckpt");
    let out = heightlab(&[
        "count", "run", "p2", "--max-B", "100000", "--shells", "5", "--format", "csv",
        "--out", csv.to_str().unwrap(), "--checkpoint-dir", ckpt.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("B,N,N_over_prediction\n"));
    assert_eq!(text.lines().count(), 6);
    let v = json(&["count", "fit", "p2", "--input", csv.to_str().unwrap()]);
    assert!(v["relative_deviation"].as_f64().unwrap() < 0.05);
}

#[test]
fn exit_codes() {
    assert_eq!(heightlab(&["zeta", "local", "no_such_model", "--p", "3"]).status.code(), Some(1));
    assert_eq!(heightlab(&["orbit", "analyze", "h3", "--ell", "1/0,2,3"]).status.code(), Some(1));
    assert_eq!(heightlab(&["orbit", "analyze", "h3", "--ell", "1,2"]).status.code(), Some(2));
    assert_eq!(heightlab(&["count", "run", "p1", "--max-B", "1000000", "--budget", "10"]).status.code(), Some(3));
    assert_eq!(heightlab(&["verify", "nonsense"]).status.code(), Some(1));
}
