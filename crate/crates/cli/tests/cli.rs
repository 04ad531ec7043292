use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thetalift")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn hurwitz_forms_csv() {
    let o = run(&["hurwitz", "--max", "8", "--method", "forms"]);
    assert!(o.status.success());
    let s = stdout(&o);
    for line in ["0,-1/12", "3,1/3", "4,1/2", "7,1", "8,1"] {
        assert!(s.lines().any(|l| l == line), "missing {line}");
    }
}

#[test]
fn hurwitz_methods_byte_identical() {
    let a = run(&["hurwitz", "--max", "200", "--method", "forms"]);
    let b = run(&["hurwitz", "--max", "200", "--method", "lfunction"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn mertens_report() {
    let o = run(&["relation", "mertens", "--max", "99"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "exact-pass");
    assert_eq!(v["checked"], 50);
}

#[test]
fn completion_and_kronecker_pass() {
    assert_eq!(run(&["relation", "kronecker", "--max", "60"]).status.code(), Some(0));
    assert_eq!(run(&["relation", "completion", "--nu", "1", "--prec", "20"]).status.code(), Some(0));
}

#[test]
fn usage_errors() {
    let o = run(&["hurwitz", "--max", "8", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["hurwitz", "--max", "8", "--method", "guess"]).status.code(), Some(2));
}

#[test]
fn weil_check_and_failure_code() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("l.json");
    std::fs::write(&g, r#"{"gram": [[0,0,1],[0,-2,0],[1,0,0]]}"#).unwrap();
    let o = run(&["weil", "--gram", g.to_str().unwrap(), "--check"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["check"]["passed"], true);
    assert_eq!(v["cosets"].as_array().unwrap().len(), 2);
    // a negative tolerance cannot be met
    let o = run(&["weil", "--gram", g.to_str().unwrap(), "--check", "--tol=-1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn theta_a1_and_poly() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("a1.json");
    std::fs::write(&g, r#"{"gram": [[2]]}"#).unwrap();
    let o = run(&["theta", "--gram", g.to_str().unwrap(), "--prec", "5"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["weight"], "1/2");
    let p = dir.path().join("p.json");
    std::fs::write(&p, r#"{"terms": [{"exp": [1], "coeff": "1"}]}"#).unwrap();
    let o = run(&["theta", "--gram", g.to_str().unwrap(), "--prec", "5", "--poly", p.to_str().unwrap()]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["weight"], "3/2");
    // x² is not harmonic
    std::fs::write(&p, r#"{"terms": [{"exp": [2], "coeff": "1"}]}"#).unwrap();
    let o = run(&["theta", "--gram", g.to_str().unwrap(), "--prec", "5", "--poly", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn serre_pair_files() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    let f = dir.path().join("f.json");
    let d = thetalift::classical::delta(6).unwrap();
    let fj = thetalift::classical::duke_jenkins(5, 2, 3).unwrap();
    std::fs::write(&g, d.to_json().to_string()).unwrap();
    std::fs::write(&f, fj.to_json().to_string()).unwrap();
    let o = run(&["serre-pair", "--g", g.to_str().unwrap(), "--f", f.to_str().unwrap(), "--check"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["zero"], true);
}

#[test]
fn lift_eval_and_guard() {
    let o = run(&["lift", "eval", "--ell", "2", "--input", "duke-jenkins:1", "--at", "-0.3,1.2"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["re"].as_f64().unwrap().is_finite());
    assert!(v["tail_bound"].as_f64().unwrap() < 1e-7);
    let o = run(&["lift", "eval", "--ell", "2", "--input", "duke-jenkins:1", "--at", "0.5,2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["lift", "eval", "--ell", "2", "--input", "duke-jenkins:1", "--at", "0.5,2", "--guard", "0"]);
    assert!(o.status.success());
    let o = run(&["lift", "eval", "--ell", "3", "--dplus", "1", "--input", "duke-jenkins:1", "--at", "0.1,1.5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn lift_grid_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let args = [
        "lift", "grid", "--ell", "2", "--input", "duke-jenkins:1", "--xmin", "-0.1", "--xmax", "0.1", "--ymin", "1.2", "--ymax",
        "1.3", "--step", "0.1", "--tol", "1e-6",
    ];
    let a = run(&args);
    assert!(a.status.success());
    let mut with_out: Vec<&str> = args.to_vec();
    with_out.extend(["--out", out.to_str().unwrap()]);
    assert!(run(&with_out).status.success());
    assert_eq!(std::fs::read(&out).unwrap(), a.stdout);
    let s = stdout(&a);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "x,y,value,tail_bound,nearest_geodesic_distance");
    assert_eq!(lines.len(), 7);
    // x = 0 lies on a geodesic
    assert!(lines[2].starts_with("0,1.2,nan,nan"));
}

#[test]
fn lift_diagnose_json() {
    let o = run(&["lift", "diagnose", "--ell", "2", "--input", "duke-jenkins:1", "--at", "0.1,1.1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["eigenvalue_target"], -2.5);
    assert!(v["rayleigh_ratio"].as_f64().unwrap().is_finite());
    assert!(v["invariance_residuals"][0].as_f64().unwrap() < 1e-6);
}
