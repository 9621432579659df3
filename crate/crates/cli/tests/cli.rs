use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_schlomilch"))
}

struct Files(TempDir);

impl Files {
    fn new() -> Self {
        Files(tempfile::tempdir().unwrap())
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.0.path().join(name);
        std::fs::File::create(&p).unwrap().write_all(text.as_bytes()).unwrap();
        p
    }
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

fn json_values(o: &Output) -> Vec<Value> {
    let v: Value = serde_json::from_str(&stdout(o)).unwrap();
    v["values"].as_array().unwrap().clone()
}

#[test]
fn pdf_uniform_dirichlet() {
    let f = Files::new();
    let p = f.write("d.json", r#"{"family":"dirichlet","alpha":[1,1]}"#);
    let o = run(&["pdf", "--params", p.to_str().unwrap(), "--point", "0.3,0.7"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0][2], 0.0);
}

#[test]
fn pdf_equal_beta_schlomilch_matches_dirichlet() {
    let f = Files::new();
    let d = f.write("d.json", r#"{"family":"dirichlet","alpha":[1.7,0.6,2.2]}"#);
    let s = f.write("s.json", r#"{"family":"schlomilch","alpha":[1.7,0.6,2.2],"beta":[2,2,2],"tau":1}"#);
    let pts = f.write("p.csv", "x1,x2,x3\n0.2,0.3,0.5\n0.1,0.8,0.1\n0.6,0.25,0.15\n");
    let a = run(&["pdf", "--params", d.to_str().unwrap(), "--points", pts.to_str().unwrap()]);
    let b = run(&["pdf", "--params", s.to_str().unwrap(), "--points", pts.to_str().unwrap()]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn pdf_boundary_point_is_a_record_error() {
    let f = Files::new();
    let p = f.write("d.json", r#"{"family":"dirichlet","alpha":[1,1]}"#);
    let o = run(&["pdf", "--params", p.to_str().unwrap(), "--point", "0,1", "--point", "0.5,0.5"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.lines().nth(1).unwrap().ends_with("NaN"));
    assert!(out.lines().nth(2).unwrap().ends_with("0.0000000000000000e0"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("record 1"));
}

#[test]
fn invalid_params_exit_2() {
    let f = Files::new();
    let bad = f.write("bad.json", r#"{"family":"schlomilch","alpha":[1,1]}"#);
    let o = run(&["pdf", "--params", bad.to_str().unwrap(), "--point", "0.5,0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let typo = f.write("typo.json", r#"{"family":"dirichlet","alpah":[1,1]}"#);
    assert_eq!(run(&["sample", "--params", typo.to_str().unwrap()]).status.code(), Some(2));
    let neg = f.write("neg.json", r#"{"family":"dirichlet","alpha":[1,-1]}"#);
    assert_eq!(run(&["sample", "--params", neg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn sample_is_deterministic_and_on_the_simplex() {
    let f = Files::new();
    let p = f.write("sm.json", r#"{"family":"sm","alpha":[0.8,1.5,2.5],"beta":[0.2,0.3,0.5],"gamma":[0.6,0.1,0.3],"n":2,"sigma":0.8,"tau":1.3}"#);
    let args = ["sample", "--params", p.to_str().unwrap(), "--seed", "42", "--count", "500"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().next().unwrap(), "x1,x2,x3");
    for r in csv_rows(&text) {
        assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    let other = run(&["sample", "--params", p.to_str().unwrap(), "--seed", "43", "--count", "500"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn sample_means_of_uniform_dirichlet() {
    let f = Files::new();
    let p = f.write("d.json", r#"{"family":"dirichlet","alpha":[1,1,1]}"#);
    let o = run(&["sample", "--params", p.to_str().unwrap(), "--count", "100000", "--seed", "7"]);
    let rows = csv_rows(&stdout(&o));
    let n = rows.len() as f64;
    // Var X_i = 1/18 for Dirichlet(1,1,1)
    let se = (1.0 / 18.0 / n).sqrt();
    for c in 0..3 {
        let mean = rows.iter().map(|r| r[c]).sum::<f64>() / n;
        assert!((mean - 1.0 / 3.0).abs() < 4.0 * se, "column {c}: {mean}");
    }
}

#[test]
fn samples_reingest_into_pdf() {
    let f = Files::new();
    for doc in [
        r#"{"family":"sm","alpha":[0.8,1.5,2.5],"beta":[0.2,0.3,0.5],"gamma":[0.6,0.1,0.3],"n":2}"#,
        r#"{"family":"superellipsoid","alpha":[0.9,1.4,2.0],"a":[1.5,0.8],"b":[1,2],"c":[0.4,-0.5]}"#,
        r#"{"family":"is","alpha":[0.3,0.4,0.5],"beta":[0.2,0.5,0.3],"tau":1.4}"#,
    ] {
        let p = f.write("f.json", doc);
        let s = run(&["sample", "--params", p.to_str().unwrap(), "--count", "2000", "--seed", "3"]);
        assert!(s.status.success());
        let csv = f.write("s.csv", &stdout(&s));
        let o = run(&["pdf", "--params", p.to_str().unwrap(), "--points", csv.to_str().unwrap()]);
        assert!(o.status.success(), "{doc}: {}", String::from_utf8_lossy(&o.stderr));
        let rows = csv_rows(&stdout(&o));
        assert_eq!(rows.len(), 2000);
        assert!(rows.iter().all(|r| r.last().unwrap().is_finite()));
    }
}

#[test]
fn fractional_g4b_has_no_sampler() {
    let f = Files::new();
    let p = f.write("g.json", r#"{"family":"g4b","alpha":[1.3,2.2],"kappa":6.1,"lambda":0.3}"#);
    assert_eq!(run(&["sample", "--params", p.to_str().unwrap()]).status.code(), Some(2));
    let o = run(&["pdf", "--params", p.to_str().unwrap(), "--point", "0.4,0.6"]);
    assert!(o.status.success());
}

#[test]
fn tilt_n1_means() {
    let f = Files::new();
    let (alpha, beta) = ([0.8, 1.5, 2.5], [0.2, 0.3, 0.5]);
    let inv: Vec<f64> = beta.iter().map(|b| 1.0 / b).collect();
    let doc = format!(
        r#"{{"family":"sm","alpha":{alpha:?},"beta":{beta:?},"gamma":{inv:?},"n":1}}"#
    );
    let p = f.write("t.json", &doc);
    let o = run(&["moments", "--params", p.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let vals = json_values(&o);
    let den: f64 = alpha.iter().zip(&beta).map(|(a, b)| a / b).sum();
    for i in 0..3 {
        let v = &vals[i];
        assert_eq!(v["quantity"], "mean");
        assert_eq!(v["method"], "closed");
        let want = alpha[i] / beta[i] / den;
        assert!((v["value"].as_f64().unwrap() - want).abs() < 1e-13);
    }
    let cov = vals.iter().find(|v| v["quantity"] == "cov").unwrap();
    assert_eq!(cov["method"], "integral1d+closed");
}

#[test]
fn moments_route_errors_and_fallback() {
    let f = Files::new();
    let p = f.write("g.json", r#"{"family":"g4b","alpha":[1.3,2.2],"kappa":6.5,"lambda":0.3}"#);
    assert_eq!(run(&["moments", "--params", p.to_str().unwrap(), "--method", "closed"]).status.code(), Some(2));
    let o = run(&["moments", "--params", p.to_str().unwrap(), "--ell", "1,0"]);
    assert!(o.status.success());
    let vals = json_values(&o);
    assert_eq!(vals[0]["method"], "quadrature");
    let mc = run(&["moments", "--params", p.to_str().unwrap(), "--ell", "1,0", "--method", "mc", "--count", "50000"]);
    let m = &json_values(&mc)[0];
    let z = (m["value"].as_f64().unwrap() - vals[0]["value"].as_f64().unwrap()).abs() / m["std_error"].as_f64().unwrap();
    assert!(z < 4.0, "z = {z}");
}

#[test]
fn logratio_n0_uncorrelated_and_trigamma() {
    let f = Files::new();
    let p = f.write("s.json", r#"{"family":"schlomilch","alpha":[0.8,1.5,2.5,1.2],"beta":[0.2,0.3,0.4,0.1],"tau":1.4}"#);
    let o = run(&["logratio", "--params", p.to_str().unwrap(), "--pair", "1,2,3,4", "--pair", "1,2,3,2"]);
    assert!(o.status.success());
    let covs: Vec<f64> =
        json_values(&o).iter().filter(|v| v["quantity"] == "cov_log_ratio").map(|v| v["value"].as_f64().unwrap()).collect();
    assert!(covs[0].abs() < 1e-14);
    // psi'(1.5) = pi^2/2 - 4
    let want = (std::f64::consts::PI.powi(2) / 2.0 - 4.0) / 1.4f64.powi(2);
    assert!((covs[1] - want).abs() < 1e-12, "{} vs {want}", covs[1]);
    assert_eq!(run(&["logratio", "--params", p.to_str().unwrap(), "--pair", "1,1,2,3"]).status.code(), Some(2));
}

#[test]
fn poly_flags_standard() {
    let o = run(&["poly", "--x", "1,2,3", "--degree", "2"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["standard"], true);
    assert_eq!(v["values"][0]["value"], 25.0);
    let o = run(&["poly", "--x", "1,2,3", "--alpha", "0.5,1,2", "--degree", "2"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["standard"], false);
    let o = run(&["poly", "--x", "1,2", "--degree", "-1"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["values"][0]["value"], 0.0);
}

#[test]
fn norm_reports_three_methods() {
    let f = Files::new();
    let p = f.write("dm.json", r#"{"family":"dm","alpha":[0.8,1.5,2.5],"gamma":[0.6,0.1,0.3],"n":3}"#);
    let o = run(&["norm", "--params", p.to_str().unwrap()]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let methods: Vec<&str> = v["values"].as_array().unwrap().iter().map(|r| r["method"].as_str().unwrap()).collect();
    for m in ["multinomial", "closed", "quadrature"] {
        assert!(methods.contains(&m), "{methods:?}");
    }
    assert!(v["max_pairwise_rel_deviation"].as_f64().unwrap() < 1e-6);
}

#[test]
fn verify_exit_codes() {
    let ok = run(&["verify", "--suite", "duality", "--output", "json"]);
    assert_eq!(ok.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&ok)).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(run(&["verify", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn verify_reports_refuted_inequalities() {
    let o = run(&["verify", "--suite", "inequalities", "--scale", "0.05", "--output", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let failed: Vec<String> = v["failed"].as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()).collect();
    assert_eq!(failed.len(), 2, "{failed:?}");
    assert!(failed.iter().any(|f| f.contains("h_{-2n}")));
    assert!(failed.iter().any(|f| f.contains("-1 < p < 0")));
}
