use schlomilch::verify::{run_suite, VerifyConfig, SUITES};

#[test]
fn suites_pass_at_reduced_scale() {
    let cfg = VerifyConfig { scale: 0.05, seed: 11, tol: None };
    for &name in SUITES.iter().filter(|&&s| s != "inequalities") {
        let r = run_suite(name, &cfg).unwrap();
        for c in &r.checks {
            assert!(c.passed, "{c}");
        }
    }
}

#[test]
fn tolerance_override_tightens_identities() {
    let cfg = VerifyConfig { scale: 0.2, seed: 0, tol: Some(1e-30) };
    let r = run_suite("g4b", &cfg).unwrap();
    assert!(!r.checks[0].passed);
    assert!(run_suite("nope", &cfg).is_err());
}
