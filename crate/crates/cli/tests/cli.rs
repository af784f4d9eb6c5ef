use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "fixtures", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn gkz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gkz")).args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn pairing_matrix_of_key_example() {
    let out = gkz(&["pairing-matrix", "--input", &fixture("keyexample.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["matrix"], serde_json::json!([[1, 0, 0], [1, 1, 0], [2, 1, 1]]));
    assert_eq!(r["determinant"], "1");
}

#[test]
fn explicit_bases_with_one_based_simplices() {
    let out = gkz(&[
        "pairing-matrix",
        "--input",
        &fixture("keyexample-coarse.json"),
        "--evaluator",
        "hrr",
        "--k-basis",
        "[[0,0,0],[0,0,1],[0,0,2]]",
        "--kc-basis",
        r#"[{"alpha":[0,0,0],"simplex":[1,3]},{"alpha":[0,0,1],"simplex":[1,3]},{"alpha":[0,0,2],"simplex":[1,3]}]"#,
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        report(&out)["matrix"],
        serde_json::json!([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    );
}

#[test]
fn chi_values() {
    for (k, expected) in [(0, "1"), (3, "2"), (4, "3")] {
        let alpha = format!("0,0,{k}");
        let out = gkz(&[
            "chi",
            "--input",
            &fixture("keyexample.json"),
            "--alpha",
            &alpha,
            "--simplex",
            "2",
        ]);
        assert_eq!(report(&out)["chi"], expected);
    }
}

#[test]
fn verify_hrr_passes() {
    let out = gkz(&["verify", "hrr", "--input", &fixture("keyexample.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["checks"][0]["status"], "pass");
    assert_eq!(r["checks"][0]["detail"]["character"], r["checks"][0]["detail"]["hrr"]);
}

#[test]
fn gamma_coefficients() {
    let out = gkz(&[
        "gamma",
        "--c",
        "0,0",
        "--input",
        &fixture("keyexample.json"),
        "--truncation",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let terms = r["terms"].as_array().unwrap();
    let d3 = |l: [&str; 3]| -> f64 {
        let t = terms
            .iter()
            .find(|t| t["sector"] == serde_json::json!([0, 0]) && t["l"] == serde_json::json!(l))
            .unwrap();
        t["coefficients"]["D3"][1].as_f64().unwrap()
    };
    // coefficient times 2πi
    let two_pi = 2.0 * std::f64::consts::PI;
    assert!((-d3(["2", "-3", "1"]) * two_pi - -3.0).abs() < 1e-12);
    assert!((-d3(["4", "-6", "2"]) * two_pi - 7.5).abs() < 1e-12);
}

#[test]
fn pairing_check_with_wrong_scale_fails_with_code_two() {
    let args = [
        "verify",
        "pairing",
        "--input",
        &fixture("keyexample.json"),
        "--table",
        &fixture("explicit-pairing.json"),
        "--truncation",
        "24",
        "--format",
        "text",
    ];
    let good = gkz(&[&args[..], &["--scale=-0.0759908389336870"]].concat());
    assert_eq!(good.status.code(), Some(0), "{}", String::from_utf8_lossy(&good.stdout));
    let bad = gkz(&[&args[..], &["--scale", "1"]].concat());
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&bad.stdout).trim(), "FAIL pairing");
}

#[test]
fn input_errors_exit_with_one() {
    let key = fixture("keyexample.json");
    for args in [
        vec!["sectors", "--input", "/nonexistent.json"],
        vec!["chi", "--input", &key, "--alpha", "0,0", "--simplex", "2"],
        vec!["chi", "--input", &key, "--alpha", "0,0,0", "--simplex", "1"],
        vec!["gamma", "--input", &key, "--c", "0,0", "--tolerance", "-1"],
        vec!["gamma", "--input", &key, "--c", "0,0", "--log-x", "0,0;1"],
        vec!["verify", "bogus", "--input", &key],
    ] {
        let out = gkz(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn reports_are_deterministic() {
    let args = [
        "gamma",
        "--c",
        "1,1",
        "--compact",
        "--input",
        &fixture("keyexample.json"),
    ];
    assert_eq!(gkz(&args).stdout, gkz(&args).stdout);
    let args = ["sectors", "--input", &fixture("keyexample-coarse.json"), "--jobs", "2"];
    assert_eq!(gkz(&args).stdout, gkz(&args).stdout);
}
