use std::f64::consts::{E, PI};
use std::process::{Command, Output};

use locentropy::bounds::BoundReport;
use locentropy::cli::{round_sig, BOUNDS_COLUMNS};
use locentropy::prolate::solve_concentration;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_locentropy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn field(text: &str, name: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(name))
        .unwrap_or_else(|| panic!("no {name} in {text}"))
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn eig_prints_lambda0_with_twelve_digits() {
    let out = run(&["eig", "--gamma", "1", "--nodes", "64"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lambda0 = field(&text, "lambda0");
    let expected = solve_concentration(1.0, 64).unwrap().lambda0;
    assert_eq!(lambda0, round_sig(expected));
    let mantissa = text.lines().find(|l| l.starts_with("lambda0")).unwrap();
    assert!(mantissa.contains("1.58056727448e-1"), "{mantissa}");
    assert!(field(&text, "convergence_delta") < 1e-12);
}

#[test]
fn eig_rejects_negative_gamma() {
    let out = run(&["eig", "--gamma", "-1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("positive"));
}

#[test]
fn eig_reports_small_gamma_asymptote() {
    let out = run(&["eig", "--gamma", "0.01"]);
    assert!(out.status.success());
    let ratio = field(&stdout(&out), "asymptote_ratio");
    assert!((ratio - 1.0).abs() < 0.01, "{ratio}");
}

#[test]
fn eig_json_has_schema_version() {
    let out = run(&["eig", "--gamma", "2", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["converged"], true);
    assert!(v["spectrum_head"].as_array().unwrap().len() > 1);
}

#[test]
fn bounds_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bounds.csv");
    let gammas = [0.3, 1.0, 2.0 * PI, 12.0];
    let list = gammas.map(|g| format!("{g:.17}")).join(",");
    let out = run(&["bounds", "--gamma", &list, "--alpha", "1,2,3", "-o", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let mut reader = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(header, BOUNDS_COLUMNS);
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), gammas.len() * 3);
    let mut i = 0;
    for gamma in gammas {
        for alpha in [1.0, 2.0, 3.0] {
            let r = BoundReport::compute(gamma, alpha, 64).unwrap();
            let rec = &records[i];
            i += 1;
            let num = |j: usize| rec[j].parse::<f64>().unwrap();
            let expected = [
                r.gamma,
                r.alpha,
                r.beta,
                r.lambda0,
                r.c_max,
                r.bound_mu,
                r.bound_deutsch,
                r.bound_beckner_raw,
            ];
            for (j, e) in expected.iter().enumerate() {
                assert_eq!(num(j), round_sig(*e), "column {}", BOUNDS_COLUMNS[j]);
            }
            assert_eq!(rec[8].parse::<bool>().unwrap(), r.beckner_valid);
            assert_eq!(num(9), round_sig(r.best_ab));
            assert_eq!(num(10), round_sig(r.best_qp));
        }
    }
}

#[test]
fn bounds_json_follows_schema() {
    let out = run(&["bounds", "--gamma-min", "0.5", "--gamma-max", "15", "--gamma-steps", "9", "--format", "json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["schema_version"], 1);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 18);
    for row in rows {
        let obj = row.as_object().unwrap();
        for key in BOUNDS_COLUMNS {
            assert!(obj.contains_key(key), "missing {key}");
        }
        assert!(obj.contains_key("bound_beckner_raw"));
        let valid = obj["beckner_valid"].as_bool().unwrap();
        assert_eq!(obj["bound_beckner"].is_null(), !valid);
        for key in ["gamma", "alpha", "beta", "lambda0", "c_max", "bound_mu", "bound_deutsch", "best_ab", "best_qp"] {
            assert!(obj[key].is_f64(), "{key} not a number");
        }
    }
    let crossovers = v["crossovers"].as_array().unwrap();
    assert_eq!(crossovers.len(), 4);
    for c in crossovers {
        let g = c["gamma"].as_f64().unwrap();
        assert!(g > 0.5 && g < 15.0);
        assert!((c["beckner"].as_f64().unwrap() - c["concentration"].as_f64().unwrap()).abs() < 1e-5);
    }
}

#[test]
fn bounds_at_shannon_threshold() {
    let at = format!("{:.17}", E * PI);
    let out = run(&["bounds", "--gamma", &format!("{at},9"), "--alpha", "1"]);
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0][7].parse::<f64>().unwrap().abs(), 0.0);
    assert_eq!(rows[0][8], "false");
    assert!(rows[1][7].parse::<f64>().unwrap() < 0.0);
    assert_eq!(rows[1][8], "false");
}

#[test]
fn unwritable_output_fails() {
    let out = run(&["bounds", "--gamma", "1", "-o", "/nonexistent-dir/bounds.csv"]);
    assert!(!out.status.success());
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["bounds", "--gamma-steps", "7", "--format", "json"][..],
        &["verify", "--state", "random", "--seed", "3", "--with-ab"][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn verify_default_gaussian_passes() {
    let out = run(&["verify"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["schema_version"], 1);
    let case = &v["case"];
    assert_eq!(case["passed"], true);
    assert!(case["refined"].is_null());
    for check in case["checks"].as_array().unwrap() {
        assert!(check["slack"].as_f64().unwrap() >= 0.0, "{check}");
    }
}

#[test]
fn verify_with_ab_reports_refined_entropies() {
    let out = run(&["verify", "--with-ab", "--gamma", "6.283185307179586"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let refined = &v["case"]["refined"];
    for key in ["entropy_a", "entropy_b", "captured_a", "captured_b"] {
        assert!(refined[key].is_f64(), "{key}");
    }
    assert!(refined["captured_a"].as_f64().unwrap() >= 0.999);
    let ab = v["case"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["family"] == "ab")
        .count();
    assert!(ab >= 3);
}

#[test]
fn injected_point_masses_fail() {
    let out = run(&["verify", "--inject-point-masses", "--format", "csv"]);
    assert!(!out.status.success());
    let text = stdout(&out);
    assert!(text.lines().skip(1).any(|l| l.contains(",-") && l.ends_with("true")));
}

#[test]
fn truncated_basis_is_unreliable() {
    let out = run(&["verify", "--with-ab", "--basis", "fourier", "--basis-size", "1", "--center", "0.3"]);
    assert!(!out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["case"]["reliable"], false);
}

#[test]
fn invalid_state_parameters_are_usage_errors() {
    assert!(!run(&["verify", "--width", "0"]).status.success());
    assert!(!run(&["verify", "--alpha", "0.7"]).status.success());
    assert!(!run(&["verify", "--delta-x", "1"]).status.success());
}

#[test]
fn help_describes_every_column() {
    let out = run(&["bounds", "--help"]);
    let text = stdout(&out);
    for column in BOUNDS_COLUMNS {
        assert!(text.contains(column), "{column} missing from help");
    }
    for cmd in ["eig", "verify", "scan"] {
        assert!(run(&[cmd, "--help"]).status.success());
    }
}

#[test]
fn scan_reports_gap() {
    let out = run(&["scan", "--gamma", "1", "--steps", "4"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let scan = &v["scan"];
    assert_eq!(scan["rows"].as_array().unwrap().len(), 9);
    assert!(scan["gap"].as_f64().unwrap() >= 0.0);
    assert_eq!(scan["argmin_width"].as_f64().unwrap(), 1.0);
}
