use std::process::Command;

use gbq_cli::{emit, parse_args, Opts};
use gbq_core::rigidity::RigidityReport;

fn gbq(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_gbq")).args(args).output().expect("binary runs")
}

#[test]
fn identity_suite_example() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = gbq(&["verify", "--suite", "identities", "--dim", "4", "--k", "2", "--seed", "1", "--report", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    let trace = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "identities.trace_identity").unwrap();
    assert!(trace["value"].as_f64().unwrap() <= 1e-12);
    assert_eq!(v["params"]["suite"], "identities");
    assert!(v["golden_refs"].is_object());
}

#[test]
fn slice_example_reports_quotient_two() {
    let out = gbq(&["slice", "--preset", "euclid", "--n", "5", "--r0", "1", "--k", "1"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let q = &v["slice"]["analysis"]["quotient"];
    for key in ["min", "max", "mean"] {
        assert!((q[key].as_f64().unwrap() - 2.0).abs() <= 1e-9);
    }
}

#[test]
fn kottler_example_has_unit_defect() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("profile.csv");
    let out = gbq(&["kottler", "--n", "3", "--kappa", "-1", "--mass", "0", "--check-logconvex", "--dump", dump.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["kottler"]["min_defect"].as_f64().unwrap() - 1.0).abs() <= 1e-8);
    assert!((v["kottler"]["max_defect"].as_f64().unwrap() - 1.0).abs() <= 1e-8);
    let text = std::fs::read_to_string(&dump).unwrap();
    assert!(text.starts_with("r,lambda,dlambda,ddlambda,defect,closed_form,residual"));
}

#[test]
fn failing_check_sets_exit_status_and_names_it() {
    let out = gbq(&["kottler", "--n", "3", "--kappa", "1", "--mass", "0.5", "--check-logconvex"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kottler.min_defect"));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["all_pass"], false);
}

#[test]
fn usage_and_parameter_errors() {
    assert_eq!(gbq(&["verify", "--suite", "bogus"]).status.code(), Some(2));
    assert_eq!(gbq(&["slice", "--preset", "nowhere"]).status.code(), Some(2));
    assert_eq!(gbq(&["slice", "--n", "4", "--k", "2"]).status.code(), Some(2));
    let flat = gbq(&["slice", "--preset", "hyperbolic-horo", "--n", "4", "--k", "1"]);
    assert_eq!(flat.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&flat.stderr).contains("vanishes"));
}

#[test]
fn reports_are_byte_reproducible_and_csv_matches_json() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str, threads: &str| {
        let json = dir.path().join(format!("{tag}.json"));
        let csv = dir.path().join(format!("{tag}.csv"));
        let out = Command::new(env!("CARGO_BIN_EXE_gbq"))
            .env("GBQ_THREADS", threads)
            .args(["perturb", "--grid", "8", "--eps", "0.01,0.02", "--report", json.to_str().unwrap(), "--csv", csv.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(out.status.success());
        (std::fs::read(json).unwrap(), std::fs::read_to_string(csv).unwrap())
    };
    let (a_json, a_csv) = run("a", "1");
    let (b_json, b_csv) = run("b", "4");
    assert_eq!(a_json, b_json);
    assert_eq!(a_csv, b_csv);
    let v: serde_json::Value = serde_json::from_slice(&a_json).unwrap();
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    let csv_names: Vec<&str> = a_csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, csv_names);
    assert_eq!(a_csv.lines().next(), Some("name,value,tolerance,pass"));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("slice.cfg");
    std::fs::write(&cfg, "# sphere slice\npreset = euclid\nn = 5\nr0 = 2\nk = 1\ngrid = 4\n").unwrap();
    let out = gbq(&["slice", "--config", cfg.to_str().unwrap(), "--r0", "1"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["params"]["grid"], 4);
    assert!((v["params"]["r0"].as_f64().unwrap() - 1.0).abs() < 1e-15);
    assert!((v["slice"]["closed_form"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn empty_report_is_valid() {
    let dir = tempfile::tempdir().unwrap();
    let opts = Opts {
        report: Some(dir.path().join("e.json")),
        csv: Some(dir.path().join("e.csv")),
        ..Opts::default()
    };
    let report = RigidityReport::new();
    assert!(report.all_pass());
    emit(&report, &opts).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("e.json")).unwrap()).unwrap();
    assert_eq!(v["checks"], serde_json::json!([]));
    assert_eq!(std::fs::read_to_string(dir.path().join("e.csv")).unwrap(), "name,value,tolerance,pass\n");
    assert!(parse_args(vec!["gbq".into(), "verify".into()]).is_ok());
}
