use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn yule(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_yule"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    let s: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&s).expect("schema compiles")
}

fn assert_valid(schema_name: &str, doc: &Value) {
    let v = schema(schema_name);
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:?}\n{doc:#}");
}

fn json_out(args: &[&str]) -> Value {
    let o = yule(args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn moments_csv_layout() {
    let o = yule(&["moments", "--process", "bm", "--orders", "2,3"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,value,err_estimate,route");
    assert!(lines[1].starts_with("2,0.240523,"), "{}", lines[1]);
    assert!(lines[2].starts_with("3,0.000000,"), "{}", lines[2]);
    assert!(!text.contains('\r'));
    let err_field = lines[1].split(',').nth(2).unwrap();
    assert!(err_field.contains('e'), "error estimates are scientific: {err_field}");
}

#[test]
fn cbm_moments_default_orders() {
    let o = yule(&["moments", "--process", "cbm", "--c", "0.9"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let vals: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!((vals[0] - 0.87151).abs() < 1e-4);
    assert!((vals[1] - 0.78298).abs() < 1e-4);
}

#[test]
fn json_outputs_match_schemas() {
    assert_valid(
        "moments.schema.json",
        &json_out(&["moments", "--process", "ou", "--r", "2", "--orders", "2", "--format", "json"]),
    );
    assert_valid(
        "density.schema.json",
        &json_out(&["density", "--process", "bb", "--order", "4", "--points", "11", "--format", "json"]),
    );
    assert_valid(
        "simulate.schema.json",
        &json_out(&["simulate", "--process", "cbm", "--c", "-0.4", "--paths", "500", "--steps", "64", "--orders", "1,2", "--format", "json"]),
    );
    assert_valid("verify.schema.json", &json_out(&["verify", "--process", "bm", "--format", "json"]));
    assert_valid(
        "clt.schema.json",
        &json_out(&["clt", "--r", "1", "--T", "2,4", "--paths", "300", "--steps", "64", "--format", "json"]),
    );
}

#[test]
fn density_order_zero_is_uniform() {
    let o = yule(&["density", "--process", "bm", "--order", "0", "--points", "3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "x,pdf\n-1.000000,0.500000\n0.000000,0.500000\n1.000000,0.500000\n");
}

#[test]
fn density_fourth_order_coefficients() {
    let doc = json_out(&["density", "--process", "bm", "--order", "4", "--format", "json"]);
    let c: Vec<f64> = doc["coefficients"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    for (got, want) in [(c[0], 0.59081), (c[2], 0.31001), (c[4], -0.97075)] {
        assert!((got - want).abs() < 2e-4, "{got} vs {want}");
    }
    assert!(c[1].abs() < 1e-12 && c[3].abs() < 1e-12);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["moments", "--process", "ou"][..],
        &["moments", "--process", "bm", "--r", "1"],
        &["moments", "--process", "cbm", "--c", "1.0"],
        &["moments", "--orders", "17"],
        &["moments", "--orders", "0"],
        &["moments", "--process", "bb", "--T", "2"],
        &["density", "--process", "bm", "--order", "3"],
        &["density", "--order", "18"],
        &["clt", "--r", "0"],
        &["clt", "--r", "-1"],
        &["clt", "--r", "1", "--T", "50,10"],
        &["simulate", "--paths", "0"],
        &["frobnicate"],
    ] {
        let o = yule(args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn invalid_thread_cap_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_yule"))
        .args(["moments", "--orders", "2"])
        .env("VC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn quadrature_non_convergence_exits_3_and_names_the_level() {
    let o = yule(&["moments", "--orders", "2", "--tol", "1e-300", "--max-level", "4"]);
    assert_eq!(code(&o), 3);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("order 2") && err.contains("level 4"), "{err}");
}

#[test]
fn verify_passes_and_coarse_oracle_exits_4() {
    for args in [&["verify", "--process", "bm"][..], &["verify", "--process", "ou", "--r", "2"], &["verify", "--process", "bb"]] {
        assert_eq!(code(&yule(args)), 0, "{args:?}");
    }
    let o = yule(&["verify", "--process", "bm", "--steps", "10"]);
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).contains(",false"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("(s11, s12, s22)"));
}

#[test]
fn simulation_is_deterministic_across_runs_and_thread_counts() {
    let args = ["simulate", "--process", "bb", "--paths", "3000", "--steps", "128", "--orders", "2,4", "--seed", "42"];
    let a = yule(&args);
    let b = yule(&args);
    let c = Command::new(env!("CARGO_BIN_EXE_yule"))
        .args(args)
        .env("VC_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let d = yule(&["simulate", "--process", "bb", "--paths", "3000", "--steps", "128", "--orders", "2,4", "--seed", "43"]);
    assert_ne!(a.stdout, d.stdout);
}

#[test]
fn uncorrelated_cbm_simulates_like_bm() {
    let common = ["--paths", "4000", "--steps", "256", "--orders", "2", "--seed", "5"];
    let bm = yule(&[&["simulate", "--process", "bm"][..], &common].concat());
    let cbm = yule(&[&["simulate", "--process", "cbm", "--c", "0"][..], &common].concat());
    // with c = 0 the second component is built from the same normals
    assert_eq!(bm.stdout, cbm.stdout);
}

#[test]
fn out_writes_sidecars_and_rerun_reproduces_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bb.csv");
    let o = yule(&[
        "simulate", "--process", "bb", "--paths", "2000", "--steps", "64", "--seed", "9", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let first = std::fs::read(&out).unwrap();
    let manifest_path = dir.path().join("bb.csv.manifest.json");
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_valid("manifest.schema.json", &manifest);
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["routes"][0], "monte_carlo");

    std::fs::remove_file(&out).unwrap();
    let o = yule(&["rerun", manifest_path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(&out).unwrap(), first);
}

#[test]
fn density_out_writes_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f4.csv");
    let o = yule(&["density", "--order", "4", "--points", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("x,pdf\n"));
    let coeffs: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("f4.csv.coeffs.json")).unwrap()).unwrap();
    assert_eq!(coeffs["coefficients"].as_array().unwrap().len(), 5);
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("f4.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["outputs"][1], "f4.csv.coeffs.json");
}

#[test]
fn help_documents_the_formulas() {
    let moments = stdout(&yule(&["moments", "--help"]));
    assert!(moments.contains("Γ(k/2)²") && moments.contains("c_k(u², v²)"));
    let verify = stdout(&yule(&["verify", "--help"]));
    assert!(verify.contains("V' = VΣV − (VB + BᵀV) − Q"));
    let density = stdout(&yule(&["density", "--help"]));
    assert!(density.contains("(2n + 1)/2"));
    let clt = stdout(&yule(&["clt", "--help"]));
    assert!(clt.contains("N(0, 1/(2r))"));
    for text in [&moments, &verify, &density, &clt] {
        let lower = text.to_lowercase();
        assert!(!lower.contains("eq.") && !lower.contains("equation") && !lower.contains("theorem"));
    }
}
