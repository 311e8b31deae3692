use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn semiphi(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semiphi"))
        .args(args)
        .current_dir(dir)
        .env_remove("SEMIPHI_TOL")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn json(out: &Output) -> Value {
    ok(out);
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = semiphi(&["gen", "--kind", "phi_map", "--dims", "1,1,1,1", "--seed", "0"], dir.path());
    let b = semiphi(&["gen", "--kind", "phi_map", "--dims", "1,1,1,1", "--seed", "0"], dir.path());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["ground_truth"]["kind"], "phi_map");
}

#[test]
fn check_phi_map_instance() {
    let dir = tempfile::tempdir().unwrap();
    ok(&semiphi(&["gen", "--kind", "phi_map", "--dims", "2,2,2,2", "--seed", "3", "--json-out", "a.json"], dir.path()));
    let r = json(&semiphi(&["check", "a.json"], dir.path()));
    assert_eq!(r["verdict"], "CompletelySemiPhi");
    assert_eq!(r["meta"]["tol"], 1e-9);
    assert_eq!(r["meta"]["max_iter"], 50000);
    assert!(r["iterations"].as_u64().is_some());
}

#[test]
fn check_adversarial_scalar() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gen", "--kind", "adversarial", "--dims", "1,1,1,1", "--scale", "2", "--json-out", "adv.json"];
    ok(&semiphi(&args, dir.path()));
    let r = json(&semiphi(&["check", "adv.json"], dir.path()));
    assert_eq!(r["verdict"], "NotSemiPhi");
    let g = r["gram_min_eig"].as_f64().unwrap();
    assert!((g + 3.0).abs() < 1e-12, "{g}");
    assert!((r["witness_defect"].as_f64().unwrap() - g).abs() < 1e-6);
}

#[test]
fn order_relaxed_on_subordinate_and_parent() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gen", "--kind", "subordinate", "--dims", "2,2,2,2", "--seed", "7", "--json-out", "s.json", "--parent-out", "p.json"];
    ok(&semiphi(&args, dir.path()));
    let r = json(&semiphi(&["order", "--relaxed", "s.json", "p.json"], dir.path()));
    assert_eq!(r["leq"], true);
    let lit = json(&semiphi(&["order", "s.json", "p.json"], dir.path()));
    assert_eq!(lit["leq"], false);
    let rn = json(&semiphi(&["rn", "--relaxed", "s.json", "p.json"], dir.path()));
    assert_eq!(rn["leq"], true);
    assert!(rn["residuals"]["module_map"].as_f64().unwrap() <= 1e-6);
    let parent = json(&semiphi(&["check", "p.json"], dir.path()));
    assert_eq!(parent["verdict"], "CompletelySemiPhi");
}

#[test]
fn pipeline_commands_report() {
    let dir = tempfile::tempdir().unwrap();
    ok(&semiphi(&["gen", "--kind", "phi_map", "--dims", "1,2,2,2", "--seed", "5", "--json-out", "a.json"], dir.path()));
    let d = json(&semiphi(&["dilate", "a.json"], dir.path()));
    assert_eq!(d["minimized"], false);
    assert!(d["residuals"]["module_map"].as_f64().unwrap() <= 1e-7);
    let m = json(&semiphi(&["minimize", "a.json"], dir.path()));
    assert_eq!(m["minimal"], serde_json::json!([true, true]));
    assert!(m["residuals"]["w_coisometry"].as_f64().unwrap() <= 1e-7);
    let e = json(&semiphi(&["equiv", "a.json", "--seed", "9"], dir.path()));
    assert_eq!(e["equivalent"], true);
    let c = json(&semiphi(&["commutant", "a.json"], dir.path()));
    assert_eq!(c["commutant_dim"], c["linking_commutant_dim"]);
    let p = json(&semiphi(&["purity", "a.json"], dir.path()));
    assert!(p["pure"].is_boolean());
}

#[test]
fn dilate_non_semi_phi_is_in_band() {
    let dir = tempfile::tempdir().unwrap();
    ok(&semiphi(&["gen", "--kind", "adversarial", "--dims", "1,1,1,1", "--json-out", "adv.json"], dir.path()));
    let out = semiphi(&["minimize", "adv.json"], dir.path());
    let r = json(&out);
    assert_eq!(r["verdict"], "NotSemiPhi");
    assert!(r["pair"].is_null());
}

#[test]
fn budget_exceedance_is_in_band() {
    let dir = tempfile::tempdir().unwrap();
    ok(&semiphi(&["gen", "--kind", "phi_map", "--dims", "2,2,2,2", "--seed", "1", "--json-out", "a.json"], dir.path()));
    let r = json(&semiphi(&["check", "a.json", "--max-iter", "1"], dir.path()));
    assert_eq!(r["verdict"], "Undecided");
    assert_eq!(r["iterations"], 1);
}

#[test]
fn tolerance_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    ok(&semiphi(&["gen", "--kind", "phi_map", "--dims", "1,1,1,1", "--json-out", "a.json"], dir.path()));
    let out = Command::new(env!("CARGO_BIN_EXE_semiphi"))
        .args(["check", "a.json"])
        .current_dir(dir.path())
        .env("SEMIPHI_TOL", "1e-8")
        .output()
        .unwrap();
    assert_eq!(json(&out)["meta"]["tol"], 1e-8);
    let flag = json(&semiphi(&["check", "a.json", "--tol", "1e-7"], dir.path()));
    assert_eq!(flag["meta"]["tol"], 1e-7);
}

#[test]
fn operational_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\n  \"schema_version\": \"1.0\",\n  \"shape\": [1,\n").unwrap();
    let out = semiphi(&["check", "bad.json"], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json") && err.contains("line"), "{err}");
    let missing = semiphi(&["check", "nope.json"], dir.path());
    assert!(!missing.status.success());
    let dims = semiphi(&["gen", "--kind", "phi_map", "--dims", "3,1,1,2"], dir.path());
    assert!(!dims.status.success());
    let parent = semiphi(&["gen", "--kind", "phi_map", "--dims", "1,1,1,1", "--parent-out", "p.json"], dir.path());
    assert!(!parent.status.success());
}

#[test]
fn report_keys_are_stable() {
    let dir = tempfile::tempdir().unwrap();
    ok(&semiphi(&["gen", "--kind", "phi_map", "--dims", "1,1,1,1", "--json-out", "a.json"], dir.path()));
    let a = semiphi(&["check", "a.json"], dir.path());
    let b = semiphi(&["check", "a.json"], dir.path());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let keys: Vec<usize> = ["\"verdict\"", "\"gram_min_eig\"", "\"dims\"", "\"iterations\"", "\"meta\""]
        .iter()
        .map(|k| text.find(k).unwrap())
        .collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]));
}
