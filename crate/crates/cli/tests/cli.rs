use std::path::Path;
use std::process::{Command, Output};

use cubitab::enumerate::{count, Sign};
use cubitab::progression::ProgressionCertificate;
use serde_json::Value;

fn cubitab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubitab"))
        .args(args)
        .env_remove("CUBITAB_CACHE")
        .output()
        .expect("binary runs")
}

fn cubitab_cached(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubitab"))
        .args(args)
        .env("CUBITAB_CACHE", dir)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn classify_minus_108() {
    let v = json(&cubitab(&["classify", "--delta", "-108"]));
    assert_eq!(v["d"], -3);
    assert_eq!(v["f"], 2);
    assert_eq!(v["w"], 1);
    assert_eq!(v["admissible"], true);
}

#[test]
fn classify_with_fields() {
    let v = json(&cubitab(&["classify", "--delta", "-3299", "--fields"]));
    assert_eq!(v["fields"].as_array().unwrap().len(), 4);
}

#[test]
fn zero_density() {
    let v = json(&cubitab(&["density", "--m", "343", "--a", "147"]));
    assert_eq!(v["value"], "0");
    assert_eq!(v["kind"], "exact");
    assert_eq!(v["zero"], true);
}

#[test]
fn coprime_density_fraction() {
    let v = json(&cubitab(&["density", "--m", "5", "--a", "1", "--epsilon", "1/3"]));
    assert_eq!(v["value"], "25/124");
    assert_eq!(v["decimal"], "2.016129032e-1");
    assert_eq!(v["lemma_bound"], "2/15");
}

#[test]
fn setting_certificate_round_trips() {
    let out = cubitab(&["setting", "--epsilon", "1/3", "--k", "1", "--H", "1", "--strengthen"]);
    let v = json(&out);
    assert_eq!(v["a"], 221046004i64);
    assert_eq!(v["m"], 5i64 * 61i64.pow(3) * 109i64.pow(3));
    let cert: ProgressionCertificate = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(serde_json::to_value(&cert).unwrap(), v);
}

#[test]
fn setting_with_checks() {
    let v = json(&cubitab(&["setting", "--epsilon", "1/3", "--k", "1", "--H", "1", "--check"]));
    assert_eq!(v["certificate"]["strengthened_qr"], false);
    assert_eq!(v["density"]["passed"], false);
    let vanishing = &v["density"]["classes"][0]["vanishing"][0];
    assert_eq!(vanishing["prime"], 13);
    assert_eq!(vanishing["kronecker"], -1);
}

#[test]
fn exit_codes() {
    assert_eq!(cubitab(&["density", "--m", "12", "--a", "1"]).status.code(), Some(1));
    assert_eq!(cubitab(&["genus", "--delta", "0"]).status.code(), Some(1));
    assert_eq!(cubitab(&["count", "--sign", "+", "--X", "ten"]).status.code(), Some(2));
    assert_eq!(cubitab(&["count", "--sign", "+", "--X", "10", "--bogus"]).status.code(), Some(2));
    assert_eq!(cubitab(&["cache-info"]).status.code(), Some(2));
    let out = cubitab(&["density", "--m", "35", "--a", "1", "--epsilon", "1/6"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("precondition"));
}

#[test]
fn counts_match_library() {
    let v = json(&cubitab(&["count", "--sign", "-", "--X", "3300"]));
    assert_eq!(v["count"], count(Sign::Negative, 3300).unwrap());
    let v = json(&cubitab(&["count", "--sign=+", "--X", "10000", "--m", "5", "--a", "1"]));
    assert!(v["main_term"].as_f64().unwrap() > 0.0);
}

#[test]
fn cache_agrees_with_fresh_enumeration() {
    let dir = tempfile::tempdir().unwrap();
    for x in ["20000", "100000", "50000"] {
        for sign in ["+", "-"] {
            let cached = json(&cubitab_cached(dir.path(), &["count", "--sign", sign, "--X", x]));
            let fresh = json(&cubitab(&["count", "--sign", sign, "--X", x]));
            assert_eq!(cached["count"], fresh["count"], "sign {sign} X {x}");
        }
    }
    let info = json(&cubitab_cached(dir.path(), &["cache-info"]));
    assert!(info["entries"].as_array().unwrap().len() >= 2);
}

#[test]
fn enumerate_output_is_worker_independent_and_reparses() {
    let one = cubitab(&["enumerate", "--sign", "-", "--X", "20000", "--workers", "1"]);
    let three = cubitab(&["enumerate", "--sign", "-", "--X", "20000", "--workers", "3"]);
    assert!(one.status.success());
    assert_eq!(one.stdout, three.stdout);
    let records = cubitab::table::read_jsonl(&one.stdout[..]).unwrap();
    assert_eq!(records.len() as u64, count(Sign::Negative, 20001).unwrap());
}

#[test]
fn verify_import_roundtrip_and_tamper() {
    let dir = tempfile::tempdir().unwrap();
    let out = cubitab(&["enumerate", "--sign", "+", "--X", "5000", "--format", "csv"]);
    let good = dir.path().join("ref.csv");
    std::fs::write(&good, &out.stdout).unwrap();
    let v = json(&cubitab(&["verify-import", "--file", good.to_str().unwrap(), "--sign", "+", "--X", "5000"]));
    assert_eq!(v["agree"], true);

    let text = String::from_utf8(out.stdout).unwrap();
    let tampered: String = text.lines().filter(|l| !l.starts_with("229,")).map(|l| format!("{l}\n")).collect();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, tampered).unwrap();
    let out = cubitab(&["verify-import", "--file", bad.to_str().unwrap(), "--sign", "+", "--X", "5000"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["extra"][0], 229);
}

#[test]
fn maier_toy_and_pipeline() {
    let v = json(&cubitab(&["maier", "--rows", "2000", "--delta", "1/15"]));
    let sums: u64 = v["column_sums"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).sum();
    assert_eq!(sums, v["total_fields"].as_u64().unwrap());
    assert_eq!(v["G"].as_u64().unwrap() as usize, v["good_rows"].as_array().unwrap().len());

    let dir = tempfile::tempdir().unwrap();
    let cert = cubitab(&["setting", "--epsilon", "1/3", "--k", "1", "--H", "1", "--strengthen"]);
    let path = dir.path().join("cert.json");
    std::fs::write(&path, &cert.stdout).unwrap();
    let v = json(&cubitab(&["maier", "--certificate", path.to_str().unwrap(), "--rows", "1"]));
    assert_eq!(v["violations"], 0);
    assert_eq!(v["checks"][0]["disc"], 221046005i64);
}

#[test]
fn maier_capacity_message() {
    let out = cubitab(&["maier", "--m", "100000000000", "--rows", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("toy mode"));
}
