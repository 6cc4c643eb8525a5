use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_piwitt")).args(args).env_remove("PIWITT_PRECISION").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn witt_polys_emit_the_first_sum_component() {
    let out = run(&["witt-polys", "--q", "2", "--pi", "2", "--len", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["command"], "witt-polys");
    let texts: Vec<&str> = doc["result"]["sets"][0]["polys"].as_array().unwrap().iter().map(|p| p["text"].as_str().unwrap()).collect();
    assert_eq!(texts[1], "-a0*b0 + a1 + b1");
}

#[test]
fn tower_build_round_trips_through_check() {
    let dir = std::env::temp_dir().join(format!("piwitt-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let built = run(&["tower", "build", "--preset", "kummer", "--p", "2", "--depth", "2"]);
    assert_eq!(built.status.code(), Some(0));
    let doc = json(&built);
    assert_eq!(doc["result"]["eisenstein"], true);
    let path = dir.join("tower.json");
    std::fs::write(&path, doc["result"]["tower"].to_string()).unwrap();
    let checked = run(&["tower", "check", "--input", path.to_str().unwrap()]);
    assert_eq!(checked.status.code(), Some(0));
    assert_eq!(json(&checked)["result"]["norm_compatibility"]["all_pass"], true);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn lift_uniformizer_reports_probes() {
    let doc = json(&run(&["lift-uniformizer", "--preset", "cyclotomic", "--p", "3", "--depth", "2"]));
    assert_eq!(doc["result"]["shift"], 0);
    assert_eq!(doc["result"]["insep_degree"], 1);
}

#[test]
fn herbrand_writes_csv() {
    let path = std::env::temp_dir().join(format!("piwitt-psi-{}.csv", std::process::id()));
    let out = run(&["herbrand", "--preset", "kummer", "--p", "2", "--csv", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("x,psi\n0.000000,0.000000\n"));
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn theta_maps_agree() {
    let out = run(&["theta", "--preset", "kummer", "--p", "3", "--seed", "9", "--samples", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["all_equal"], true);
}

#[test]
fn suite_is_byte_identical_across_runs() {
    let a = run(&["suite", "--seed", "42", "--quick"]);
    let b = run(&["suite", "--seed", "42", "--quick"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["seed"], 42);
}

#[test]
fn input_errors_exit_with_two() {
    let out = run(&["--precision", "1", "tower", "build"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "PrecisionTooSmall");
    let bad = run(&["witt-polys", "--q", "2", "--pi", "2", "--pi-poly=-4,0,1", "--len", "2"]);
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(json(&bad)["error"]["kind"], "NotEisenstein");
}

#[test]
fn precision_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_piwitt")).args(["tower", "build"]).env("PIWITT_PRECISION", "9").output().unwrap();
    assert_eq!(json(&out)["precision"], 9);
}
