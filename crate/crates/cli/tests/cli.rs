use std::path::PathBuf;
use std::process::{Command, Output};

use d4cli::table::read_records;

fn d4(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_d4")).args(args).output().expect("run d4")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("d4cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn census_contains_x4_minus_2() {
    let out = d4(&["census", "--max-conductor", "256"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("P,Q,disc_L,d,q,cond_signed,cond_abs,r2,J_odd,ram_splitting\n"));
    assert!(text.lines().any(|l| l == "0,-2,-2048,8,-32,-256,256,1,1,2:1-4/1-2"));
}

#[test]
fn census_is_deterministic_and_thread_independent() {
    let a = d4(&["census", "--max-conductor", "3000"]).stdout;
    let b = d4(&["--threads", "1", "census", "--max-conductor", "3000"]).stdout;
    let c = d4(&["--threads", "3", "census", "--max-conductor", "3000"]).stdout;
    assert_eq!(a, b);
    assert_eq!(a, c);
    let recs = read_records(a.as_slice()).unwrap();
    assert!(recs.len() > 1000);
}

#[test]
fn census_with_spec_file() {
    let spec = tmp("spec.json");
    std::fs::write(&spec, r#"{"infinity": ["112/11", "22/2"], "default": "no-central-inertia"}"#).unwrap();
    let out = tmp("b.csv");
    let st = d4(&["census", "--max-conductor", "39", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(st.status.success());
    let recs = read_records(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(recs.len(), 2);
    std::fs::write(&spec, r#"{"default": "sometimes"}"#).unwrap();
    assert_eq!(d4(&["census", "--max-conductor", "39", "--spec", spec.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn constants_table() {
    let out = d4(&["constants"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("121/136"));
    assert!(text.lines().any(|l| l.starts_with("euler_Conductor,")));
}

#[test]
fn classgroups_with_cache() {
    let dir = tmp("cache");
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_d4"))
            .args(["classgroups", "--max-disc", "400", "--variant", "b"])
            .env("D4_CACHE_DIR", &dir)
            .output()
            .unwrap()
    };
    let first = run();
    assert!(first.status.success());
    assert!(dir.join("classgroups.bin").exists());
    let second = run();
    assert_eq!(first.stdout, second.stdout);
    let v: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(v["equal"], true);
    assert_eq!(v["class_group_side"], v["field_count"]);
}

#[test]
fn exit_codes() {
    assert_eq!(d4(&["census"]).status.code(), Some(2));
    assert_eq!(d4(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(d4(&["classgroups", "--max-disc", "10", "--variant", "z"]).status.code(), Some(2));
    assert_eq!(d4(&["census", "--max-conductor", "2000000"]).status.code(), Some(2));
    let report = tmp("report.json");
    let out = d4(&["verify", "constants", "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(v.as_array().unwrap().iter().all(|r| r["report"]["status"] != "FAIL"));
}

#[test]
fn orbits_and_densities() {
    let out = d4(&["orbits", "--max-q", "40", "--max-d", "20"]);
    assert!(out.status.success());
    assert!(!read_records(out.stdout.as_slice()).unwrap().is_empty());
    let out = d4(&["densities", "--p", "3"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("1111/11,324,324"));
    assert_eq!(d4(&["densities", "--p", "11"]).status.code(), Some(2));
    let out = d4(&["lvalues", "--max-disc", "50"]);
    assert!(String::from_utf8(out.stdout).unwrap().lines().any(|l| l.starts_with("-39,4,")));
}
