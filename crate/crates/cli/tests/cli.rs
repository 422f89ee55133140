use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_wildsets"));
    c.env_remove("WILDSETS_DEGREE_CAP");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("wildsets-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn hilbert_tame_symbol() {
    let o = run(&["hilbert", "--q", "5", "--a", "t", "--b", "2", "--place", "t"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "-1");
}

#[test]
fn ranks_of_even_degree_place() {
    let o = run(&["ranks", "--q", "5", "--places", "t^2+2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!((v["sing"].as_u64(), v["delta"].as_u64(), v["g"].as_u64(), v["pic"].as_u64()), (Some(2), Some(1), Some(0), Some(1)));
}

#[test]
fn construct_then_verify_in_fresh_process() {
    let path = tmp("pair.json");
    let p = path.to_str().unwrap();
    let o = run(&["construct", "--q", "5", "--rank", "1", "--places", "t,t-1", "--out", p]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["wild", "--cert", p, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["wild_set"], serde_json::json!(["t", "t+4"]));
    assert_eq!(v["claimed_matches"], serde_json::json!(true));
}

#[test]
fn curve_certificate_round_trip() {
    let path = tmp("curve.json");
    let p = path.to_str().unwrap();
    let o = run(&[
        "construct", "--q", "5", "--curve", "t^3-t", "--rank", "general", "--places", "t,t+1", "--aux", "t^2+2,t^2+3", "--out", p,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["verify", "--cert", p]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("wild set: {(t; ramified), (t+1; ramified), (t^2+2; inert), (t^2+3; inert)}"), "{}", stdout(&o));
}

#[test]
fn output_is_deterministic() {
    let a = run(&["construct", "--q", "5", "--rank", "1", "--places", "t,t-1,t-2"]);
    let b = run(&["construct", "--q", "5", "--rank", "1", "--places", "t,t-1,t-2"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn corrupted_certificate_fails() {
    let path = tmp("bad.json");
    let o = run(&["construct", "--q", "5", "--rank", "1", "--places", "t,t-1"]);
    let mut v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    v["local_maps"][0]["image_of_u"] = serde_json::json!("u");
    v["local_maps"][0]["image_of_pi"] = serde_json::json!("pi");
    std::fs::write(&path, v.to_string()).unwrap();
    let o = run(&["verify", "--cert", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL  SE4"));

    let o = run(&["construct", "--q", "5", "--rank", "1", "--places", "t,t-1"]);
    let mut w: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    w["claimed_wild_set"] = serde_json::json!(["t"]);
    std::fs::write(&path, w.to_string()).unwrap();
    assert_eq!(run(&["verify", "--cert", path.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn exit_codes() {
    // parse error
    assert_eq!(run(&["hilbert", "--q", "5", "--a", "t+", "--b", "2", "--place", "t"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    // -1 is not a square at degree-one places over F_3
    let o = run(&["construct", "--q", "3", "--rank", "1", "--places", "t,t-1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("-1"));
    // the auxiliary point for this triple has degree 2
    let args = ["construct", "--q", "5", "--rank", "1", "--places", "t,t-1,t-2"];
    let o = bin().args(args).env("WILDSETS_DEGREE_CAP", "1").output().unwrap();
    assert_eq!(o.status.code(), Some(4));
    let mut with_flag = args.to_vec();
    with_flag.extend(["--degree-cap", "1"]);
    assert_eq!(run(&with_flag).status.code(), Some(4));
}

#[test]
fn selftest_passes() {
    let o = run(&["selftest"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 failure(s)"));
}
