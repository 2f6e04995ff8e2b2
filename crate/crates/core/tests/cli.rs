use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sauav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sauav")).args(args).output().expect("binary runs")
}

fn write_small(dir: &Path) -> String {
    let p = dir.join("small.toml");
    fs::write(
        &p,
        "[scenario]\nn_uavs = 20\nsim_time_s = 20.0\narena_m = 700.0\n\n[traffic]\nflows = 3\nstart_s = 3.0\n\n[adversary]\nfraction = 0.2\n",
    )
    .unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn run_writes_a_trace_that_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_small(dir.path());
    let trace = dir.path().join("t.ndjson");
    let out = sauav(&["run", &cfg, "--seed", "7", "--json", "--trace", trace.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["run"]["seed"], 7);
    assert_eq!(doc["run"]["n_uavs"], 20);

    let v = sauav(&["verify", trace.to_str().unwrap(), "--json"]);
    assert!(v.status.success());
    let rep: serde_json::Value = serde_json::from_slice(&v.stdout).unwrap();
    assert_eq!(rep["ok"], true);
    assert!((rep["recomputed"]["pdr"].as_f64().unwrap() - doc["report"]["pdr"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_small(dir.path());
    let out = sauav(&["run", &cfg, "--defense", "off", "--range", "300", "--json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["run"]["agent_handshakes"], 0);
    assert_eq!(doc["run"]["warnings"], 0);
}

#[test]
fn bad_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    fs::write(&p, "[scenario]\nn_uavs = 0\n").unwrap();
    let out = sauav(&["run", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    fs::write(&p, "[scenario\n").unwrap();
    assert_eq!(sauav(&["run", p.to_str().unwrap()]).status.code(), Some(2));
    let cfg = write_small(dir.path());
    assert_eq!(sauav(&["run", &cfg, "--range", "-1"]).status.code(), Some(2));
}

#[test]
fn sweep_writes_three_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_small(dir.path());
    let out_dir = dir.path().join("out");
    let out = sauav(&[
        "sweep", &cfg, "--axis", "malicious_fraction", "--values", "0.1,0", "--repeats", "2", "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("malicious_fraction,dr,fp,fn,pdr,re,"));
    assert!(lines[1].starts_with("0.0000,"), "{}", lines[1]);
    assert_eq!(String::from_utf8_lossy(&out.stdout), csv);
    let runs = fs::read_to_string(out_dir.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 5);
    let dat = fs::read_to_string(out_dir.join("sweep.dat")).unwrap();
    assert!(dat.starts_with('#'));
}

#[test]
fn verify_flags_a_tampered_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_small(dir.path());
    let trace = dir.path().join("t.ndjson");
    assert!(sauav(&["run", &cfg, "--trace", trace.to_str().unwrap()]).status.success());
    let text = fs::read_to_string(&trace).unwrap();
    // Drop one delivery so the recount disagrees with the summary line.
    let cut = text.lines().position(|l| l.contains("\"ev\":\"deliver\"")).expect("something was delivered");
    let kept: Vec<&str> = text.lines().enumerate().filter(|&(i, _)| i != cut).map(|(_, l)| l).collect();
    fs::write(&trace, kept.join("\n") + "\n").unwrap();
    let v = sauav(&["verify", trace.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&v.stdout).contains("FAILED"));
}
