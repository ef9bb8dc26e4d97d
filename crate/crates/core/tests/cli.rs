use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tristein(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tristein"));
    cmd.args(args).env_remove("TRISTEIN_OUT_DIR");
    if let Some(d) = out_dir {
        cmd.env("TRISTEIN_OUT_DIR", d);
    }
    cmd.output().unwrap()
}

fn records(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn moments_var_t() {
    let out = tristein(&["moments", "--n", "4", "--p", "0.5"], None);
    assert!(out.status.success());
    let recs = records(&out);
    let var = recs.iter().find(|r| r["quantity"] == "var_t").unwrap();
    assert_eq!(var["value"].as_f64().unwrap(), 0.625);
    assert_eq!(var["config"]["n"], serde_json::json!([4]));
}

#[test]
fn exit_codes() {
    assert_eq!(tristein(&["--help"], None).status.code(), Some(0));
    assert_eq!(tristein(&["frobnicate"], None).status.code(), Some(1));
    assert_eq!(tristein(&["moments", "--n", "x"], None).status.code(), Some(1));
    assert_eq!(tristein(&["moments", "--n", "2"], None).status.code(), Some(2));
    assert_eq!(tristein(&["sample-dk", "--n", "16", "--p", "power:0.6"], None).status.code(), Some(2));
    assert_eq!(tristein(&["oracle", "--n", "8"], None).status.code(), Some(3));
    let err = String::from_utf8_lossy(&tristein(&["oracle", "--n", "8"], None).stderr).to_string();
    assert!(err.contains("capacity"), "{err}");
}

#[test]
fn out_dir_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "n = [5]\np = \"0.3\"\nseed = 1\n").unwrap();
    let out = tristein(&["moments", "--config", cfg.to_str().unwrap(), "--n", "6"], Some(dir.path()));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let file = dir.path().join("moments.jsonl");
    let text = std::fs::read_to_string(&file).unwrap();
    let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["n"], 6);
    assert_eq!(first["p"], 0.3);
    assert_eq!(first["config"]["seed"], 1);

    // appends
    tristein(&["moments", "--config", cfg.to_str().unwrap()], Some(dir.path()));
    assert_eq!(std::fs::read_to_string(&file).unwrap().lines().count(), 4);

    std::fs::write(&cfg, "nn = [5]\n").unwrap();
    assert_eq!(tristein(&["moments", "--config", cfg.to_str().unwrap()], None).status.code(), Some(2));
}

#[test]
fn sample_dk_then_rate_fit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dk.jsonl");
    let p = path.to_str().unwrap();
    let out = tristein(&["sample-dk", "--n", "8,12,16", "--samples", "4000", "--seed", "3", "--output", p], None);
    assert!(out.status.success());
    let recs = records(&out);
    assert_eq!(recs.iter().filter(|r| r["quantity"] == "dk").count(), 3);
    let fit_inline = recs.iter().find(|r| r["quantity"] == "rate_fit_slope").unwrap()["value"].as_f64().unwrap();

    let out = tristein(&["rate-fit", "--input", p], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fit = records(&out)[0]["value"].as_f64().unwrap();
    assert_eq!(fit, fit_inline);

    assert_eq!(tristein(&["rate-fit"], None).status.code(), Some(2));
}

#[test]
fn reruns_share_hashes() {
    let args = ["sample-dk", "--n", "10", "--samples", "2000", "--seed", "9", "--streams", "3"];
    let a = records(&tristein(&args, None));
    let b = records(&tristein(&args, None));
    assert_eq!(a[0]["content_hash"], b[0]["content_hash"]);
    let c =
        records(&tristein(&["sample-dk", "--n", "10", "--samples", "2000", "--seed", "10", "--streams", "3"], None));
    assert_ne!(a[0]["content_hash"], c[0]["content_hash"]);
}

#[test]
fn stream_count_does_not_change_samples() {
    let run = |s: &str| records(&tristein(&["sample-dk", "--n", "10", "--samples", "2000", "--streams", s], None));
    assert_eq!(run("1")[0]["value"], run("7")[0]["value"]);
}

#[test]
fn patterns_csv() {
    let out = tristein(&["patterns", "--anchor", "r414"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "anchor,class_id,lemma,m,multiplicity_order,bound_family,measured,ratio");
    assert_eq!(lines.count(), 11);
    let all = String::from_utf8(tristein(&["patterns"], None).stdout).unwrap();
    assert_eq!(all.lines().filter(|l| l.starts_with("anchor")).count(), 1);
}

#[test]
fn oracle_and_coupling_records() {
    let recs = records(&tristein(&["oracle", "--n", "5", "--p", "0.3"], None));
    let ode = recs.iter().find(|r| r["quantity"] == "ode_max_residual").unwrap();
    assert!(ode["value"].as_f64().unwrap() < 1e-9);
    let recs = records(&tristein(&["coupling", "--n", "12", "--samples", "1000", "--t-grid", "0.5,1"], None));
    assert!(recs.iter().any(|r| r["quantity"] == "extended_bound"));
    assert!(recs.iter().any(|r| r["quantity"] == "r3" && r["std_error"].is_number()));
}
