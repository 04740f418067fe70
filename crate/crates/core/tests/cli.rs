use std::path::Path;
use std::process::{Command, Output};

fn tlim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tlim")).args(args).output().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_estimate_report() {
    let dir = tempfile::tempdir().unwrap();
    let p = |f: &str| dir.path().join(f);
    let s = |f: &str| p(f).to_str().unwrap().to_string();

    let out = tlim(&["simulate", "--model", "ising", "--L", "4", "--T", "2.5", "--n", "4000", "--seed", "9", "-o", &s("d.tlim")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let man = json(&p("d.tlim.manifest.json"));
    assert_eq!(man["command"], "simulate");
    assert_eq!(man["seed"], 9);

    let out = tlim(&["estimate", "-i", &s("d.tlim"), "--condition", "parents", "--boot-B", "20", "--seed", "1", "-o", &s("e.json")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&p("e.json"));
    let records = doc["records"].as_array().unwrap();
    assert_eq!(records.len(), 32);
    let ks: Vec<f64> = records.iter().filter_map(|r| r["coupling"].as_f64()).collect();
    let mean = ks.iter().sum::<f64>() / ks.len() as f64;
    assert!((mean - 0.2).abs() < 0.05, "mean NN coupling {mean}");
    assert!(records.iter().all(|r| r["boot"]["stderr"].is_number() || !r["error"].is_null()));

    let out = tlim(&["report", "--estimates", &s("e.json"), "-o", &s("rep")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["per_tuple.csv", "bin_sizes.csv", "coupling_vs_temperature.csv"] {
        assert!(p("rep").join(f).exists(), "{f}");
    }
}

#[test]
fn trait_model_and_screen() {
    let dir = tempfile::tempdir().unwrap();
    let s = |f: &str| dir.path().join(f).to_str().unwrap().to_string();

    let out = tlim(&["simulate", "--model", "trait", "--preset", "ukbb", "--n", "3000", "--seed", "2", "-o", &s("t.csv")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = tlim(&["report", "--traits", &s("t.csv"), "-o", &s("rep")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = tlim(&["simulate", "--model", "ising", "--L", "4", "--T", "2.3", "--n", "4000", "--seed", "3", "-o", &s("d.tlim")]);
    assert!(out.status.success());
    let out = tlim(&["screen", "-i", &s("d.tlim"), "--targets", "nn-pairs", "--condition", "none", "-o", &s("sc.json")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.tlim");
    let out = tlim(&["estimate", "-i", missing.to_str().unwrap(), "-o", dir.path().join("e.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let data = dir.path().join("d.tlim");
    assert!(tlim(&["simulate", "--model", "ising", "--L", "3", "--T", "3", "--n", "500", "-o", data.to_str().unwrap()]).status.success());
    let out = tlim(&["estimate", "-i", data.to_str().unwrap(), "--condition", "sideways", "-o", dir.path().join("e.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
