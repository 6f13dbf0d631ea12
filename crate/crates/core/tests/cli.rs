use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn warpspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_warpspec")).args(args).output().expect("spawn warpspec")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

const SMALL: &str = r#"{"spectrum": {"length": 100}, "scan": {"samples": 100}}"#;

#[test]
fn verify_succeeds_on_default_construction() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = warpspec(&["verify", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&fs::read(out.join("verify.json")).unwrap()).unwrap();
    assert!(v["config_hash"].is_string());
}

#[test]
fn broken_envelope_exits_nonzero_naming_contract() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"schedule": {"amplitude_scale": 3.0}}"#);
    let o = warpspec(&["build", "--config", &cfg, "--out", dir.path().join("out").to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("contract II"), "{err}");
}

#[test]
fn invalid_delta_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"manifold": {"delta": 0.6}}"#);
    let o = warpspec(&["build", "--config", &cfg, "--out", dir.path().join("out").to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("delta"));
}

#[test]
fn unknown_config_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"manifold": {"dimension": 3}}"#);
    let o = warpspec(&["build", "--config", &cfg, "--out", dir.path().join("out").to_str().unwrap()]);
    assert!(!o.status.success());
}

#[test]
fn reruns_are_byte_identical_and_hashed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let runs: Vec<_> = ["a", "b"]
        .iter()
        .map(|tag| {
            let out = dir.path().join(tag);
            let o_ = out.to_str().unwrap();
            for args in [
                vec!["build", "--config", &cfg, "--out", o_],
                vec!["spectrum", "--config", &cfg, "--out", o_, "--grid", "1.5:3:30"],
                vec!["scan", "--config", &cfg, "--out", o_, "--rmax", "1000", "--grid", "1.2:3:24"],
            ] {
                let o = warpspec(&args);
                assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
            }
            read_dir_sorted(&out)
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    for (name, bytes) in &runs[0] {
        let text = String::from_utf8_lossy(bytes);
        let h = if name.ends_with(".csv") {
            let first = text.lines().next().unwrap();
            first.strip_prefix("# config_hash=").unwrap_or_else(|| panic!("{name}: {first}")).to_string()
        } else {
            let v: serde_json::Value = serde_json::from_str(&text).unwrap();
            v["config_hash"].as_str().unwrap_or_else(|| panic!("{name}")).to_string()
        };
        assert!(h.len() == 64 && h.chars().all(|c| c.is_ascii_hexdigit()), "{name}: {h}");
    }
}

#[test]
fn seed_changes_hash() {
    let dir = tempfile::tempdir().unwrap();
    let hash_for = |seed: &str| {
        let out = dir.path().join(seed);
        let o = warpspec(&["build", "--seed", seed, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
        v["config_hash"].as_str().unwrap().to_string()
    };
    assert_ne!(hash_for("1"), hash_for("2"));
}
