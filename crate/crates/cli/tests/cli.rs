use std::fs;
use std::path::Path;
use std::process::Command;

fn eqlab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_eqlab")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("cfg.json");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn unknown_key_is_a_schema_error_naming_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"degre": [10, 20]}"#);
    let out = eqlab(&["sections", "--config", &cfg, "--seed", "1", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`degre`"), "{err}");
}

#[test]
fn seed_is_mandatory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "{}");
    let out = eqlab(&["constants", "--config", &cfg]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
}

#[test]
fn constants_run_reports_the_sphere_integrals() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"ks": [2], "samples": 200000}"#);
    let dir = tmp.path().join("out");
    let out = eqlab(&["constants", "--config", &cfg, "--seed", "7", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = fs::read_to_string(dir.join("constants.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "2");
    assert_eq!(row[3], "-0.75");
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["seed"], 7);
    assert_eq!(summary["config"]["params"]["samples"], 200000);
    assert_eq!(summary["all_passed"], true);
}

#[test]
fn repeated_runs_are_byte_identical_and_plots_are_optional() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"pairs": 2, "max_level": 2, "green_depth": 10}"#);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    eqlab(&["henon", "--config", &cfg, "--seed", "3", "--workers", "1", "--out", a.to_str().unwrap()]);
    eqlab(&["henon", "--config", &cfg, "--seed", "3", "--workers", "2", "--out", b.to_str().unwrap(), "--no-plots"]);
    for name in ["counts.csv", "gaps.csv", "green.csv", "cloud_n2_m2.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let header = fs::read_to_string(a.join("cloud_n2_m2.csv")).unwrap();
    assert!(header.starts_with("re_x,im_x,re_y,im_y,weight\r\n"));
    let svgs = |d: &Path| fs::read_dir(d).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "svg")).count();
    assert!(svgs(&a) > 0);
    assert_eq!(svgs(&b), 0);
}

#[test]
fn sections_run_writes_the_zeros_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"fields": ["complex"], "degrees": [5, 10], "trials": 20, "bezout": {"line_trials": 2, "plane_pairs": 2, "plane_max_degree": 2}}"#,
    );
    let dir = tmp.path().join("out");
    eqlab(&["sections", "--config", &cfg, "--seed", "1", "--out", dir.to_str().unwrap(), "--no-plots"]);
    let csv = fs::read_to_string(dir.join("zeros.csv")).unwrap();
    assert!(csv.starts_with("n,trial,D,psi_id\r\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 20 * 4);
}
