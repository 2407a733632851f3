//! End-to-end runs of the `dualtype` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dualtype(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dualtype")).args(args).output().expect("binary runs")
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn same_seed_gives_byte_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sweep = [0, 4, 8]\nshots = 120\n");
    for kind in ["conversion_cycle", "pump_detect_crosstalk_1", "rb_s_qubit"] {
        let (a, b) = (tmp.path().join(format!("{kind}-a")), tmp.path().join(format!("{kind}-b")));
        for dir in [&a, &b] {
            let out =
                dualtype(&["--config", &cfg, "--experiment", kind, "--seed", "99", "--out", dir.to_str().unwrap()]);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        }
        let (fa, fb) = (read_all(&a), read_all(&b));
        assert!(fa.len() >= 2);
        assert_eq!(fa, fb, "{kind}");
    }
}

#[test]
fn different_seeds_differ() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sweep = [0, 50, 100]\nshots = 600\nexperiment = 'raman_crosstalk'\n");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(dualtype(&["--config", &cfg, "--seed", "1", "--out", a.to_str().unwrap()]).status.success());
    assert!(dualtype(&["--config", &cfg, "--seed", "2", "--out", b.to_str().unwrap()]).status.success());
    assert_ne!(fs::read(a.join("raman_crosstalk.csv")).unwrap(), fs::read(b.join("raman_crosstalk.csv")).unwrap());
}

#[test]
fn flags_override_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "experiment = 'rb_f_qubit'\nseed = 3\nshots = 40\nsweep = [1, 2, 3]\n");
    let out_dir = tmp.path().join("o");
    let out = dualtype(&["--config", &cfg, "--shots", "80", "--seed", "11", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success());
    let csv = fs::read_to_string(out_dir.join("rb_f_qubit.csv")).unwrap();
    assert!(csv.starts_with("# experiment=rb_f_qubit seed=11 shots=80 "), "{csv}");
}

#[test]
fn config_errors_exit_with_2_and_name_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    for (text, key) in [
        ("shots = -10\n", "shots"),
        ("[physics.crosstalk]\neps_1 = -0.1\n", "eps_1"),
        ("[physics.conversion]\ncoherence = 1\n", "coherence"),
    ] {
        let cfg = write_config(tmp.path(), text);
        let out = dualtype(&["--config", &cfg, "--out", tmp.path().join("x").to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(key), "{text}: {err}");
    }
    let out = dualtype(&["--config", tmp.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_with_4() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let cfg = write_config(tmp.path(), "experiment = 'rb_s_qubit'\nshots = 20\nsweep = [1, 2, 3]\n");
    let out = dualtype(&["--config", &cfg, "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn exit_status_tracks_the_reported_convergence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "experiment = 'thermometry'\nshots = 1\n");
    let dir = tmp.path().join("o");
    let out = dualtype(&["--config", &cfg, "--out", dir.to_str().unwrap()]);
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.join("thermometry_fit.json")).unwrap()).unwrap();
    let converged = summary["converged"].as_bool().unwrap();
    assert_eq!(out.status.code(), Some(if converged { 0 } else { 3 }));
    assert!(dir.join("thermometry.csv").exists());
}

#[test]
fn reference_config_is_loadable() {
    let out = dualtype(&["--emit-reference-config"]);
    assert!(out.status.success());
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("ref.toml");
    fs::write(&p, &out.stdout).unwrap();
    let cfg = dualtype_cli::load_config(&p).unwrap();
    assert_eq!(cfg, dualtype_cli::RunConfig::default());
}

#[test]
fn thermometry_default_run_recovers_temperature() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("o");
    let out = dualtype(&["--experiment", "thermometry", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success());
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.join("thermometry_fit.json")).unwrap()).unwrap();
    let t = summary["fit"]["params"]["T"].as_f64().unwrap();
    assert!((t - 9.2e-3).abs() < 0.2e-3, "{t}");
}
