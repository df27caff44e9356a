// Copyright 2026 The paramp Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn paramp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paramp")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &str = r#"
[model]
topology = "degenerate"

[drive]
pump_gains_db = [10, 20]
signal_sweep_min_dbm = -150
signal_sweep_max_dbm = -100
signal_sweep_points_per_decade = 2

[task.scatter]
points = 11
"#;

#[test]
fn print_config_round_trips_byte_for_byte() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "a.toml", SMALL);
    let first = paramp(&["scatter", "--config", &cfg, "--print-config"]);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let text = String::from_utf8(first.stdout).unwrap();
    assert!(text.contains("topology = \"degenerate\""));
    let again = write(tmp.path(), "b.toml", &text);
    let second = paramp(&["scatter", "--config", &again, "--print-config"]);
    assert_eq!(text.as_bytes(), &second.stdout[..]);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "a.toml", SMALL);
    for task in ["scatter", "gain-sweep"] {
        let a = tmp.path().join(format!("{task}-a"));
        let b = tmp.path().join(format!("{task}-b"));
        for dir in [&a, &b] {
            let o = paramp(&[task, "--config", &cfg, "--out", dir.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        }
        let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(names.iter().any(|n| n == "manifest.toml"));
        for n in names {
            assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{n:?}");
        }
    }
}

#[test]
fn scatter_headers_carry_units() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "a.toml", SMALL);
    let out = tmp.path().join("out");
    assert_eq!(paramp(&["scatter", "--config", &cfg, "--out", out.to_str().unwrap()]).status.code(), Some(0));
    let csv = fs::read_to_string(out.join("scatter.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("pump_gain_db,pump_power_dbm,detuning_hz,r_ss_db"));
    assert!(header.contains("g_parallel_db"));
    // Two pump settings times eleven detunings.
    assert_eq!(csv.lines().count(), 1 + 22);
    let manifest = fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("config_sha256") && manifest.contains("seed = 1"));
}

#[test]
fn seed_override_lands_in_manifest() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "a.toml", SMALL);
    let out = tmp.path().join("out");
    let o = paramp(&["circuit-params", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "77"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest = fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 77"));
}

#[test]
fn unknown_key_reports_line_and_exits_2() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "a.toml", "[model]\ntopology = \"degenerate\"\n\n[drive]\npump_gain_db = [10]\n");
    let o = paramp(&["scatter", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("line 5") && msg.contains("pump_gain_db"), "{msg}");
}

#[test]
fn invalid_value_reports_line_and_exits_2() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "a.toml", "[model]\ncoupling_hz = -3\n");
    let o = paramp(&["scatter", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2: [model] coupling_hz"));
}

#[test]
fn task_name_mismatch_and_missing_out_exit_2() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "a.toml", "[task]\nname = \"wigner\"\n");
    assert_eq!(paramp(&["scatter", "--config", &cfg, "--out", "x"]).status.code(), Some(2));
    let plain = write(tmp.path(), "b.toml", "");
    assert_eq!(paramp(&["scatter", "--config", &plain]).status.code(), Some(2));
    assert_eq!(paramp(&["no-such-task", "--config", &plain]).status.code(), Some(2));
}

#[test]
fn missing_config_exits_4() {
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("nope.toml");
    let o = paramp(&["scatter", "--config", missing.to_str().unwrap(), "--out", "x"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn solver_failure_keeps_partial_output_and_exits_3() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "a.toml",
        "[drive]\npump_gains_db = [30]\nsignal_sweep_min_dbm = -120\nsignal_sweep_max_dbm = -90\nsignal_sweep_points_per_decade = 4\n\
         [numerics]\nfixed_point_max_iterations = 1\nfixed_point_tolerance = 1e-300\n",
    );
    let out = tmp.path().join("out");
    let o = paramp(&["gain-sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("gain_sweep.csv")).unwrap();
    let flagged = csv.lines().skip(1).filter(|l| l.contains("did not converge")).count();
    assert!(flagged > 0);
    let manifest = fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("points_failed") && !manifest.contains("points_failed = 0.0"));
}

#[test]
fn wigner_matrix_has_axis_headers() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "a.toml", "[task.wigner]\npump_fractions = [0.5]\nbins = 11\n");
    let out = tmp.path().join("out");
    let o = paramp(&["wigner", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("wigner_0_0.dat")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# field"));
    assert!(lines.next().unwrap().starts_with("# axis x re_a_sqrt_photons"));
    assert!(lines.next().unwrap().starts_with("# axis y im_a_sqrt_photons"));
    assert_eq!(lines.count(), 11);
}
