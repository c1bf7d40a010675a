use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_rfsqueeze");

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("SQZ_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

/// Relative path to contents for every file under `root`.
fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

const SHORT_CAMPAIGN: &str = r#"{ "campaign": { "duration_s": 3600 } }"#;

#[test]
fn every_figure_writes_tables_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let expected = [
        ("fig1b", "fig1b.csv", "phi_rad,intensity_rel,rate_cps"),
        ("fig1c", "fig1c.csv", "detuning_per_ns,dipole_phase_rad,phase_offset_rad"),
        ("fig1d", "fig1d.csv", "tau_ns,g2_ideal"),
        ("fig1e", "fig1e.csv", "tau_ns,g2_phase0_rel,g2_phase1_rel,g2_phase2_rel"),
        ("fig2a", "fig2a.csv", "tau_ns,in_phase,out_of_phase"),
        ("fig2b", "fig2b.csv", "phi_rad,variance_ideal,variance_coherent"),
        ("fig3a", "fig3a.csv", "s,variance_in_phase,variance_out_of_phase"),
        ("fig3b", "fig3b_panel0.csv", "x1,x2,w"),
    ];
    for (figure, file, columns) in expected {
        let out_dir = tmp.path().join(figure);
        let out = run(&["reproduce", figure, "--out", out_dir.to_str().unwrap(), "--format", "csv,svg"], tmp.path());
        assert!(out.status.success(), "{figure}: {}", stderr(&out));
        assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), out_dir.to_str().unwrap());
        assert_eq!(header(&out_dir.join(file)), columns, "{figure}");
        let m = manifest(&out_dir);
        assert_eq!(m["command"], format!("reproduce {figure}"));
        assert_eq!(m["summary"]["figure"], figure);
        let files: Vec<&str> = m["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
        assert!(files.contains(&file), "{figure}: {files:?}");
        assert!(files.iter().any(|f| f.ends_with(".svg")), "{figure}: {files:?}");
        for f in files {
            assert!(out_dir.join(f).is_file(), "{figure}: {f} listed but missing");
        }
    }
}

#[test]
fn figure_values_match_the_library() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("fig2a");
    assert!(run(&["reproduce", "fig2a", "--out", dir.to_str().unwrap()], tmp.path()).status.success());
    let params = rfsqueeze_core::SystemParams::from_lifetime_ns(0.58, 0.1).unwrap();
    let expected = rfsqueeze_core::normally_ordered_variance(&params, 0.0).unwrap().normally_ordered_variance;
    let got = manifest(&dir)["summary"]["in_phase_zero"].as_f64().unwrap();
    assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
}

#[test]
fn instrument_adds_degraded_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{ "instrument": { "irf_fwhm": 0.5, "phase_jitter_sigma": 0.3 } }"#);
    let dir = tmp.path().join("fig2b");
    let out = run(&["reproduce", "fig2b", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()], tmp.path());
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(header(&dir.join("fig2b.csv")), "phi_rad,variance_ideal,variance_instrument,variance_coherent");
    let s = &manifest(&dir)["summary"];
    let ideal = s["ideal_min"].as_f64().unwrap();
    let degraded = s["instrument_min"].as_f64().unwrap();
    assert!(degraded.abs() < ideal.abs());
}

#[test]
fn json_format_only_skips_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("o");
    assert!(run(&["reproduce", "fig1c", "--out", dir.to_str().unwrap(), "--format", "json"], tmp.path()).status.success());
    assert!(dir.join("fig1c.json").is_file());
    assert!(!dir.join("fig1c.csv").exists());
    let table: Value = serde_json::from_str(&fs::read_to_string(dir.join("fig1c.json")).unwrap()).unwrap();
    assert_eq!(table["data"]["detuning_per_ns"].as_array().unwrap().len(), 121);
}

#[test]
fn misspelled_key_is_a_config_error_with_suggestion() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{ "system": { "powr": 0.2 } }"#);
    let out = run(&["reproduce", "fig1b", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("did you mean `power`"), "{}", stderr(&out));
}

#[test]
fn invalid_values_are_all_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{ "system": { "s": -1 }, "lo": { "visibility": 2 } }"#);
    let out = run(&["sweep", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("system.s"), "{err}");
    assert!(err.contains("lo.visibility"), "{err}");
}

#[test]
fn malformed_json_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "{\n  \"system\": { \"s\": }\n}");
    let out = run(&["sweep", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn unknown_subcommand_argument_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(&["reproduce", "fig9z"], tmp.path()).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--format", "png"], tmp.path()).status.code(), Some(2));
}

#[test]
fn zero_duration_campaign_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{ "campaign": { "duration_s": 0 } }"#);
    let out = run(&["campaign", "--config", cfg.to_str().unwrap(), "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn unconverged_wandering_average_is_a_numeric_error() {
    let tmp = tempfile::tempdir().unwrap();
    let gamma = 1.0 / 0.58;
    let cfg = write_config(
        tmp.path(),
        &format!(r#"{{ "instrument": {{ "wandering_sigma": {} }} }}"#, 0.8 * gamma),
    );
    let out = run(&["reproduce", "fig2b", "--config", cfg.to_str().unwrap(), "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("did not converge"), "{}", stderr(&out));
}

#[test]
fn rejecting_every_interval_is_empty_acceptance() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{ "campaign": { "duration_s": 3600, "thresholds": { "min_psb_rate": 1e12 } } }"#,
    );
    let out = run(&["campaign", "--config", cfg.to_str().unwrap(), "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn campaign_is_deterministic_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SHORT_CAMPAIGN);
    let c = cfg.to_str().unwrap();
    for (dir, seed) in [("a", "7"), ("b", "7"), ("c", "8")] {
        let out = run(&["campaign", "--config", c, "--seed", seed, "--out", dir], tmp.path());
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let a = snapshot(&tmp.path().join("a"));
    assert!(a.contains_key(Path::new("estimates.csv")));
    assert!(a.contains_key(Path::new("campaign/manifest.json")));
    assert_eq!(a, snapshot(&tmp.path().join("b")));
    assert_ne!(a.get(Path::new("estimates.csv")), snapshot(&tmp.path().join("c")).get(Path::new("estimates.csv")));
}

#[test]
fn manifest_records_seed_and_config_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SHORT_CAMPAIGN);
    let out = run(&["campaign", "--config", cfg.to_str().unwrap(), "--seed", "42", "--out", "o"], tmp.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let m = manifest(&tmp.path().join("o"));
    assert_eq!(m["seed"], 42);
    assert_eq!(m["config"]["output"]["seed"], 42);
    let config: rfsqueeze_cli::config::RunConfig = serde_json::from_value(m["config"].clone()).unwrap();
    assert_eq!(m["config_sha256"], config.sha256());
    assert_eq!(m["versions"]["rfsqueeze-core"], rfsqueeze_core::VERSION);
    let inner: Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("o/campaign/manifest.json")).unwrap()).unwrap();
    assert_eq!(inner["provenance"]["config_sha256"], m["config_sha256"]);
}

#[test]
fn out_dir_env_sets_the_default_root() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("root");
    let out = Command::new(BIN)
        .args(["reproduce", "fig1c"])
        .current_dir(tmp.path())
        .env("SQZ_OUT_DIR", &root)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(root.join("fig1c/manifest.json").is_file());

    let out = run(&["reproduce", "fig1c"], tmp.path());
    assert!(out.status.success());
    assert!(tmp.path().join("sqz-out/fig1c/manifest.json").is_file());
}

#[test]
fn calibrate_hits_the_target() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["calibrate", "--out", "o"], tmp.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let cal: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("o/calibration.json")).unwrap()).unwrap();
    let achieved = cal["achieved"].as_f64().unwrap();
    assert!((achieved + 0.031 * 0.25).abs() < 1e-6, "{achieved}");
    assert!(cal["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn sweep_covers_the_full_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{ "sweep": { "s_grid": [0.1, 0.3333333333333333, 1.0], "phi_grid": { "min": 0, "max": 3.141592653589793, "points": 5 } } }"#,
    );
    let out = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", "o"], tmp.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = fs::read_to_string(tmp.path().join("o/sweep_grid.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 3 * 5);
    let m = manifest(&tmp.path().join("o"));
    assert!((m["summary"]["minimum"]["variance"].as_f64().unwrap() + 1.0 / 32.0).abs() < 1e-12);
}
