//! End-to-end checks of the `spinrwa` binary: output contracts, exit codes,
//! determinism, and configuration precedence.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spinrwa"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("spinrwa-cli-{name}"));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn timeseries_reruns_are_byte_identical() {
    let dir = scratch("rerun");
    let args = |stem: &str| {
        vec![
            "timeseries".to_string(),
            "--spin".into(),
            "1".into(),
            "--B1".into(),
            "0.3".into(),
            "--samples".into(),
            "8".into(),
            "--t-max-pi".into(),
            "2".into(),
            "--out".into(),
            dir.join(stem).to_string_lossy().into_owned(),
        ]
    };
    assert!(bin().args(args("a")).status().unwrap().success());
    assert!(bin().args(args("b")).status().unwrap().success());
    let a = fs::read(dir.join("a.csv")).unwrap();
    let b = fs::read(dir.join("b.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn parallel_sweep_is_byte_identical_to_serial() {
    let dir = scratch("parallel");
    let base = [
        "sweep", "--vary", "omega", "--from", "0.95", "--to", "1.05", "--points", "3", "--spin",
        "1", "--B1", "0.3", "--window", "1", "--methods", "rwa-reduced,chrw",
    ];
    for (stem, threads) in [("serial", "1"), ("wide", "4")] {
        let out_path = dir.join(stem).to_string_lossy().into_owned();
        let status = bin()
            .args(base)
            .args(["--parallel", threads, "--out", &out_path])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let serial = fs::read(dir.join("serial.csv")).unwrap();
    let wide = fs::read(dir.join("wide.csv")).unwrap();
    assert_eq!(serial, wide);
}

#[test]
fn usage_errors_exit_with_code_two() {
    // Missing required spin.
    let out = run(&["timeseries", "--samples", "2"]);
    assert_eq!(out.status.code(), Some(2));
    // Unknown method name.
    let out = run(&["timeseries", "--spin", "1", "--methods", "rwa-magic"]);
    assert_eq!(out.status.code(), Some(2));
    // Sweep without an axis.
    let out = run(&["sweep", "--spin", "1", "--from", "0.5", "--to", "1.0"]);
    assert_eq!(out.status.code(), Some(2));
    // Malformed initial state.
    let out = run(&["timeseries", "--spin", "1", "--initial", "up"]);
    assert_eq!(out.status.code(), Some(2));
    // Unknown flag is a clap-level usage error.
    let out = run(&["timeseries", "--spin", "1", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn method_failure_yields_nan_rows_and_success() {
    // chrw has no self-consistent dressing far below resonance at strong
    // drive; the sweep must still complete, flagging that point as nan.
    let dir = scratch("nanrows");
    let out_path = dir.join("s").to_string_lossy().into_owned();
    let out = run(&[
        "sweep", "--vary", "omega", "--from", "0.5", "--to", "1.0", "--points", "2", "--spin",
        "3", "--B1", "0.5", "--window", "0.5", "--methods", "chrw", "--out", &out_path,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.join("s.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "sweep_value,method,mean_F_op");
    assert!(rows[1].ends_with(",chrw,nan"));
    assert!(!rows[2].ends_with(",nan"));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("s.manifest.json")).unwrap()).unwrap();
    let warnings = manifest["warnings"].as_array().unwrap();
    assert!(warnings.iter().any(|w| w.as_str().unwrap().contains("chrw")));
}

#[test]
fn selftest_quick_passes() {
    let out = run(&["selftest", "--quick", "--seed", "11"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("checks passed"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn flags_override_config_which_overrides_defaults() {
    let dir = scratch("config");
    let cfg = dir.join("run.json");
    fs::write(&cfg, r#"{"spin": 1, "B1": 0.25, "omega": 1.2}"#).unwrap();
    let out_path = dir.join("t").to_string_lossy().into_owned();
    let out = run(&[
        "timeseries",
        "--config",
        cfg.to_str().unwrap(),
        "--B1",
        "0.4",
        "--samples",
        "2",
        "--t-max-pi",
        "1",
        "--methods",
        "exact",
        "--out",
        &out_path,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("t.manifest.json")).unwrap()).unwrap();
    let params = &manifest["params"];
    assert_eq!(params["spin"].as_f64(), Some(1.0)); // from config
    assert_eq!(params["B1"].as_f64(), Some(0.4)); // flag wins over config
    assert_eq!(params["omega"].as_f64(), Some(1.2)); // from config
    assert_eq!(params["B0"].as_f64(), Some(0.05)); // untouched default
}

#[test]
fn rejected_config_keys_are_usage_errors() {
    let dir = scratch("badconfig");
    let cfg = dir.join("bad.json");
    fs::write(&cfg, r#"{"spin": 1, "Bmax": 3}"#).unwrap();
    let out = run(&["timeseries", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn manifest_echoes_the_full_run_definition() {
    let dir = scratch("manifest");
    let out_path = dir.join("m").to_string_lossy().into_owned();
    let out = run(&[
        "timeseries", "--spin", "1.5", "--Q", "1", "--B0", "0.04", "--B1", "0.2", "--omega",
        "0.95", "--samples", "4", "--t-max-pi", "2", "--methods", "rwa-full", "--out", &out_path,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.join("m.manifest.json")).unwrap();
    let manifest: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(manifest["tool"].as_str(), Some("spinrwa"));
    assert_eq!(manifest["version"].as_str(), Some(env!("CARGO_PKG_VERSION")));
    assert_eq!(manifest["params"]["spin"].as_f64(), Some(1.5));
    assert_eq!(manifest["params"]["B0"].as_f64(), Some(0.04));
    assert_eq!(manifest["grid"]["axis"].as_str(), Some("time"));
    assert_eq!(manifest["grid"]["points"].as_u64(), Some(4));
    assert_eq!(manifest["grid"]["window_pi"].as_f64(), Some(2.0));
    assert_eq!(manifest["methods"][0].as_str(), Some("rwa-full"));
    assert!(manifest["solver"]["rk4_dt"].as_f64().unwrap() > 0.0);
    assert!(manifest["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
    // A manifest parsed and re-serialized must not lose or mangle fields.
    let reparsed: serde_json::Value =
        serde_json::from_str(&serde_json::to_string(&manifest).unwrap()).unwrap();
    assert_eq!(manifest, reparsed);
}

#[test]
fn exact_rows_score_unity_in_both_metrics() {
    let out = run(&[
        "timeseries", "--spin", "3", "--methods", "exact", "--samples", "2", "--t-max-pi", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut rows = text.lines();
    assert_eq!(rows.next(), Some("t_over_Tpi,t_absolute,method,f_state,F_op"));
    let mut seen = 0;
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[2], "exact");
        let f_state: f64 = cols[3].parse().unwrap();
        let f_op: f64 = cols[4].parse().unwrap();
        assert!((f_state - 1.0).abs() < 1e-9);
        assert!((f_op - 1.0).abs() < 1e-6);
        seen += 1;
    }
    assert_eq!(seen, 2);
}

#[test]
fn csv_goes_to_stdout_without_an_out_flag() {
    let out = run(&[
        "timeseries", "--spin", "1", "--samples", "3", "--t-max-pi", "1", "--methods",
        "rwa-reduced",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("t_over_Tpi,"));
    assert_eq!(text.lines().count(), 4); // header + one row per sample
    assert!(text.ends_with('\n'));
}
