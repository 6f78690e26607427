//! End-to-end checks of the binary: deterministic reruns, exit codes, file
//! round-trips, and output-directory precedence.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use tempfile::TempDir;

fn binary() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_normsim"));
    cmd.env_remove("NORMSIM_OUT");
    cmd
}

fn dir_snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut snapshot = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        snapshot.insert(
            entry.file_name().to_string_lossy().into_owned(),
            fs::read(entry.path()).unwrap(),
        );
    }
    snapshot
}

fn write_config(dir: &Path, name: &str, contents: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

#[test]
fn experiment_reruns_are_byte_identical() {
    let work = TempDir::new().unwrap();
    let config = write_config(
        work.path(),
        "exp.json",
        r#"{ "seed": 11, "experiment": { "n_countries": 6, "rows_per_country": 200 } }"#,
    );
    for out in ["a", "b"] {
        let status = binary()
            .args(["experiment", "--config"])
            .arg(&config)
            .args(["--out"])
            .arg(work.path().join(out))
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = dir_snapshot(&work.path().join("a"));
    let b = dir_snapshot(&work.path().join("b"));
    assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>());
    for (name, bytes) in &a {
        assert_eq!(bytes, &b[name], "file {name} differs between reruns");
    }
    assert!(a.contains_key("manifest.json"));
    assert!(a.contains_key("microdata.csv"));
    assert!(a.contains_key("coefficients.csv"));
    assert!(a.contains_key("countries.csv"));
}

#[test]
fn beliefs_rerun_byte_identical_and_seed_sensitive() {
    let work = TempDir::new().unwrap();
    let config = write_config(
        work.path(),
        "beliefs.json",
        r#"{ "beliefs": { "thresholds": { "start": 0.0, "stop": 1.0, "step": 0.5 }, "oracle_samples": 20000 } }"#,
    );
    let run = |out: &str, seed: &str| {
        let status = binary()
            .args(["beliefs", "--config"])
            .arg(&config)
            .args(["--seed", seed, "--out"])
            .arg(work.path().join(out))
            .status()
            .unwrap();
        assert!(status.success());
        fs::read(work.path().join(out).join("beliefs.csv")).unwrap()
    };
    let a = run("a", "5");
    let b = run("b", "5");
    let c = run("c", "6");
    assert_eq!(a, b);
    assert_ne!(a, c, "different seeds must change the Monte Carlo columns");

    // Schema contract: fixed header, and the t = 1 diagonal row carries the
    // triangle-centroid expectation 2/3.
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "r,t,mass,e_va_act,e_va_abstain,e_vv_act,e_vv_abstain,act_degenerate,\
         abstain_degenerate,mc_mass,mc_e_va_act,mc_e_va_abstain,mc_e_vv_act,\
         mc_e_vv_abstain,gap_mass,gap_e_va_act,gap_e_va_abstain,gap_e_vv_act,\
         gap_e_vv_abstain"
    );
    let diagonal_unit_row = lines
        .find(|l| l.starts_with("1,1.0000000000000000e0,"))
        .expect("row for r=1, t=1");
    let e_vv_act: f64 = diagonal_unit_row
        .split(',')
        .nth(5)
        .unwrap()
        .parse()
        .unwrap();
    assert!((e_vv_act - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn unknown_config_key_exits_with_config_code() {
    let work = TempDir::new().unwrap();
    let config = write_config(
        work.path(),
        "bad.json",
        r#"{ "seed": 1, "sweep": { "S_vv": [0.0] } }"#,
    );
    let output = binary()
        .args(["sweep", "--config"])
        .arg(&config)
        .args(["--out"])
        .arg(work.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("unknown field"), "stderr: {stderr}");
}

#[test]
fn missing_seed_for_stochastic_command_is_config_error() {
    let work = TempDir::new().unwrap();
    let output = binary()
        .arg("sweep")
        .args(["--out"])
        .arg(work.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unattainable_calibration_exits_with_solver_code() {
    let work = TempDir::new().unwrap();
    let config = write_config(
        work.path(),
        "cal.json",
        r#"{ "calibrate": { "target_rate": 0.999, "c": 0.9, "r": 1 } }"#,
    );
    let output = binary()
        .args(["calibrate", "--config"])
        .arg(&config)
        .args(["--out"])
        .arg(work.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("attainable"), "stderr: {stderr}");
}

#[test]
fn calibration_succeeds_inside_attainable_range() {
    let work = TempDir::new().unwrap();
    let config = write_config(
        work.path(),
        "cal.json",
        r#"{ "calibrate": { "target_rate": 0.9, "c": 0.5, "r": 1 } }"#,
    );
    let status = binary()
        .args(["calibrate", "--config"])
        .arg(&config)
        .args(["--out"])
        .arg(work.path().join("out"))
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(work.path().join("out/calibrate.csv")).unwrap();
    assert!(text.starts_with("target_rate,s_vv,achieved_rate,iterations\n"));
}

#[test]
fn degenerate_experiment_exits_with_stats_code() {
    // Zero cost: everyone donates, the outcome is constant, no MLE exists.
    let work = TempDir::new().unwrap();
    let config = write_config(
        work.path(),
        "exp.json",
        r#"{ "seed": 3, "experiment": { "n_countries": 3, "rows_per_country": 20,
             "countries": { "cost_range": [0.0, 0.0] } } }"#,
    );
    let output = binary()
        .args(["experiment", "--config"])
        .arg(&config)
        .args(["--out"])
        .arg(work.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4));
}

#[test]
fn out_of_range_cost_grid_is_config_error() {
    let work = TempDir::new().unwrap();
    let config = write_config(
        work.path(),
        "costs.json",
        r#"{ "costs": { "grid": { "start": 0.5, "stop": 1.5, "step": 0.5 } } }"#,
    );
    let output = binary()
        .args(["costs", "--config"])
        .arg(&config)
        .args(["--out"])
        .arg(work.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn out_dir_precedence_flag_env_config() {
    let work = TempDir::new().unwrap();
    let config_dir = work.path().join("from_config");
    let env_dir = work.path().join("from_env");
    let flag_dir = work.path().join("from_flag");
    let config = write_config(
        work.path(),
        "costs.json",
        &format!(r#"{{ "out_dir": {:?} }}"#, config_dir.to_str().unwrap()),
    );
    // Config only.
    assert!(binary()
        .args(["costs", "--config"])
        .arg(&config)
        .status()
        .unwrap()
        .success());
    assert!(config_dir.join("costs.csv").exists());
    // Env beats config.
    assert!(binary()
        .args(["costs", "--config"])
        .arg(&config)
        .env("NORMSIM_OUT", &env_dir)
        .status()
        .unwrap()
        .success());
    assert!(env_dir.join("costs.csv").exists());
    // Flag beats env.
    assert!(binary()
        .args(["costs", "--config"])
        .arg(&config)
        .env("NORMSIM_OUT", work.path().join("ignored"))
        .args(["--out"])
        .arg(&flag_dir)
        .status()
        .unwrap()
        .success());
    assert!(flag_dir.join("costs.csv").exists());
    assert!(!work.path().join("ignored").exists());
}

#[test]
fn json_format_produces_parseable_tables() {
    let work = TempDir::new().unwrap();
    assert!(binary()
        .args(["costs", "--format", "json", "--out"])
        .arg(work.path().join("out"))
        .status()
        .unwrap()
        .success());
    let bytes = fs::read(work.path().join("out/costs.json")).unwrap();
    let rows: Vec<serde_json::Map<String, serde_json::Value>> =
        serde_json::from_slice(&bytes).unwrap();
    assert_eq!(rows.len(), 19);
    assert!(rows[0].contains_key("intrinsic_cost"));
}

#[test]
fn figure1_summary_written_with_panels() {
    let work = TempDir::new().unwrap();
    let config = write_config(
        work.path(),
        "fig.json",
        r#"{ "seed": 9, "figure1": { "s_vv_rows": [0.0], "c_cols": [0.4], "lattice": 20 } }"#,
    );
    assert!(binary()
        .args(["figure1", "--config"])
        .arg(&config)
        .args(["--out"])
        .arg(work.path().join("out"))
        .status()
        .unwrap()
        .success());
    let summary = fs::read_to_string(work.path().join("out/figure1_summary.csv")).unwrap();
    assert!(summary.lines().count() == 2);
    let panel = fs::read_to_string(work.path().join("out/figure1_panel_r0_c0.csv")).unwrap();
    assert_eq!(panel.lines().count(), 401); // header + 20x20 agents
}
