//! End-to-end runs of the `flexq` binary against throwaway configs.
//!
//! The determinism tests double as the contract that identical inputs
//! produce byte-identical outputs; anything time- or pointer-dependent
//! in the output paths would fail here first.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn flexq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flexq"))
        .args(args)
        .output()
        .expect("binary launches")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Single queue, four states; solves in microseconds.
const TINY: &str = r#"{
  "lambda": 1.0, "mu": [1.0], "n": 1, "B": 2,
  "r": 1.0, "f": 2.0, "beta": 0.5, "psi": 0.3,
  "kappa": 0.2, "h": 0.1, "eta": [1.0, 1.5], "gamma": 0.5,
  "solver": { "tol": 1e-10 },
  "sim": { "initial_state": [-1], "replications": 200, "seed": 7 },
  "sweep": { "parameter": "kappa", "values": [0.0, 0.5, 1.0] }
}"#;

fn write_tiny(dir: &Path) -> String {
    let path = dir.join("model.json");
    fs::write(&path, TINY).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn solve_writes_solution_and_summary_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny(dir.path());
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");

    assert_ok(&flexq(&["solve", "--config", &config, "--output", out_a.to_str().unwrap()]));
    assert_ok(&flexq(&["solve", "--config", &config, "--output", out_b.to_str().unwrap()]));

    let csv_a = fs::read_to_string(&out_a).unwrap();
    let csv_b = fs::read_to_string(&out_b).unwrap();
    assert_eq!(csv_a, csv_b);
    assert!(csv_a.starts_with("index,q1,value,arrival,dep1\n"));
    assert_eq!(csv_a.lines().count(), 1 + 4);

    let summary_a: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a.summary.json")).unwrap())
            .unwrap();
    let summary_b: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("b.summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary_a, summary_b);
    assert_eq!(summary_a["states"], 4);
    assert_eq!(summary_a["queues"], 1);
    assert!(summary_a["residual"].as_f64().unwrap() < 1e-10);
    assert!(summary_a["value_at_all_idle"].is_number());
}

#[test]
fn sweep_writes_rows_and_meta_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny(dir.path());
    let out_a = dir.path().join("sweep_a.csv");
    let out_b = dir.path().join("sweep_b.csv");

    assert_ok(&flexq(&["sweep", "--config", &config, "--output", out_a.to_str().unwrap()]));
    assert_ok(&flexq(&["sweep", "--config", &config, "--output", out_b.to_str().unwrap()]));

    let csv_a = fs::read_to_string(&out_a).unwrap();
    assert_eq!(csv_a, fs::read_to_string(&out_b).unwrap());
    assert!(csv_a.starts_with(
        "swept_value,avg_active_queues,avg_total_tasks,rejecting_states,\
         value_at_reference,iterations,residual,converged\n"
    ));
    assert_eq!(csv_a.lines().count(), 1 + 3);

    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sweep_a.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["parameter"], "kappa");
    assert_eq!(meta["values"].as_array().unwrap().len(), 3);
    assert_eq!(meta["base"]["lambda"], 1.0);
}

#[test]
fn simulate_accepts_solved_policy_or_solves_itself() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny(dir.path());
    let solution = dir.path().join("solution.csv");
    assert_ok(&flexq(&["solve", "--config", &config, "--output", solution.to_str().unwrap()]));

    let est_file = dir.path().join("estimate_from_file.json");
    let est_self = dir.path().join("estimate_self.json");
    let est_again = dir.path().join("estimate_again.json");
    assert_ok(&flexq(&[
        "simulate",
        "--config",
        &config,
        "--policy",
        solution.to_str().unwrap(),
        "--output",
        est_file.to_str().unwrap(),
    ]));
    assert_ok(&flexq(&["simulate", "--config", &config, "--output", est_self.to_str().unwrap()]));
    assert_ok(&flexq(&["simulate", "--config", &config, "--output", est_again.to_str().unwrap()]));

    // Same seed, same policy: the summaries must agree byte for byte
    // whether the policy came from a file or a fresh solve.
    let from_file = fs::read_to_string(&est_file).unwrap();
    assert_eq!(from_file, fs::read_to_string(&est_self).unwrap());
    assert_eq!(from_file, fs::read_to_string(&est_again).unwrap());

    let est: serde_json::Value = serde_json::from_str(&from_file).unwrap();
    assert_eq!(est["replications"], 200);
    assert_eq!(est["seed"], 7);
    assert!(est["mean"].is_number());
    assert!(est["std_error"].as_f64().unwrap() >= 0.0);
    assert!(est["breakdown"]["fine"].is_number());
}

#[test]
fn simulate_can_dump_an_event_log() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny(dir.path());
    let est = dir.path().join("estimate.json");
    let log = dir.path().join("events.csv");
    assert_ok(&flexq(&[
        "simulate",
        "--config",
        &config,
        "--output",
        est.to_str().unwrap(),
        "--event-log",
        log.to_str().unwrap(),
    ]));

    let text = fs::read_to_string(&log).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "time,kind,queue,state_after,discounted_increment,component"
    );
    let first = lines.next().expect("at least one event");
    assert_eq!(first.split(',').count(), 6);
}

#[test]
fn check_reports_clean_structure_on_a_small_model() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny(dir.path());
    let report_path = dir.path().join("report.json");
    assert_ok(&flexq(&["check", "--config", &config, "--output", report_path.to_str().unwrap()]));

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["domination"]["violations"].as_array().unwrap().len(), 0);
    assert_eq!(report["build_threshold"]["violations"].as_array().unwrap().len(), 0);
    assert!(report["domination"]["checked_pairs"].as_u64().unwrap() > 0);
}

#[test]
fn export_writes_one_row_per_state() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny(dir.path());
    let out = dir.path().join("surface.csv");
    assert_ok(&flexq(&["export", "--config", &config, "--output", out.to_str().unwrap()]));

    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("index,q1,value\n"));
    assert_eq!(text.lines().count(), 1 + 4);
}

#[test]
fn bad_inputs_fail_loudly() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"lambda": 1.0, "unknown_key": 5}"#).unwrap();
    let out = flexq(&["solve", "--config", bad.to_str().unwrap(), "--output", "x.csv"]);
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());

    // --config and --preset are mutually exclusive.
    let conflict = flexq(&[
        "sweep",
        "--config",
        bad.to_str().unwrap(),
        "--preset",
        "keepalive-cost-study",
        "--output",
        "y.csv",
    ]);
    assert!(!conflict.status.success());

    let unknown = flexq(&["sweep", "--preset", "no-such-study", "--output", "z.csv"]);
    assert!(!unknown.status.success());
}

#[test]
fn shipped_sample_configs_are_valid() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let config = flexq::config::ConfigFile::from_path(&path)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        config
            .to_model_params()
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
            .validate()
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        if config.sweep.is_some() {
            flexq::experiments::SweepSpec::from_config(&config)
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        }
        seen += 1;
    }
    assert!(seen >= 3, "expected sample configs in {}", root.display());
}
