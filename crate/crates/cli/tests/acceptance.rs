//! CLI acceptance: end-to-end determinism (criterion 9) and the command
//! contracts — exit codes, preset mapping, profile targets, report round-trip.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nmeskit"));
    // session-level NMESKIT_* variables must not leak into the runs
    for (key, _) in std::env::vars() {
        if key.starts_with("NMESKIT_") {
            cmd.env_remove(&key);
        }
    }
    cmd
}

fn run_ok(args: &[&str], dir: &Path) -> Output {
    let out = bin().args(args).current_dir(dir).output().expect("spawn");
    assert!(
        out.status.success(),
        "command {:?} failed\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

// -------------------------------------------------------------------------
// 9. End-to-end determinism
// -------------------------------------------------------------------------

#[test]
fn criterion_9_end_to_end_determinism() {
    let tmp = tempfile::tempdir().unwrap();

    let pipeline = |root: &Path| -> Vec<(PathBuf, Vec<u8>)> {
        std::fs::create_dir_all(root).unwrap();
        run_ok(
            &["identify", "--synthetic", "--seed", "7", "--sessions", "s", "--out", "o"],
            root,
        );
        run_ok(
            &["tune", "--model", "o/model.json", "--seed", "7", "--out", "o"],
            root,
        );
        run_ok(
            &[
                "evaluate",
                "--gains-file",
                "o/gains.json",
                "--trajectory",
                "sine",
                "--seed",
                "7",
                "--out",
                "o",
                "--sessions",
                "s",
                "--record-session",
                "2",
            ],
            root,
        );
        let files = [
            "s/synthetic/1/identification.csv",
            "s/synthetic/1/meta",
            "s/synthetic/2/control.csv",
            "s/synthetic/2/meta",
            "o/model.json",
            "o/identify_report.json",
            "o/gains.json",
            "o/tune_audit_sine.log",
            "o/tune_audit_step.log",
            "o/evaluate_sine.csv",
            "o/evaluate_sine_metrics.json",
            "o/evaluate_sine_plot.csv",
        ];
        files
            .iter()
            .map(|f| (PathBuf::from(f), read(&root.join(f))))
            .collect()
    };

    let first = pipeline(&tmp.path().join("run_a"));
    let second = pipeline(&tmp.path().join("run_b"));
    for ((path_a, bytes_a), (_, bytes_b)) in first.iter().zip(&second) {
        assert!(
            bytes_a == bytes_b,
            "{} differs between identical runs",
            path_a.display()
        );
        assert!(!bytes_a.is_empty(), "{} is empty", path_a.display());
    }

    // the identification report carries the fit metrics
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("run_a/o/identify_report.json")).unwrap(),
    )
    .unwrap();
    assert!(report["one_step_validation"]["r_squared"].is_number());
    assert!(report["corr_input_output"].is_number());

    println!("acceptance criterion 9 (end-to-end determinism): PASS");
}

// -------------------------------------------------------------------------
// Command contracts
// -------------------------------------------------------------------------

#[test]
fn corrupt_csv_reports_line_number_with_data_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let session_dir = tmp.path().join("s/synthetic/1");
    std::fs::create_dir_all(&session_dir).unwrap();
    std::fs::write(
        session_dir.join("identification.csv"),
        "t_s,pw_us,angle_rad\n0,100,0.1\n0.02,oops,0.2\n",
    )
    .unwrap();

    let out = bin()
        .args(["identify", "--sessions", "s", "--out", "o"])
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 3"), "stderr: {stderr}");
}

#[test]
fn identify_without_sessions_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["identify", "--sessions", "s", "--out", "o"])
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn tune_requires_a_system() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin().args(["tune"]).current_dir(tmp.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tune_presets_map_to_the_documented_population_sizes() {
    let tmp = tempfile::tempdir().unwrap();
    // N_p + N_g + k*N_g audit lines: first 8+6+6, later 10+30+30
    for (preset, expected_lines) in [("first", 20usize), ("later", 70usize)] {
        run_ok(
            &[
                "tune",
                "--against-plant",
                "--preset",
                preset,
                "--trajectory",
                "sine",
                "--seed",
                "5",
                "--out",
                preset,
            ],
            tmp.path(),
        );
        let audit =
            std::fs::read_to_string(tmp.path().join(preset).join("tune_audit_sine.log")).unwrap();
        assert_eq!(
            audit.lines().count(),
            expected_lines,
            "preset {preset}: audit evaluations"
        );
        let gains: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(tmp.path().join(preset).join("gains.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(gains["results"][0]["evaluations"], expected_lines);
    }
}

#[test]
fn same_seed_tuning_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    for out_dir in ["a", "b"] {
        run_ok(
            &[
                "tune",
                "--against-plant",
                "--preset",
                "first",
                "--trajectory",
                "sine",
                "--seed",
                "9",
                "--out",
                out_dir,
            ],
            tmp.path(),
        );
    }
    assert_eq!(
        read(&tmp.path().join("a/gains.json")),
        read(&tmp.path().join("b/gains.json"))
    );
}

#[test]
fn evaluate_compare_empirical_tabulates_all_arms() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(
        &[
            "evaluate",
            "--gains",
            "2.61,3.34,48.94,1.78",
            "--compare-empirical",
            "--trajectory",
            "sine",
            "--out",
            "o",
        ],
        tmp.path(),
    );
    let rows: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("o/evaluate_sine_comparison.json")).unwrap(),
    )
    .unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 6, "tuned arm plus five empirical sets");
    assert_eq!(rows[0]["label"], "tuned");
    for row in rows {
        assert!(row["rmse_deg"].is_number());
        assert!(row["tec"]["status"].is_string());
    }
}

#[test]
fn sci_profile_step_targets_30_degrees() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(
        &[
            "evaluate",
            "--gains",
            "2.61,3.34,48.94,1.78",
            "--trajectory",
            "step",
            "--profile",
            "sci",
            "--out",
            "o",
        ],
        tmp.path(),
    );
    let metrics: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("o/evaluate_step_metrics.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(metrics["metrics"]["operating_point_deg"], 30.0);
    // 40 s at 5 ms sampling
    assert_eq!(metrics["total_steps"], 8000);
}

#[test]
fn report_recomputes_exactly_the_evaluate_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(
        &[
            "evaluate",
            "--gains",
            "2.61,3.34,48.94,1.78",
            "--trajectory",
            "sine",
            "--out",
            "o",
        ],
        tmp.path(),
    );
    run_ok(
        &[
            "report",
            "--log",
            "o/evaluate_sine.csv",
            "--trajectory",
            "sine",
            "--out",
            "o",
        ],
        tmp.path(),
    );
    let evaluate: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("o/evaluate_sine_metrics.json")).unwrap(),
    )
    .unwrap();
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("o/report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(
        evaluate["metrics"], report["metrics"],
        "report must reproduce the evaluation metrics exactly"
    );
}

#[test]
fn identify_control_only_trains_on_tuned_control_sessions() {
    let tmp = tempfile::tempdir().unwrap();
    // record a short tuned control session (10 s at 5 ms = 2000 rows), then
    // an identification session that the filter must exclude
    let mut cmd = bin();
    cmd.env("NMESKIT_TRAJECTORY__DURATION_S", "10.0");
    let out = cmd
        .args([
            "evaluate",
            "--gains-file",
            "g/gains.json",
            "--trajectory",
            "sine",
            "--out",
            "o",
            "--sessions",
            "s",
            "--record-session",
            "1",
        ])
        .current_dir(tmp.path())
        .output()
        .unwrap();
    // no gains file yet: data error
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    run_ok(
        &[
            "tune", "--against-plant", "--preset", "first", "--trajectory", "sine", "--seed",
            "11", "--out", "g",
        ],
        tmp.path(),
    );
    // two tuned control sessions, 10 s at 5 ms each
    for index in ["1", "2"] {
        let mut cmd = bin();
        cmd.env("NMESKIT_TRAJECTORY__DURATION_S", "10.0");
        let out = cmd
            .args([
                "evaluate",
                "--gains-file",
                "g/gains.json",
                "--trajectory",
                "sine",
                "--out",
                "o",
                "--sessions",
                "s",
                "--record-session",
                index,
            ])
            .current_dir(tmp.path())
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }

    // record an identification session too, then train control-only: the
    // freshly recorded 20 ms log must be filtered out, leaving the tuned
    // 5 ms control sessions
    let mut cmd = bin();
    cmd.env("NMESKIT_TRAIN__MAX_EPOCHS", "30");
    let out = cmd
        .args([
            "identify",
            "--synthetic",
            "--control-only",
            "--sessions",
            "s",
            "--out",
            "o3",
            "--seed",
            "3",
        ])
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("s/synthetic/3/identification.csv").exists());
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("o3/identify_report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["control_only"], true);
    assert_eq!(report["sessions_used"].as_array().unwrap().len(), 2);
    assert_eq!(report["sample_time_s"], 0.005);
    // sum of (N_i - 1) for two 2000-row sessions at m = n = 1
    assert_eq!(report["pooled_rows"], 2 * 1999);
}

#[test]
fn sim_writes_an_open_loop_log() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(
        &["sim", "--pw", "200", "--duration", "2", "--out", "o"],
        tmp.path(),
    );
    let text = std::fs::read_to_string(tmp.path().join("o/sim.csv")).unwrap();
    assert!(text.starts_with("t_s,pw_us,angle_rad\n"));
    assert_eq!(text.lines().count(), 1 + 400); // header + 2 s at 5 ms
}
