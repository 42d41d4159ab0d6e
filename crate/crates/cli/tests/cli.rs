use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use spin7_cli::checkpoint::read_checkpoint;
use spin7_cli::io::RunManifest;

fn spin7(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spin7"))
        .args(args)
        .env("SPIN7_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, json: &str) -> PathBuf {
    let p = dir.join("input.json");
    std::fs::write(&p, json).unwrap();
    p
}

const SMALL_ROTATION: &str = r#"{
    "lattice": {"active_axes": [1], "points_per_axis": 16, "period": 1.0, "stencil_order": 4},
    "initial": {"family": "rotation-field", "amplitude": 0.1},
    "seed": 5,
    "max_steps": 40,
    "diag_every": 4,
    "checkpoint_every": 20
}"#;

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn verify_passes_and_reports_json() {
    let o = spin7(&["verify", "--json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let checks = v.as_array().unwrap();
    assert!(checks.len() > 20);
    assert!(checks.iter().all(|c| c["passed"] == true));
}

#[test]
fn verify_fails_with_corrupted_table() {
    let o = spin7(&["verify", "--corrupt-table"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAILED"));
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_spin7"))
        .arg("verify")
        .env("SPIN7_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let unknown = write_config(dir.path(), &SMALL_ROTATION.replace("\"seed\"", "\"sede\""));
    let o = spin7(&["flow", "run", "--config", unknown.to_str().unwrap(), "--out", out]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("sede"));

    let bad_range = write_config(
        dir.path(),
        &SMALL_ROTATION.replace("\"max_steps\": 40", "\"cfl\": 2.0"),
    );
    let o = spin7(&[
        "flow",
        "run",
        "--config",
        bad_range.to_str().unwrap(),
        "--out",
        out,
    ]);
    assert_eq!(code(&o), 2);

    let o = spin7(&["flow", "run", "--config", "/nonexistent/x.json", "--out", out]);
    assert_eq!(code(&o), 2);

    let garbage = dir.path().join("garbage.s7fl");
    std::fs::write(&garbage, b"S7FLxxxx").unwrap();
    let o = spin7(&[
        "flow",
        "resume",
        "--checkpoint",
        garbage.to_str().unwrap(),
        "--out",
        out,
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn run_writes_series_manifest_and_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_ROTATION);
    let out = dir.path().join("run");
    let o = spin7(&[
        "flow",
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let text = std::fs::read_to_string(out.join("series.csv")).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "t,E,dEdt,negDivT2,maxT,bianchi,ricci,scalar,metric_drift,omega21_defect"
    );
    let rows = csv_rows(&out.join("series.csv"));
    assert_eq!(rows.len(), 11);
    assert!(
        rows.windows(2).all(|w| w[1][1] <= w[0][1]),
        "energy must not increase"
    );

    let m = RunManifest::read(&out.join("manifest.json")).unwrap();
    assert_eq!(m.exit_reason, "max-steps");
    assert_eq!(m.final_step, Some(40));
    assert_eq!(m.seed, 5);
    assert_eq!(m.checkpoints, ["ckpt_0.s7fl", "ckpt_20.s7fl", "ckpt_40.s7fl"]);
    let last = read_checkpoint(&out.join("ckpt_40.s7fl")).unwrap();
    assert_eq!(last.step, 40);
    assert_eq!(Some(last.t), m.final_t);
}

#[test]
fn resume_reproduces_the_uninterrupted_run_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_ROTATION);
    let full = dir.path().join("full");
    let resumed = dir.path().join("resumed");
    assert_eq!(
        code(&spin7(&[
            "flow",
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            full.to_str().unwrap()
        ])),
        0
    );
    let mid = full.join("ckpt_20.s7fl");
    let o = spin7(&[
        "flow",
        "resume",
        "--checkpoint",
        mid.to_str().unwrap(),
        "--out",
        resumed.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        std::fs::read(full.join("ckpt_40.s7fl")).unwrap(),
        std::fs::read(resumed.join("ckpt_40.s7fl")).unwrap()
    );
    let a = csv_rows(&full.join("series.csv"));
    let b = csv_rows(&resumed.join("series.csv"));
    assert_eq!(&a[a.len() - b.len()..], &b[..]);
    let m = RunManifest::read(&resumed.join("manifest.json")).unwrap();
    assert_eq!(m.resumed_from.unwrap().step, 20);
}

#[test]
fn constant_data_is_stationary_with_zero_theta() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
            "lattice": {"active_axes": [1, 2], "points_per_axis": 8, "period": 1.0},
            "initial": {"family": "constant"},
            "max_steps": 5,
            "checkpoint_every": 1,
            "tolerances": {"convergence": 0.0}
        }"#,
    );
    let out = dir.path().join("c");
    assert_eq!(
        code(&spin7(&[
            "flow",
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ])),
        0
    );
    let rows = csv_rows(&out.join("series.csv"));
    assert!(rows.iter().all(|r| r[1] == 0.0 && r[4] == 0.0));
    let first = std::fs::read(out.join("ckpt_0.s7fl")).unwrap();
    let last = std::fs::read(out.join("ckpt_5.s7fl")).unwrap();
    assert_eq!(
        first[first.len() - 8 * 70 * 64..],
        last[last.len() - 8 * 70 * 64..]
    );

    let o = spin7(&[
        "theta",
        "--checkpoint",
        out.join("ckpt_5.s7fl").to_str().unwrap(),
        "--x0",
        "0.5,0.5",
        "--t0",
        "1.0",
    ]);
    assert_eq!(code(&o), 0);
    let theta: f64 = stdout(&o)
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(theta, 0.0);
}

#[test]
fn analysis_commands_on_a_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_ROTATION);
    let out = dir.path().join("run");
    assert_eq!(
        code(&spin7(&[
            "flow",
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ])),
        0
    );
    let ck = out.join("ckpt_20.s7fl");
    let ck = ck.to_str().unwrap();

    // Θ before and after a parabolic rescale agree.
    let scaled = dir.path().join("scaled.s7fl");
    let report = dir.path().join("report.csv");
    let o = spin7(&[
        "rescale",
        "--checkpoint",
        ck,
        "--c",
        "3",
        "--out",
        scaled.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let errs = &csv_rows(&report)[0];
    assert!(errs[1..].iter().all(|e| *e < 1e-12), "{errs:?}");
    let th = |path: &str, x0: &str, t0: &str| -> f64 {
        let o = spin7(&["theta", "--checkpoint", path, "--x0", x0, "--t0", t0]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        stdout(&o)
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .nth(2)
            .unwrap()
            .parse()
            .unwrap()
    };
    let a = th(ck, "0.3", "0.05");
    let b = th(scaled.to_str().unwrap(), "0.9", "0.45");
    assert!(a > 0.0);
    assert!((a - b).abs() <= 1e-12 * a.abs(), "{a} vs {b}");

    // Kernel time before the checkpoint time is rejected.
    assert_eq!(
        code(&spin7(&[
            "theta",
            "--checkpoint",
            ck,
            "--x0",
            "0.3",
            "--t0",
            "0.0"
        ])),
        2
    );

    let o = spin7(&[
        "entropy",
        "--checkpoint",
        ck,
        "--sigma",
        "0.015625",
        "--t-samples",
        "4",
    ]);
    assert_eq!(code(&o), 0);
    let lambda: f64 = stdout(&o)
        .lines()
        .nth(1)
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(lambda.is_finite() && lambda > 0.0);

    let o = spin7(&[
        "soliton-check",
        "--checkpoint",
        ck,
        "--schedule-c",
        "1",
        "--schedule-p",
        "0.5",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("step,t,residual"));
    assert!(text.contains("\nanchored,1,"));
    assert_eq!(code(&spin7(&["soliton-check"])), 2);
}

#[test]
fn blow_up_guard_exits_3_and_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &SMALL_ROTATION.replace("\"seed\": 5,", "\"seed\": 5, \"tolerances\": {\"blowup\": 1e-6},"),
    );
    let out = dir.path().join("run");
    let o = spin7(&[
        "flow",
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let m = RunManifest::read(&out.join("manifest.json")).unwrap();
    assert_eq!(m.exit_reason, "blow-up");
    assert_eq!(m.final_step, Some(0));
    assert!(out.join("series.csv").exists());
}
