use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn peskin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_peskin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

const SMALL_RUN: &str = r#"{
  "law": {"law": "cubic", "c": 1.0},
  "init": {"kind": "random_decay", "exponent": 2.5, "seed": 11, "amplitude": 0.002},
  "K": 8, "M": 32, "dt": 0.05, "t_end": 0.5, "snapshot_every": 0.1
}"#;

#[test]
fn help_matches_golden() {
    let out = peskin(&["--help"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), include_str!("golden/help.txt"));
    let out = peskin(&["simulate", "--help"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), include_str!("golden/simulate_help.txt"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&peskin(&[])), 2);
    assert_eq!(code(&peskin(&["simulate", "--config", "x.json"])), 2);
    assert_eq!(code(&peskin(&["simulate", "--config", "x.json", "--out", "o", "--frobnicate"])), 2);
    assert_eq!(code(&peskin(&["dance"])), 2);
    assert_eq!(code(&peskin(&["--threads", "0", "verify-kernels", "--out", "o"])), 2);
}

#[test]
fn config_and_io_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write(tmp.path(), "bad.json", "{ not json");
    let out_dir = tmp.path().join("o").display().to_string();
    assert_eq!(code(&peskin(&["simulate", "--config", &bad, "--out", &out_dir])), 3);

    let unknown = write(tmp.path(), "unknown.json", &SMALL_RUN.replace("\"t_end\"", "\"t_stop\""));
    assert_eq!(code(&peskin(&["simulate", "--config", &unknown, "--out", &out_dir])), 3);

    let small_m = write(tmp.path(), "m.json", &SMALL_RUN.replace("\"M\": 32", "\"M\": 16"));
    assert_eq!(code(&peskin(&["simulate", "--config", &small_m, "--out", &out_dir])), 3);

    let missing = tmp.path().join("missing.json").display().to_string();
    assert_eq!(code(&peskin(&["simulate", "--config", &missing, "--out", &out_dir])), 4);
}

#[test]
fn zero_data_run_is_constant() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "zero.json",
        &SMALL_RUN.replace("\"amplitude\": 0.002", "\"amplitude\": 0.0"),
    );
    let out_dir = tmp.path().join("run");
    let out = peskin(&["simulate", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("diagnostics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,abs_a2,abs_a3,abs_a-1,l2_Y,linf_Yprime,a0_re,a0_im,a1_re,a1_im"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert!(r[1..].iter().all(|&x| x.abs() < 1e-15), "{r:?}");
    }
}

#[test]
fn simulate_is_reproducible_and_manifested() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.json", SMALL_RUN);
    let dirs = ["a", "b"].map(|d| tmp.path().join(d));
    for (d, threads) in dirs.iter().zip(["1", "3"]) {
        let out = peskin(&["--threads", threads, "simulate", "--config", &cfg, "--out", d.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let read = |d: &Path, n: &str| fs::read(d.join(n)).unwrap();
    assert_eq!(read(&dirs[0], "diagnostics.csv"), read(&dirs[1], "diagnostics.csv"));
    assert_eq!(read(&dirs[0], "snapshot_00005.json"), read(&dirs[1], "snapshot_00005.json"));

    let manifest: serde_json::Value = serde_json::from_slice(&read(&dirs[0], "manifest.json")).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["config"]["K"], 8);
    let outputs = manifest["outputs"].as_object().unwrap();
    assert_eq!(outputs.len(), 8); // 6 snapshots, diagnostics, summary
    for name in outputs.keys() {
        assert!(dirs[0].join(name).exists(), "{name}");
    }
}

#[test]
fn cli_overrides_apply() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.json", SMALL_RUN);
    let out_dir = tmp.path().join("run");
    let out = peskin(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
        "--init",
        r#"{"kind":"single_mode","k":3,"amplitude":[1e-4,0.0]}"#,
        "--snapshot-every",
        "0.25",
        "--watch-modes",
        "3,-1",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("diagnostics.csv")).unwrap();
    assert!(csv.starts_with("t,abs_a3,abs_a-1,l2_Y"));
    assert_eq!(csv.lines().count(), 4);
    let first: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[1], 1e-4);
}

#[test]
fn norms_and_fit_read_a_trajectory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "decay.json",
        r#"{"law": {"law": "hookean"}, "init": {"kind": "single_mode", "k": 2, "amplitude": [1e-3, 0.0]},
            "K": 8, "M": 32, "t_end": 10.0, "snapshot_every": 0.5, "watch_modes": [2]}"#,
    );
    let traj = tmp.path().join("traj");
    assert_eq!(code(&peskin(&["simulate", "--config", &cfg, "--out", traj.to_str().unwrap()])), 0);

    let norms = tmp.path().join("norms");
    assert_eq!(
        code(&peskin(&["measure-norms", "--input", traj.to_str().unwrap(), "--out", norms.to_str().unwrap()])),
        0
    );
    let csv = fs::read_to_string(norms.join("norms.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,s_norm,z1,z2,w");
    let row0: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row0[3], "inf");

    let fit_dir = tmp.path().join("fit");
    assert_eq!(
        code(&peskin(&["fit-decay", "--input", traj.to_str().unwrap(), "--out", fit_dir.to_str().unwrap()])),
        0
    );
    let fit: serde_json::Value = serde_json::from_slice(&fs::read(fit_dir.join("fit.json")).unwrap()).unwrap();
    let rate = fit["rate"].as_f64().unwrap();
    assert!((rate - 0.25).abs() < 0.0025, "{rate}");

    let short_cfg = write(tmp.path(), "short.json", &fs::read_to_string(&cfg).unwrap().replace("10.0", "1.0"));
    let short = tmp.path().join("short");
    assert_eq!(code(&peskin(&["simulate", "--config", &short_cfg, "--out", short.to_str().unwrap()])), 0);
    let out = peskin(&["fit-decay", "--input", short.to_str().unwrap(), "--out", fit_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 13);
}

#[test]
fn model_errors_have_their_own_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("o").display().to_string();
    let geometry = write(
        tmp.path(),
        "geom.json",
        r#"{"law": {"law": "hookean", "r_min": 0.001, "r_max": 1000.0},
            "init": {"kind": "single_mode", "k": -1, "amplitude": [0.995, 0.0]},
            "K": 4, "M": 16, "t_end": 1.0}"#,
    );
    assert_eq!(code(&peskin(&["simulate", "--config", &geometry, "--out", &out_dir])), 10);

    let domain = write(
        tmp.path(),
        "domain.json",
        r#"{"law": {"law": "cubic"}, "init": {"kind": "single_mode", "k": 3, "amplitude": [0.5, 0.0]},
            "K": 4, "M": 16, "t_end": 1.0}"#,
    );
    assert_eq!(code(&peskin(&["simulate", "--config", &domain, "--out", &out_dir])), 11);
}

#[test]
fn linear_spectrum_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "spec.json", r#"{"law": {"law": "cubic"}, "m_max": 6}"#);
    let out_dir = tmp.path().join("spec");
    assert_eq!(code(&peskin(&["linear-spectrum", "--config", &cfg, "--out", out_dir.to_str().unwrap()])), 0);
    let csv = fs::read_to_string(out_dir.join("spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "m,lambda1,lambda2,decay_rate");
    let m3: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    // cubic law at the unit circle: A = B̃ = 2, so −8𝒢 has 2A(m−1) and 2(A+B̃)(m−1)
    assert_eq!(m3[0], 3.0);
    let mut eig = [m3[1], m3[2]];
    eig.sort_by(f64::total_cmp);
    assert!((eig[0] - 8.0).abs() < 1e-12 && (eig[1] - 16.0).abs() < 1e-12, "{eig:?}");
    assert!((m3[3] - 1.0).abs() < 1e-12);
}

#[test]
fn linearization_reports() {
    let tmp = tempfile::tempdir().unwrap();
    for law in ["hookean", "cubic"] {
        let cfg = write(tmp.path(), "lin.json", &format!(r#"{{"law": {{"law": "{law}"}}}}"#));
        let out_dir = tmp.path().join(law);
        let out = peskin(&["verify-linearization", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let report: serde_json::Value =
            serde_json::from_slice(&fs::read(out_dir.join("linearization.json")).unwrap()).unwrap();
        assert_eq!(report["pass"], true);
        assert!(report["linearization"]["max_rel_err"].as_f64().unwrap() <= 1e-6);
    }
    let broken = write(tmp.path(), "broken.json", r#"{"law": {"law": "power", "p": -0.5}}"#);
    let out_dir = tmp.path().join("broken");
    let out = peskin(&["verify-linearization", "--config", &broken, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 11);
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(out_dir.join("linearization.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
    assert!(!report["structure"]["violations"].as_array().unwrap().is_empty());
}

#[test]
fn verify_kernels_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("k");
    let out = peskin(&["verify-kernels", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out_dir.join("kernels.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert!(out_dir.join("manifest.json").exists());
}
