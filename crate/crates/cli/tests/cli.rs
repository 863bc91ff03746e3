// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

fn qlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlab"))
        .args(args)
        .current_dir(dir)
        .env_remove("QTHESIS_SEED")
        .output()
        .expect("spawn qlab")
}

fn manifest(out: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let last = stderr.lines().last().expect("manifest line");
    serde_json::from_str(last).expect("manifest is JSON")
}

#[test]
fn eur_bound_default_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = qlab(&["eur-bound"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("theta_rho,theta_a,theta_f,s,h_i,h_af"));
    assert_eq!(lines.count(), 1);
    let m = manifest(&out);
    assert_eq!(m["status"], "ok");
    assert_eq!(m["command"], "eur-bound");
}

#[test]
fn eur_bound_grid_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = qlab(&["eur-bound", "--grid", "5", "--out", "b.json"], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("b.json")).unwrap()).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 25);
    assert!(rows.iter().all(|r| r["satisfied"] == true));
}

#[test]
fn pulse_compile_writes_full_qseq() {
    let dir = tempfile::tempdir().unwrap();
    let out = qlab(
        &[
            "pulse-compile",
            "--steps",
            "51",
            "--points",
            "8192",
            "--out",
            "rabi.qseq",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let bytes = std::fs::read(dir.path().join("rabi.qseq")).unwrap();
    assert_eq!(bytes.len(), 14 + 12 * 51 * 8192 * 4);
    assert_eq!(&bytes[..4], b"QSEQ");
    let cl = qlab_core::pulse::decode(&bytes).unwrap();
    assert_eq!((cl.steps(), cl.points()), (51, 8192));
}

#[test]
fn pulse_compile_csv_per_port() {
    let dir = tempfile::tempdir().unwrap();
    let out = qlab(
        &[
            "pulse-compile",
            "--steps",
            "4",
            "--points",
            "8192",
            "--out",
            "rabi.csv",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(manifest(&out)["outputs"].as_array().unwrap().len(), 12);
    let cl = qlab_core::pulse::read_csv(dir.path(), "rabi").unwrap();
    assert_eq!(cl.steps(), 4);
}

#[test]
fn pulse_compile_rejects_non_power_of_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = qlab(
        &["pulse-compile", "--points", "8000", "--out", "x.qseq"],
        dir.path(),
    );
    assert!(!out.status.success());
    assert!(!dir.path().join("x.qseq").exists());
}

#[test]
fn ft_check_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "ft-check",
        "--protocol",
        "acof",
        "--shots",
        "100000",
        "--seed",
        "9",
    ];
    let a = qlab(&args, dir.path());
    let b = qlab(&args, dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("# accepted: "));
    assert!(text.contains("# second_law_ok: "));
}

#[test]
fn results_do_not_depend_on_workers() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<u8>> = ["1", "2", "8"]
        .iter()
        .map(|jobs| {
            let out = qlab(
                &[
                    "traj-ensemble",
                    "--protocol",
                    "cof",
                    "--shots",
                    "20000",
                    "--seed",
                    "4",
                    "--jobs",
                    jobs,
                ],
                dir.path(),
            );
            assert!(out.status.success());
            out.stdout
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn seed_changes_output_and_env_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["traj-ensemble", "--shots", "1000"];
    let s1 = qlab(&[&base[..], &["--seed", "1"]].concat(), dir.path());
    let s2 = qlab(&[&base[..], &["--seed", "2"]].concat(), dir.path());
    assert_ne!(s1.stdout, s2.stdout);
    let env = Command::new(env!("CARGO_BIN_EXE_qlab"))
        .args([&base[..], &["--seed", "2"]].concat())
        .current_dir(dir.path())
        .env("QTHESIS_SEED", "1")
        .output()
        .unwrap();
    assert_eq!(env.stdout, s1.stdout);
    assert_eq!(manifest(&env)["seed"], 1);
}

#[test]
fn invalid_seed_env_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qlab"))
        .args(["eur-bound"])
        .current_dir(dir.path())
        .env("QTHESIS_SEED", "minus one")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dry_run_validates_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = qlab(
        &["eur-sim", "--grid", "13", "--dry-run", "--out", "sim.csv"],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(!dir.path().join("sim.csv").exists());
    assert_eq!(manifest(&out)["dry_run"], true);
}

#[test]
fn exit_codes_separate_config_and_runtime_errors() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.json"),
        r#"{"shots": 100000, "colour": "blue"}"#,
    )
    .unwrap();
    let unknown_key = qlab(&["traj-ensemble", "bad.json"], dir.path());
    assert_eq!(unknown_key.status.code(), Some(2));
    let few_shots = qlab(&["eur-sim", "--shots", "10"], dir.path());
    assert_eq!(few_shots.status.code(), Some(2));
    let zero_jobs = qlab(&["eur-bound", "--jobs", "0"], dir.path());
    assert_eq!(zero_jobs.status.code(), Some(2));

    std::fs::write(dir.path().join("flat.csv"), "g_splitting\n20\n20\n20\n20\n").unwrap();
    let degenerate = qlab(&["tls-fit", "--input", "flat.csv"], dir.path());
    assert_eq!(degenerate.status.code(), Some(1));
    assert_eq!(manifest(&degenerate)["status"], "error");
}

#[test]
fn jc_spectrum_resonant_doublet() {
    let dir = tempfile::tempdir().unwrap();
    let out = qlab(&["jc-spectrum", "--out", "jc.json"], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("jc.json")).unwrap()).unwrap();
    let f: Vec<f64> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["frequency"].as_f64().unwrap())
        .collect();
    assert!((f[2] - f[1] - 0.2).abs() < 1e-9);
}

#[test]
fn transmon_roundtrip_through_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let out = qlab(
        &[
            "transmon", "--e-j", "15", "--e-c", "0.3", "--format", "json",
        ],
        dir.path(),
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let row = &v["rows"][0];
    let (f01, f12) = (row["f01"].as_f64().unwrap(), row["f12"].as_f64().unwrap());
    let back = qlab(
        &[
            "transmon",
            "--f01",
            &f01.to_string(),
            "--f12",
            &f12.to_string(),
            "--format",
            "json",
        ],
        dir.path(),
    );
    let w: serde_json::Value = serde_json::from_slice(&back.stdout).unwrap();
    assert!((w["rows"][0]["e_j"].as_f64().unwrap() - 15.0).abs() < 1e-9);
    assert!((w["rows"][0]["e_c"].as_f64().unwrap() - 0.3).abs() < 1e-9);
}

#[test]
fn jj_models_run_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    for model in [
        "josephson",
        "wkb",
        "simmons",
        "ambegaokar_baratoff",
        "cabrera_mott",
        "mott",
        "multilayer",
    ] {
        let out = qlab(&["jj-model", "--model", model], dir.path());
        assert!(
            out.status.success(),
            "{model}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let out = qlab(&["jj-model", "--model", "no_such_model"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn jj_layer_fit_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("device_id,n_layers,resistance\n");
    for n in 1..=6u32 {
        let r = qlab_core::junction::multilayer_resistance(n, 10e3, 1e3, 2.0, false).unwrap();
        csv.push_str(&format!("d{n},{n},{r}\n"));
    }
    std::fs::write(dir.path().join("layers.csv"), csv).unwrap();
    std::fs::write(
        dir.path().join("fit.json"),
        r#"{"model": "layer_fit", "input": "layers.csv"}"#,
    )
    .unwrap();
    let out = qlab(&["jj-model", "fit.json", "--format", "json"], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rows"][0]["devices"], 6);
}

#[test]
fn tls_fit_recovers_synthetic_density() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("tls.json"),
        r#"{"synthetic": {"n": 2000, "sigma": 0.5, "g_max": 60.0}}"#,
    )
    .unwrap();
    let out = qlab(
        &["tls-fit", "tls.json", "--format", "json", "--seed", "11"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let sigma = v["rows"][0]["sigma"].as_f64().unwrap();
    assert!((sigma / 0.5 - 1.0).abs() < 0.1, "sigma = {sigma}");
}
