use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str], config: Option<&str>, dir: &Path, threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ricci-lab"));
    cmd.args(args);
    if let Some(text) = config {
        let path = dir.join("scenario.toml");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.env_remove("LAB_THREADS");
    if let Some(n) = threads {
        cmd.env("LAB_THREADS", n);
    }
    cmd.output().unwrap()
}

fn read(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

const ENERGY: &str = "family = \"warped-cylinder\"\ndelta = 1e-3\nseed = 5\ndt = 2e-3\nstride = 5\n";

#[test]
fn energy_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for (k, threads) in [None, Some("1"), Some("3")].into_iter().enumerate() {
        let out = tmp.path().join(format!("run{k}"));
        let o = lab(&["energy", "--out", out.to_str().unwrap()], Some(ENERGY), tmp.path(), threads);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        runs.push(read(&out));
    }
    assert!(runs[0].len() >= 4);
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);

    let (_, csv) = runs[0].iter().find(|(n, _)| n == "energy.csv").unwrap();
    let csv = String::from_utf8(csv.clone()).unwrap();
    assert_eq!(csv.lines().next(), Some("t,B_r,H_r,K_r,E_r"));
    assert!(csv.lines().skip(1).all(|l| l.split(',').count() == 5));
    let (_, dat) = runs[0].iter().find(|(n, _)| n == "e_r.dat").unwrap();
    let dat = String::from_utf8(dat.clone()).unwrap();
    assert!(dat.lines().skip(1).all(|l| l.split_whitespace().count() == 2));
}

#[test]
fn out_of_range_sigma_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = lab(&["energy", "--sigma", "1.5", "--out", out.to_str().unwrap()], None, tmp.path(), None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sigma"));
    assert!(!out.exists());
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lab(&["flow"], Some("sigmaa = 0.5\n"), tmp.path(), None);
    assert_eq!(o.status.code(), Some(2));
    let o = lab(&["flow", "--resolution", "48"], None, tmp.path(), None);
    assert_eq!(o.status.code(), Some(2));
    let o = lab(&["verify-identities"], Some("dim = 2\n"), tmp.path(), None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
    let o = lab(&["flow"], None, tmp.path(), Some("zero"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn identical_pair_has_vanishing_energy() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("u");
    let cfg = "family = \"sphere\"\nt_end = 0.1\ndt = 1e-3\n";
    let o = lab(&["uniqueness", "--out", out.to_str().unwrap()], Some(cfg), tmp.path(), None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let csv = std::fs::read_to_string(out.join("energy.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 10);
    for row in rows {
        let cols: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(&cols[1..], &[0.0; 4]);
    }
}

#[test]
fn differing_steps_fail_the_uniqueness_check() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("u");
    let cfg = "family = \"bumpy-cylinder\"\ndt = 0.01\ndt_tilde = 0.005\nstride = 1\n";
    let o = lab(&["uniqueness", "--out", out.to_str().unwrap()], Some(cfg), tmp.path(), None);
    assert_eq!(o.status.code(), Some(3));
    let summary = std::fs::read_to_string(out.join("summary.json")).unwrap();
    assert!(summary.contains("\"status\": \"fail\""));
}

#[test]
fn flow_past_extinction_is_a_breakdown() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "family = \"sphere\"\nt_end = 0.3\ndt = 1e-3\n";
    let o = lab(&["flow", "--out", tmp.path().join("f").to_str().unwrap()], Some(cfg), tmp.path(), None);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn planar_identity_suite_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("v");
    let cfg = "dim = 2\nresolution = 64\nsamples = 20\nresolutions = [32, 64, 128]\n";
    let o = lab(&["verify-identities", "--seed", "7", "--out", out.to_str().unwrap()], Some(cfg), tmp.path(), None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 6);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["checks_run"], 6);
    assert_eq!(summary["status"], "pass");
    assert_eq!(summary["config"]["seed"], 7);
}

#[test]
fn every_scenario_runs_a_check() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("flow", "family = \"sphere\"\nt_end = 0.2\ndts = [0.02, 0.01, 0.005]\n"),
        ("blowup-monitor", "family = \"sphere\"\nt_end = 0.2\nstride = 20\n"),
        ("convergence-study", "dts = [0.01, 0.005]\n"),
    ];
    for (k, (scenario, cfg)) in cases.iter().enumerate() {
        let out = tmp.path().join(format!("s{k}"));
        let o = lab(&[scenario, "--out", out.to_str().unwrap()], Some(cfg), tmp.path(), None);
        assert_eq!(o.status.code(), Some(0), "{scenario}: {}", String::from_utf8_lossy(&o.stdout));
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
        assert!(summary["checks_run"].as_u64().unwrap() >= 1, "{scenario}");
        assert!(read(&out).iter().any(|(n, _)| n.ends_with(".dat")), "{scenario}");
    }
}
