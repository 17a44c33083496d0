use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn bvlab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bvlab"))
        .args(args)
        .env("BVLAB_OUTPUT", out)
        .output()
        .expect("binary runs")
}

fn cfg(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

#[test]
fn shock_exit_writes_five_snapshots_under_output_root() {
    let dir = tempfile::tempdir().unwrap();
    let out = bvlab(dir.path(), &["run", &cfg("shock_exit.cfg")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("shock_exit");
    let snaps: Vec<_> = (0..5).map(|k| run.join(format!("u_{k}.csv"))).collect();
    assert!(snaps.iter().all(|p| p.exists()));
    assert!(!run.join("u_5.csv").exists());
    for t in ["0.000000", "0.250000", "0.500000", "0.750000", "1.000000"] {
        assert!(run.join(format!("trace_{t}.csv")).exists());
    }
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("run.json")).unwrap()).unwrap();
    assert_eq!(json["solver"], "hyperbolic");
    assert_eq!(json["status"]["state"], "completed");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["a", "b"] {
        let out = bvlab(&dir.path().join(sub), &["run", &cfg("ac_3.cfg")]);
        assert_eq!(out.status.code(), Some(0));
    }
    let a = dir.path().join("a/ac_3");
    let mut compared = 0;
    for entry in fs::read_dir(&a).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|x| x == "csv") {
            let other = dir.path().join("b/ac_3").join(p.file_name().unwrap());
            assert_eq!(fs::read(&p).unwrap(), fs::read(other).unwrap(), "{}", p.display());
            compared += 1;
        }
    }
    assert!(compared >= 10);
}

#[test]
fn config_errors_exit_with_two_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("shock_exit.cfg")).unwrap().replace("a = 1", "a = 1\nspeed = 3");
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, text).unwrap();
    let out = bvlab(dir.path(), &["run", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("speed"), "{err}");

    let missing = bvlab(dir.path(), &["run", "/nonexistent/x.cfg"]);
    assert_eq!(missing.status.code(), Some(2));
    let suite = bvlab(dir.path(), &["verify", "nonsense"]);
    assert_eq!(suite.status.code(), Some(2));
}

#[test]
fn convergence_without_oracle_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bvlab(dir.path(), &["convergence", &cfg("ac_6.cfg"), "--levels", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn convergence_and_limit_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = bvlab(dir.path(), &["convergence", &cfg("ac_10.cfg"), "--levels", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let rates = fs::read_to_string(dir.path().join("ac_10/rates.csv")).unwrap();
    let lines: Vec<&str> = rates.lines().collect();
    assert_eq!(lines[0], "N,l1_error,observed_order");
    assert_eq!(lines.len(), 4);
    for line in &lines[2..] {
        let order: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(order >= 0.5, "{line}");
    }

    let out = bvlab(dir.path(), &["limit", &cfg("ac_9.cfg"), "--eps", "0.1,0.05,0.025"]);
    assert_eq!(out.status.code(), Some(0));
    let table = fs::read_to_string(dir.path().join("ac_9/viscosity_limit.csv")).unwrap();
    let d: Vec<f64> = table.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(d.len(), 3);
    assert!(d[1] < d[0] && d[2] < d[1]);
}

#[test]
fn verify_geometry_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = bvlab(dir.path(), &["verify", "geometry"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().filter(|l| l.starts_with("PASS geometry/")).count() >= 8, "{text}");
}
