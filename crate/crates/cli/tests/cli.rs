use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bosetunnel"));
    c.env_remove("BOSETUNNEL_OUT_DIR");
    c
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../configs/{name}.toml"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn unknown_arguments_exit_one() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["simulate"]).status.code(), Some(1));
}

#[test]
fn invalid_config_exits_one_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[scenario]\nname = \"bad\"\n\n[system]\nn = 0\n").unwrap();
    let out = run(&["optimize", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("system.n") && err.contains("line 5"), "{err}");
}

#[test]
fn optimize_writes_csv_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "optimize",
        "--config",
        config("fig1_asymmetric").to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let root = dir.path().join("fig1_asymmetric");
    for f in ["trajectory.csv", "learning_curve.csv", "learned.json"] {
        assert!(root.join(f).is_file(), "{f}");
    }
    let learned: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(root.join("learned.json")).unwrap()).unwrap();
    let alpha = learned["learned"]["alpha"].as_f64().unwrap();
    assert!((alpha + 2.0).abs() < 0.05);
    assert_eq!(learned["learned"]["rho_a"].as_array().unwrap().len(), 8);
}

#[test]
fn out_dir_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env("BOSETUNNEL_OUT_DIR", dir.path())
        .args([
            "simulate",
            "--config",
            config("fig1_uncoupled").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("fig1_uncoupled/trajectory.csv").is_file());
}

#[test]
fn json_export_converts_back_to_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let cfg = config("fig1_time_min");
    let out = run(&[
        "optimize",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        d,
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let json = dir.path().join("fig1_time_min/result.json");
    assert!(json.is_file());

    let csv_dir = dir.path().join("csv");
    let out = run(&[
        "export",
        "--input",
        json.to_str().unwrap(),
        "--out-dir",
        csv_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(csv_dir.join("fig1_time_min/trajectory.csv")).unwrap();
    assert!(text.starts_with("t,prob,prob_baseline\n"));
}

#[test]
fn seed_flag_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("fig1_time_min");
    let mut files = Vec::new();
    for (i, seed) in ["3", "3", "4"].iter().enumerate() {
        let d = dir.path().join(i.to_string());
        let out = run(&[
            "optimize",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            seed,
            "--out-dir",
            d.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        files.push(std::fs::read(d.join("fig1_time_min/learned.json")).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_ne!(files[0], files[2]);
}

#[test]
fn oracle_prints_closed_forms() {
    let out = run(&[
        "oracle",
        "two-level",
        "--delta",
        "0",
        "--gamma",
        "1",
        "--times",
        "0,1.5707963267948966",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "t,prob");
    let p: f64 = rows[2].split(',').nth(1).unwrap().parse().unwrap();
    assert!((p - 1.0).abs() < 1e-12);

    let out = run(&["oracle", "coupling", "--n-a", "1", "--k", "0"]);
    assert_eq!(stdout(&out).trim().parse::<f64>().unwrap(), 2.0);

    let out = run(&["oracle", "stationary", "--n-s", "4"]);
    assert_eq!(stdout(&out).trim().parse::<f64>().unwrap(), 0.2);

    let out = run(&[
        "oracle",
        "symmetric",
        "--alpha",
        "-0.5",
        "--n-a",
        "2",
        "--k",
        "1",
        "--t-max",
        "1",
        "--points",
        "5",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 5);

    let out = run(&["oracle", "coupling", "--n-a", "2", "--k", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_writes_cells_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.toml");
    let src = std::fs::read_to_string(config("fig1_asymmetric"))
        .unwrap()
        .replace("name = \"fig1_asymmetric\"", "name = \"grid\"")
        + "\n[sweep]\nn_s = [1]\nn_a = [1, 2]\n";
    std::fs::write(&path, src).unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "sweep",
        "--config",
        path.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = std::fs::read_to_string(out_dir.join("grid/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(out_dir.join("grid/ns1_na2/trajectory.csv").is_file());
}

#[test]
fn failed_sweep_cell_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.toml");
    let src = std::fs::read_to_string(config("fig1_asymmetric"))
        .unwrap()
        .replace("name = \"fig1_asymmetric\"", "name = \"grid\"")
        .replace(
            "init = \"all_left\"",
            "init = { vector = [[1.0, 0.0], [0.0, 0.0]] }",
        )
        + "\n[sweep]\nn_s = [1]\nn_a = [1, 2]\n";
    std::fs::write(&path, src).unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "sweep",
        "--config",
        path.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let summary = std::fs::read_to_string(out_dir.join("grid/summary.csv")).unwrap();
    assert!(summary.lines().nth(2).unwrap().contains("error"));
}
