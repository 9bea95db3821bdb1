use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_orthohaptic"));
    cmd.env_remove("ORTHOHAPTIC_OUT_DIR");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn value_after<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap_or_else(|| panic!("no `{key}` in {text}"))
        .trim()
}

#[test]
fn ik_prints_joint_values() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "d.cfg", "L = 1\nrho_min = 0.1\nrho_max = 1.9\n");
    let out = run(&["ik", "--config", &cfg, "--pose", "0.1,0,0,0,0,0"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(value_after(&text, "rho = "), "1.1 0.994987437 0.994987437");
    assert_eq!(value_after(&text, "gamma_deg = "), "0 0 0");
}

#[test]
fn fk_inverts_ik() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "d.cfg", "wrist = spherical\n");
    let out = run(&["ik", "--config", &cfg, "--pose", "0.05,-0.1,0.2,10,-5,20"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let rho = value_after(&text, "rho = ").replace(' ', ",");
    let gamma = value_after(&text, "gamma_deg = ").replace(' ', ",");
    let out = run(&["fk", "--config", &cfg, "--joints", &format!("{rho},{gamma}")]);
    assert!(out.status.success(), "{}", stderr(&out));
    let p: Vec<f64> = value_after(&stdout(&out), "p = ")
        .split(' ')
        .map(|s| s.parse().unwrap())
        .collect();
    for (a, b) in p.iter().zip([0.05, -0.1, 0.2]) {
        assert!((a - b).abs() < 1e-7, "{p:?}");
    }
}

#[test]
fn unknown_key_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "d.cfg", "L = 1\nlegs = 4\n");
    let out = run(&["fk", "--config", &cfg, "--joints", "1,1,1,0,0,0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`legs`"), "{}", stderr(&out));
}

#[test]
fn unreachable_pose_exits_with_kinematic_code() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "d.cfg", "");
    let out = run(&["ik", "--config", &cfg, "--pose", "0,1.5,0,0,0,0"]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["ik", "--config", &cfg, "--pose", "0,0,x,0,0,0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`x`"));
}

#[test]
fn check_is_deterministic_and_honours_scale() {
    let a = run(&["check"]);
    let b = run(&["check"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains(" 0 failed"));

    let z = run(&["check", "--tol-scale", "0"]);
    assert_eq!(z.status.code(), Some(3));
    assert!(stdout(&z).contains("FAIL"));

    let one = run(&["check", "--suite", "transmission"]);
    assert!(one.status.success());
    assert_eq!(stdout(&one).lines().filter(|l| l.starts_with("PASS")).count(), 1);
    assert_eq!(run(&["check", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn workspace_map_at_home() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "d.cfg", "");
    let csv = dir.path().join("map.csv");
    let out = run(&[
        "workspace-map",
        "--config",
        &cfg,
        "--out",
        csv.to_str().unwrap(),
        "--grid",
        "1",
        "--lo",
        "0",
        "--hi",
        "0",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        fs::read_to_string(&csv).unwrap(),
        "x,y,z,sigma_min,sigma_max,kappa,member\n0,0,0,1,1,1,true\n"
    );
}

#[test]
fn workspace_map_grid_size_and_members() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "d.cfg", "grid_n = 5\n");
    let csv = dir.path().join("map.csv");
    let out = run(&["workspace-map", "--config", &cfg, "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 125);
    // the box corners at +/-L are outside the reachable set
    assert!(rows[0].ends_with(",,,false"));
    assert!(rows.iter().any(|r| r.ends_with(",true")));
}

#[test]
fn transmission_table_has_one_row_per_step() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("t.csv");
    let out = run(&["transmission", "--beta", "30", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta_in_deg,theta_out_deg,speed_ratio"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 360);
    let expect_max = 1.0 / 30f64.to_radians().cos();
    let max = rows.iter().map(|r| r[2]).fold(0.0, f64::max);
    assert!((max - expect_max).abs() < 1e-12);
    assert!(stdout(&out).contains("speed_ratio_max = 1.15470054 at theta_in = 0 deg"));
    assert_eq!(run(&["transmission", "--beta", "95", "--out", "x.csv"]).status.code(), Some(2));
}

#[test]
fn optimize_result_reads_back_as_a_configuration() {
    let dir = TempDir::new().unwrap();
    let text = "# sizing input\nrequired_edge = 0.5\npsi = 2\n";
    let cfg = write_config(&dir, "in.cfg", text);
    let result = dir.path().join("sized.cfg");
    let out = run(&["optimize", "--config", &cfg, "--out", result.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(fs::read_to_string(&cfg).unwrap(), text);
    let first = stdout(&out);
    assert_eq!(value_after(&first, "L = "), "0.785644531");

    // sizing the sized design again reproduces it exactly
    let again = run(&["optimize", "--config", result.to_str().unwrap()]);
    assert!(again.status.success(), "{}", stderr(&again));
    assert_eq!(stdout(&again), first.replace(&format!("wrote {}\n", result.display()), ""));

    // and its cube really holds the required edge
    let cube = run(&["cube", "--config", result.to_str().unwrap()]);
    assert!(cube.status.success(), "{}", stderr(&cube));
    let edge: f64 = value_after(&stdout(&cube), "edge = ").parse().unwrap();
    assert!(edge >= 0.5 - 1e-6, "{edge}");
}

#[test]
fn optimize_without_an_edge_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "d.cfg", "");
    assert_eq!(run(&["optimize", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(
        run(&["optimize", "--config", &cfg, "--edge", "0.5"]).status.code(),
        Some(0)
    );
}

#[test]
fn cube_refuses_to_overwrite_its_configuration() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "d.cfg", "L = 1\n");
    let out = run(&["cube", "--config", &cfg, "--out", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(fs::read_to_string(&cfg).unwrap(), "L = 1\n");
}

#[test]
fn cube_result_records_center_and_edge() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "d.cfg", "");
    let res = dir.path().join("cube.cfg");
    let out = run(&["cube", "--config", &cfg, "--out", res.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(value_after(&stdout(&out), "edge = "), "0.950337505");
    let text = fs::read_to_string(&res).unwrap();
    let edge: f64 = value_after(&text, "result.edge = ").parse().unwrap();
    assert!((edge - 0.950338).abs() < 1e-6);
    assert!(text.contains("result.center_x = -0.0669"));
}

#[test]
fn out_dir_override_applies_to_relative_paths() {
    let dir = TempDir::new().unwrap();
    let out = bin()
        .env("ORTHOHAPTIC_OUT_DIR", dir.path())
        .args(["transmission", "--beta", "10", "--steps", "4", "--out", "t.csv"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let written = dir.path().join("t.csv");
    assert_eq!(fs::read_to_string(&written).unwrap().lines().count(), 5);
    assert!(!Path::new("t.csv").exists());
}

#[test]
fn jacobian_at_home_is_isotropic() {
    let dir = TempDir::new().unwrap();
    for wrist in ["hybrid", "spherical"] {
        let cfg = write_config(&dir, "d.cfg", &format!("wrist = {wrist}\n"));
        let out = run(&["jacobian", "--config", &cfg]);
        assert!(out.status.success(), "{}", stderr(&out));
        let text = stdout(&out);
        assert_eq!(value_after(&text, "sigma_t = "), "1 1 1");
        assert_eq!(value_after(&text, "kappa_r = "), "1");
        assert_eq!(value_after(&text, "coupling_max = "), "0");
    }
}
