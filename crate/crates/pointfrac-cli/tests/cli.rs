use std::path::Path;
use std::process::{Command, Output};

use num_complex::Complex64;
use pointfrac::io::{read_profile, write_profile};
use pointfrac::params::Extended;
use pointfrac::radial::{make_grid, GridSpec, RadialFunction};
use pointfrac::spectral::bound_state_3d;

fn pointfrac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pointfrac")).args(args).env_remove("POINTFRAC_GRID").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn field(line: &str, i: usize) -> f64 {
    line.split(',').nth(i).unwrap().parse().unwrap()
}

/// Gaussian source on a 3D grid, written with its sidecar.
fn source(dir: &Path) -> (std::path::PathBuf, RadialFunction) {
    let grid = make_grid(GridSpec { r_min: 1e-4, r_max: 1e3, count: 1024 }, 3).unwrap();
    let h = RadialFunction::from_fn(&grid, |r| Complex64::new((-r * r).exp(), 0.0), Vec::new()).unwrap();
    let path = dir.join("h.csv");
    write_profile(&h, &path).unwrap();
    (path, h)
}

#[test]
fn constants_reports_singularity_constant() {
    let o = pointfrac(&["constants", "--d", "3", "--s", "2"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.starts_with("name,value,oracle,rel_deviation\n"));
    let line = text.lines().find(|l| l.starts_with("singularity_constant,")).unwrap();
    assert!((field(line, 1) - 1.0 / (4.0 * std::f64::consts::PI)).abs() < 1e-12);
    assert!(field(line, 3) < 1e-8);
}

#[test]
fn constants_one_dimensional_rows() {
    let o = pointfrac(&["constants", "--d", "1", "--s", "1.2", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["meta"]["command"], "constants");
    let rows = v["data"].as_array().unwrap();
    let theta = rows.iter().find(|r| r["name"] == "theta").unwrap();
    assert!(theta["rel_deviation"].as_f64().unwrap() < 1e-8);
}

#[test]
fn constants_rejects_bad_input() {
    assert_eq!(code(&pointfrac(&["constants", "--d", "1", "--s", "1"])), 2);
    assert_eq!(code(&pointfrac(&["constants", "--d", "3", "--s", "2", "--bogus"])), 2);
    assert_eq!(code(&pointfrac(&["constants", "--d", "3", "--s", "-1"])), 2);
}

#[test]
fn resolvent_pole_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let (input, _) = source(dir.path());
    let star = -bound_state_3d(Extended::Finite(-2.0), 1.8).unwrap().eigenvalue.unwrap();
    let lam = format!("{star:.15e}");
    let out = dir.path().join("u.csv");
    let o = pointfrac(&[
        "resolvent", "--family", "homogeneous-k", "--d", "3", "--s", "1.8", "--lambda", &lam,
        "--param", "alpha", "--alpha", "-2", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
    let err = String::from_utf8(o.stderr).unwrap();
    let printed: f64 = err.trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!((printed - star).abs() < 1e-9 * star);
}

#[test]
fn resolvent_infinite_alpha_is_free_resolvent() {
    let dir = tempfile::tempdir().unwrap();
    let (input, h) = source(dir.path());
    let out = dir.path().join("u.csv");
    let o = pointfrac(&[
        "resolvent", "--family", "classic-h", "--d", "3", "--s", "2", "--lambda", "1.5",
        "--param", "alpha", "--alpha", "inf", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("krein_scalar 0.000000000000e+00\n"));
    assert!(dir.path().join("u.regular.csv").exists());
    assert!(dir.path().join("u.element.json").exists());
    let u = read_profile(&out, 3).unwrap();
    for (i, v) in u.values.iter().enumerate() {
        let r = u.grid.nodes[i];
        let want = h.values[i] / (r * r + 1.5);
        assert!((v - want).norm() <= 1e-11 * want.norm().max(1e-300), "r = {r}");
    }
}

#[test]
fn resolvent_verify_round_trips_every_family() {
    let dir = tempfile::tempdir().unwrap();
    let (input, _) = source(dir.path());
    let cases: [&[&str]; 4] = [
        &["--family", "classic-h", "--s", "2", "--param", "alpha", "--alpha", "0.3"],
        &["--family", "homogeneous-k", "--s", "1.8", "--param", "alpha", "--alpha", "-0.5"],
        &["--family", "homogeneous-k", "--s", "2.2", "--param", "tau", "--tau", "0.7", "--tau-lambda", "2"],
        &["--family", "inhomogeneous-d", "--s", "1.8", "--param", "tau", "--tau", "-1.2"],
    ];
    for (i, case) in cases.iter().enumerate() {
        let out = dir.path().join(format!("u{i}.csv"));
        let mut args = vec!["resolvent", "--d", "3", "--lambda", "1", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap(), "--verify"];
        args.extend_from_slice(case);
        let o = pointfrac(&args);
        assert_eq!(code(&o), 0, "{case:?}: {}", String::from_utf8_lossy(&o.stderr));
        let text = stdout(&o);
        let residual: f64 = text.lines().find_map(|l| l.strip_prefix("inverse_pair_residual ")).unwrap().parse().unwrap();
        assert!(residual < 1e-8, "{case:?}: {residual}");
    }
}

#[test]
fn resolvent_rejects_bad_parametrization() {
    let dir = tempfile::tempdir().unwrap();
    let (input, _) = source(dir.path());
    let out = dir.path().join("u.csv");
    let base = ["resolvent", "--d", "3", "--lambda", "1", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()];
    let run = |extra: &[&str]| {
        let mut a = base.to_vec();
        a.extend_from_slice(extra);
        code(&pointfrac(&a))
    };
    assert_eq!(run(&["--family", "classic-h", "--s", "2", "--param", "alpha", "--alpha", "1", "--tau", "1"]), 2);
    assert_eq!(run(&["--family", "classic-h", "--s", "2", "--param", "tau", "--alpha", "1"]), 2);
    assert_eq!(run(&["--family", "inhomogeneous-d", "--s", "1.8", "--param", "alpha", "--alpha", "1"]), 2);
    assert_eq!(run(&["--family", "classic-h", "--s", "2", "--param", "alpha", "--alpha", "x"]), 2);
    // the input grid is 3D
    let o = pointfrac(&[
        "resolvent", "--family", "homogeneous-k", "--d", "1", "--s", "1.2", "--lambda", "1", "--param", "alpha", "--alpha", "1",
        "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn figure1_default_sweep() {
    let a = pointfrac(&["figure1"]);
    assert_eq!(code(&a), 0);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("tau,E_tau,reference_tau,error"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 50);
    for l in &rows {
        let tau = field(l, 0);
        let e = field(l, 1);
        assert!(e < tau, "{l}");
    }
    assert_eq!(stdout(&pointfrac(&["figure1"])), text);
}

#[test]
fn figure1_edges() {
    let one = pointfrac(&["figure1", "--points", "1"]);
    assert_eq!(code(&one), 0);
    assert_eq!(stdout(&one).lines().count(), 2);
    assert_eq!(code(&pointfrac(&["figure1", "--tau-max", "0"])), 2);
    assert_eq!(code(&pointfrac(&["figure1", "--points", "0"])), 2);
    let j = pointfrac(&["figure1", "--points", "3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&j)).unwrap();
    assert_eq!(v["meta"]["command"], "figure1");
    assert_eq!(v["data"].as_array().unwrap().len(), 3);
}

#[test]
fn verify_suites_and_exit_codes() {
    let o = pointfrac(&["verify", "kernels"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["meta"]["params"]["passed"], v["meta"]["params"]["total"]);
    assert_eq!(code(&pointfrac(&["verify", "krein", "--tol-scale", "1e-9"])), 1);
    let bad = Command::new(env!("CARGO_BIN_EXE_pointfrac")).args(["verify", "kernels"]).env("POINTFRAC_GRID", "1,0,5").output().unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    let o = pointfrac(&["constants", "--d", "3", "--s", "2", "-o", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout(&pointfrac(&["constants", "--d", "3", "--s", "2"])));
}
