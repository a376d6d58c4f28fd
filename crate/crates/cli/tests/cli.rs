use std::path::Path;
use std::process::{Command, Output};

fn anivem(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anivem")).current_dir(dir).env_remove("ANIVEM_THREADS").args(args).output().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_patch_test_writes_summary_and_vtk() {
    let dir = tempfile::tempdir().unwrap();
    let out = anivem(dir.path(), &["solve", "--problem", "patch-linear", "--mesh", "cube", "--n", "2", "--tol", "1e-14"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(&dir.path().join("summary.json"));
    assert!(s["energy_error"].as_f64().unwrap() <= 1e-9);
    assert!(s["l2_error"].as_f64().unwrap() <= 1e-9);
    assert_eq!(s["ndof"], 27);
    let vtk = std::fs::read_to_string(dir.path().join("solution.vtk")).unwrap();
    assert!(vtk.contains("SCALARS u ") && vtk.contains("SCALARS material"));
}

#[test]
fn gen_then_check_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = anivem(dir.path(), &["gen", "--kind", "cutplane", "--n", "2", "--plane", "1,1,1,1.5001", "--out", "m.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = anivem(dir.path(), &["check", "--mesh", "m.json", "--eps", "1.0", "--out", "r.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&dir.path().join("r.json"));
    let cells = json(&dir.path().join("m.json"))["cells"].as_array().unwrap().len();
    assert_eq!(r["reports"].as_array().unwrap().len(), cells);
    assert_eq!(r["valid"], true);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("  cell"));
}

#[test]
fn check_fails_with_code_two_on_broken_mesh() {
    let dir = tempfile::tempdir().unwrap();
    assert!(anivem(dir.path(), &["gen", "--mesh", "cube", "--n", "2"]).status.success());
    let mut m = json(&dir.path().join("mesh.json"));
    m["vertices"][0][2] = serde_json::json!(0.1);
    std::fs::write(dir.path().join("bad.json"), m.to_string()).unwrap();
    let out = anivem(dir.path(), &["check", "--mesh", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("face") || err.contains("cell"), "{err}");
    assert_eq!(json(&dir.path().join("report.json"))["valid"], false);
}

#[test]
fn errors_exit_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["gen", "--mesh", "hexagons"][..],
        &["solve", "--config", "missing.toml"],
        &["converge", "--mesh", "cube", "--levels", "2"],
        &["solve", "--mesh", "cube", "--problem", "sphere-interface"],
        &["gen", "--mesh", "notch", "--notch-depth", "0.9"],
        &["solve", "--mesh", "cube", "--beta-plus=-1"],
        &["solve", "--no-such-flag"],
    ] {
        let out = anivem(dir.path(), args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error"), "{args:?}");
    }
    let out = Command::new(env!("CARGO_BIN_EXE_anivem")).current_dir(dir.path()).env("ANIVEM_THREADS", "0").args(["gen"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_files_layer_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), "mesh = \"tet\"\nn = 1\nproblem = \"patch-linear\"\ntol = 1e-14\nout = \"t.vtk\"\n").unwrap();
    let out = anivem(dir.path(), &["solve", "--config", "run.toml", "--n", "2", "--summary", "s.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(&dir.path().join("s.json"));
    assert_eq!(s["mesh"], "tet");
    assert_eq!(s["n"], 2);
    assert!(dir.path().join("t.vtk").exists());

    std::fs::write(dir.path().join("run.json"), r#"{"mesh": "notch", "n": 1, "out": "n.json"}"#).unwrap();
    assert!(anivem(dir.path(), &["gen", "--config", "run.json"]).status.success());
    assert!(dir.path().join("n.json").exists());

    std::fs::write(dir.path().join("bad.toml"), "mesh = \"cube\"\nbogus = 1\n").unwrap();
    assert_eq!(anivem(dir.path(), &["gen", "--config", "bad.toml"]).status.code(), Some(1));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["converge", "--mesh", "tet", "--n", "1", "--levels", "3"];
    let a = anivem(dir.path(), &args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let first = std::fs::read(dir.path().join("table.csv")).unwrap();
    let b = Command::new(env!("CARGO_BIN_EXE_anivem")).current_dir(dir.path()).env("ANIVEM_THREADS", "1").args(args).output().unwrap();
    assert!(b.status.success());
    assert_eq!(std::fs::read(dir.path().join("table.csv")).unwrap(), first);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("level,h,ndof,energy_err,energy_order,l2_err,l2_order\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn ife_patch_on_plane_interface() {
    let dir = tempfile::tempdir().unwrap();
    let out = anivem(
        dir.path(),
        &["solve", "--mesh", "plane-interface", "--problem", "patch-ife", "--plane", "0.3,-0.5,0.8,0.11", "--beta-minus", "10", "--n", "3", "--tol", "1e-14"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(&dir.path().join("summary.json"));
    assert!(s["energy_error"].as_f64().unwrap() <= 1e-9);
}
