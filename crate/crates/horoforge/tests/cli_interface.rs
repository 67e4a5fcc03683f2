//! End-to-end tests of the `horoforge` binary: verbs, report schemas, exit
//! codes, and byte-determinism under a fixed seed.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_horoforge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("run.conf");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn distance_minsky_reference_value() {
    let out = run(&["distance", "i", "2i"]);
    let v = stdout_json(&out);
    assert_eq!(v["schema"], "horoforge/1");
    assert!((v["lower_bound"].as_f64().unwrap() - std::f64::consts::LN_2).abs() < 1e-5);
    assert!((v["oracle"].as_f64().unwrap() - std::f64::consts::LN_2).abs() < 1e-5);
    assert!(v["witness_count"].as_u64().unwrap() > 0);
}

#[test]
fn distance_euclidean_identical_points_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[run]\ngeometry = euclidean\n[euclidean]\ndim = 2\n");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "distance",
        "1.5,2.0",
        "1.5,2.0",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["lower_bound"].as_f64().unwrap(), 0.0);
    assert_eq!(v["oracle"].as_f64().unwrap(), 0.0);
}

#[test]
fn distance_torus_e1_reference_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[run]\ngeometry = torus-e1\n");
    let out = run(&["--config", cfg.to_str().unwrap(), "distance", "i", "2i"]);
    let v = stdout_json(&out);
    assert!((v["lower_bound"].as_f64().unwrap() - std::f64::consts::LN_2 / 2.0).abs() < 1e-5);
}

#[test]
fn reports_are_byte_identical_for_fixed_seed() {
    let a = run(&["--seed", "42", "distance", "0.3+1.1i", "1-0.5i"]);
    let b = run(&["--seed", "42", "distance", "0.3+1.1i", "1-0.5i"]);
    assert!(!a.status.success() || a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["--seed", "43", "distance", "0.3+1.1i", "1+0.5i"]);
    assert!(c.status.success());
}

#[test]
fn matrix_single_point_is_one_by_one_zero() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.txt");
    std::fs::write(&pts, "i\n").unwrap();
    let out = run(&["matrix", pts.to_str().unwrap()]);
    let v = stdout_json(&out);
    assert_eq!(v["lower_bounds"][0][0].as_f64().unwrap(), 0.0);
    assert_eq!(v["max_asymmetry"].as_f64().unwrap(), 0.0);
}

#[test]
fn matrix_minsky_pair_is_symmetric_csv() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.txt");
    std::fs::write(&pts, "i\n2i\n").unwrap();
    let out_path = dir.path().join("matrix.csv");
    let out = run(&[
        "--format",
        "csv",
        "--out",
        out_path.to_str().unwrap(),
        "matrix",
        pts.to_str().unwrap(),
        "--symmetrized",
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("# schema horoforge/1"));
    assert!(text.contains("# symmetrized"));
    // both off-diagonal entries approximate log 2
    let data_lines: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("from"))
        .collect();
    let row0: Vec<&str> = data_lines[0].split(',').collect();
    let d01: f64 = row0[2].parse().unwrap();
    assert!((d01 - std::f64::consts::LN_2).abs() < 1e-3);
}

#[test]
fn matrix_torus_e2_flags_asymmetry() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[run]\ngeometry = torus-e2\n[torus]\nn_dirs = 32\n");
    let pts = dir.path().join("pts.txt");
    std::fs::write(&pts, "i\n2i\n1+1i\n").unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "matrix", pts.to_str().unwrap()]);
    let v = stdout_json(&out);
    assert!(v["max_asymmetry"].as_f64().unwrap() > 0.0);
    assert_eq!(v["lower_bounds"].as_array().unwrap().len(), 3);
}

#[test]
fn boundary_minsky_ray_reaches_busemann_limit() {
    let out = run(&["boundary", "pow:2"]);
    let v = stdout_json(&out);
    assert_eq!(v["outcome"], "converged");
    // default landmarks are i (base), 2i, 1+i: limit is -log Im
    let limit = v["limit"].as_array().unwrap();
    assert!(limit[0].as_f64().unwrap().abs() < 1e-6);
    assert!((limit[1].as_f64().unwrap() + 2.0f64.ln()).abs() < 1e-5);
    assert!(limit[2].as_f64().unwrap().abs() < 1e-5);
}

#[test]
fn boundary_constant_sequence_single_repeated_row() {
    let out = run(&["--format", "csv", "boundary", "const:0"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let values: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("0,") || l.starts_with("1,"))
        .collect();
    // iterates 0 and 1 carry identical landmark values
    assert_eq!(values.len(), 6);
    let v0: Vec<&str> = values[0].split(',').collect();
    let v3: Vec<&str> = values[3].split(',').collect();
    assert_eq!(v0[3], v3[3]);
    assert!(text.lines().any(|l| l.starts_with("limit,")));
}

#[test]
fn boundary_torus_orbit_converges() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[run]\ngeometry = torus-e1\n");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "boundary",
        "orbit:1,0:2,1;1,1",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["outcome"], "converged");
}

#[test]
fn translation_torus_matrix_reports_log_dilatation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[run]\ngeometry = torus-e1\n");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "translation",
        "2,1;1,1",
        "i",
    ]);
    let v = stdout_json(&out);
    let log_lambda = ((3.0 + 5.0f64.sqrt()) / 2.0).ln();
    let tau_d = v["metric"]["extrapolated"].as_f64().unwrap();
    let tau_i = v["functional"]["extrapolated"].as_f64().unwrap();
    assert!((tau_d - log_lambda).abs() < 1e-3, "tau_d {tau_d}");
    assert!((tau_i - log_lambda).abs() < 1e-2, "tau_i {tau_i}");
}

#[test]
fn invariance_torus_defect_is_tiny() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[run]\ngeometry = torus-e1\n");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "invariance",
        "2,1;1,1",
        "--samples",
        "50",
    ]);
    let v = stdout_json(&out);
    assert!(v["defect"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn usage_errors_exit_2() {
    let out = run(&["distance", "i"]); // missing y
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["distance", "not-a-point", "2i"]);
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[run]\ngeomtry = minsky\n");
    let out = run(&["--config", cfg.to_str().unwrap(), "distance", "i", "2i"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn funk_geometry_via_vertex_file() {
    let dir = tempfile::tempdir().unwrap();
    let verts = dir.path().join("square.txt");
    std::fs::write(&verts, "-1 -1\n1 -1\n1 1\n-1 1\n").unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(
            "[run]\ngeometry = funk\n[funk]\nvertices = {}\n",
            verts.display()
        ),
    );
    let out = run(&["--config", cfg.to_str().unwrap(), "distance", "0,0", "0.5,0"]);
    let v = stdout_json(&out);
    assert!((v["lower_bound"].as_f64().unwrap() - 2.0f64.ln()).abs() < 1e-9);
    assert!((v["oracle"].as_f64().unwrap() - 2.0f64.ln()).abs() < 1e-9);
}

#[test]
fn verify_corrupted_convention_exits_1_and_names_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[verify]\ncorrupt_convention = true\n");
    let out = run(&["--config", cfg.to_str().unwrap(), "verify"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    let failing: Vec<&str> = text
        .lines()
        .filter(|l| l.contains("\"passed\":false"))
        .collect();
    assert!(failing.iter().any(|l| l.contains("sl2z-invariance")));
}
