use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn harmap(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_harmap"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn corrupt_config_exits_2_naming_the_field() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.json", r#"{"solver": {"tolerance": "small"}}"#);
    let out = harmap(&["solve", "--config", &cfg, "--out", "o"], d.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("solver.tolerance"), "{err}");
    assert!(!d.path().join("o/field.vtk").exists());

    let cfg = write(d.path(), "t.json", "{\"mesh\": {");
    assert_eq!(harmap(&["degree", "--config", &cfg], d.path()).status.code(), Some(2));
    assert_eq!(harmap(&["degree", "--config", "missing.json"], d.path()).status.code(), Some(2));
    let cfg = write(d.path(), "r.json", r#"{"solver": {"restarts": 0}}"#);
    assert_eq!(harmap(&["solve", "--config", &cfg], d.path()).status.code(), Some(2));
}

#[test]
fn under_resolved_scale_exits_3() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.json", r#"{"mesh": {"level": 2, "layers": 4}}"#);
    let out = harmap(&["instability-demo", "--config", &cfg, "--scale", "0.05"], d.path());
    assert_eq!(out.status.code(), Some(3));
    let out = harmap(&["bubble-scaling", "--level", "2", "--scales", "0.1,0.05"], d.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn constant_boundary_solve_writes_field_and_report() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "c.json",
        r#"{"mesh": {"level": 2, "layers": 6}, "boundary": {"type": "constant", "value": [0, 1, 0]}}"#,
    );
    let out = harmap(&["solve", "--config", &cfg, "--out", "o"], d.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&d.path().join("o/solve.json"));
    assert_eq!(r["schema_version"], 1);
    assert!(r["energy"].as_f64().unwrap() < 1e-10);
    assert_eq!(r["singularities"]["points"].as_array().unwrap().len(), 0);
    let vtk = fs::read_to_string(d.path().join("o/field.vtk")).unwrap();
    assert!(vtk.contains("VECTORS u double"));
}

#[test]
fn identity_solve_is_quantized_and_monotone() {
    let d = tempfile::tempdir().unwrap();
    let out = harmap(&["solve", "--out", "o", "--seed", "3"], d.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&d.path().join("o/solve.json"));
    let e = r["energy"].as_f64().unwrap();
    assert!((e / (8.0 * std::f64::consts::PI) - 1.0).abs() < 0.05, "energy {e}");
    assert_eq!(r["singularities"]["points"].as_array().unwrap().len(), 1);
    assert_eq!(r["solve"]["converged"], true);

    let out = harmap(&["monotonicity", "--field", "o/field.vtk", "--out", "m"], d.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(d.path().join("m/monotonicity.csv")).unwrap();
    assert!(csv.starts_with("rho,rescaled_energy,radial_term_cumulative\n"));
    let out = harmap(
        &["monotonicity", "--field", "o/field.vtk", "--center", "0.1,-0.2,0.1", "--out", "m2"],
        d.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn random_field_may_violate_monotonicity() {
    use harmap_core::{ShellMesh, SphereField, Vec3};
    use rand::{Rng, SeedableRng};
    use std::sync::Arc;

    let d = tempfile::tempdir().unwrap();
    let m = Arc::new(ShellMesh::new(2, 8).unwrap());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    // Rough inside a small ball, smooth outside: the rescaled energy drops.
    let values = m
        .vertices()
        .iter()
        .map(|x| {
            if x.norm() < 0.4 {
                Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            } else {
                Vec3::z()
            }
        })
        .collect();
    let u = SphereField::from_unnormalized(m, values).unwrap();
    harmap_lab::vtk::write(&d.path().join("r.vtk"), &u).unwrap();
    let out = harmap(&["monotonicity", "--field", "r.vtk", "--out", "m"], d.path());
    assert_eq!(out.status.code(), Some(1));
    let r = json(&d.path().join("m/monotonicity.json"));
    assert_eq!(r["passed"], false);
}

#[test]
fn degree_and_mesh_info() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "c.json",
        r#"{"boundary": {"type": "composition", "maps": [
              {"type": "identity"},
              {"type": "bubble_dipole", "center": [0, 0, 1], "scale": 0.8, "separation": 0.3}]}}"#,
    );
    let out = harmap(&["degree", "--config", &cfg, "--out", "o"], d.path());
    assert!(out.status.success());
    let r = json(&d.path().join("o/degree.json"));
    assert_eq!(r["degree"]["value"], 1);
    assert!(r["degree"]["residual"].as_f64().unwrap() < 0.01);

    let out = harmap(&["mesh-info", "--out", "o"], d.path());
    assert!(out.status.success());
    let r = json(&d.path().join("o/mesh_info.json"));
    assert_eq!(r["level"], 3);
    assert_eq!(r["layers"], 24);
}

#[test]
fn small_sweep_is_deterministic() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "c.json",
        r#"{"mesh": {"level": 3, "layers": 8},
            "solver": {"max_iterations": 400, "restarts": 1},
            "sweep": {"p": 4, "q": 4, "cap_twist": {"center": [0, 0, 1], "radius": 1.2,
                      "axis": [1, 0, 0], "angles": [0.4, 0.2]}}}"#,
    );
    for o in ["a", "b"] {
        let out = harmap(&["sweep", "--config", &cfg, "--out", o], d.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["sweep.csv", "sweep.json"] {
        let a = fs::read(d.path().join("a").join(f)).unwrap();
        let b = fs::read(d.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between runs");
    }
    let csv = fs::read_to_string(d.path().join("a/sweep.csv")).unwrap();
    assert!(csv.starts_with("delta,a_norm,holder,theta_dev,energy_gap\n"));
    assert_eq!(csv.lines().count(), 4);
    let r = json(&d.path().join("a/sweep.json"));
    let deltas: Vec<f64> = r["rows"].as_array().unwrap().iter().map(|x| x["delta"].as_f64().unwrap()).collect();
    assert!(deltas.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(deltas[0], 0.0);
    assert_eq!(r["expected"]["holder_q"], 0.125);
}

#[test]
fn sweep_without_section_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(harmap(&["sweep"], d.path()).status.code(), Some(2));
}
