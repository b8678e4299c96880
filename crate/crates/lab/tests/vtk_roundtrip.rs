use std::sync::Arc;

use harmap_core::{eval_boundary_spec, minimize, BoundarySpec, ShellMesh, SolveOptions, Vec3};
use harmap_lab::vtk;

#[test]
fn solver_output_survives_a_round_trip() {
    let m = Arc::new(ShellMesh::new(2, 5).unwrap());
    let psi = eval_boundary_spec(&BoundarySpec::cap_twist(Vec3::x(), 0.9, 0.7), m.sphere_arc()).unwrap();
    let opts = SolveOptions {
        restarts: 1,
        max_iterations: 50,
        ..SolveOptions::default()
    };
    let (u, _) = minimize(m, &psi, &opts).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.vtk");
    vtk::write(&path, &u).unwrap();
    let back = vtk::read(&path).unwrap();
    assert!(back.mesh().same_as(u.mesh()));
    assert_eq!(back.values(), u.values());
}
