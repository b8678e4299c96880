use std::sync::Arc;

use harmap_core::{
    degree, detect_singularities, dirichlet_energy, eval_boundary_spec, minimize, BoundarySpec,
    Degree, ShellMesh, SingularSet, SolveOptions, SolveReport, SphereField, DEFAULT_THRESHOLD,
    HEDGEHOG_ENERGY,
};
use serde::{Deserialize, Serialize};

use super::{Context, MeshSummary};
use crate::error::LabResult;
use crate::report::{to_json, Outputs, SCHEMA_VERSION};
use crate::vtk;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub schema_version: u32,
    pub mesh: MeshSummary,
    pub boundary: BoundarySpec,
    pub boundary_degree: Degree,
    pub energy: f64,
    /// `energy / 8π`.
    pub energy_ratio: f64,
    pub solve: SolveReport,
    pub singularities: SingularSet,
}

pub fn compute(
    mesh: Arc<ShellMesh>,
    spec: &BoundarySpec,
    opts: &SolveOptions,
    rho_min: f64,
) -> LabResult<(SphereField, SolveOutput)> {
    let psi = eval_boundary_spec(spec, mesh.sphere_arc())?;
    let (u, report) = minimize(mesh.clone(), &psi, opts)?;
    let singularities = detect_singularities(&u, rho_min, DEFAULT_THRESHOLD)?;
    let energy = dirichlet_energy(&u);
    let out = SolveOutput {
        schema_version: SCHEMA_VERSION,
        mesh: MeshSummary::of(&mesh),
        boundary: spec.clone(),
        boundary_degree: degree(&psi)?,
        energy,
        energy_ratio: energy / HEDGEHOG_ENERGY,
        solve: report,
        singularities,
    };
    Ok((u, out))
}

pub fn run(ctx: &Context) -> LabResult<SolveOutput> {
    let c = &ctx.config;
    let mesh = ctx.mesh()?;
    let (u, out) = compute(mesh.clone(), &c.boundary, &c.solver, c.rho_min(&mesh))?;
    Outputs::new(&ctx.out)?.write_all(&[
        ("field.vtk", vtk::to_string(&u)),
        ("solve.json", to_json(&out)),
    ])?;
    println!(
        "energy {:.6} ({:.4}·8π), {} sweeps, converged {}, {} singularities",
        out.energy,
        out.energy_ratio,
        out.solve.iterations,
        out.solve.converged,
        out.singularities.len()
    );
    Ok(out)
}
