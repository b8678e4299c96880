//! Bubble-dipole boundary data next to the identity control.

use std::sync::Arc;

use harmap_core::{
    detect_singularities, dirichlet_energy, eval_boundary_spec, minimize, w1p_distance,
    BoundaryField, BoundarySpec, ShellMesh, SingularSet, SolveOptions, DEFAULT_THRESHOLD,
};
use serde::{Deserialize, Serialize};

use super::{Context, MeshSummary};
use crate::config::DemoConfig;
use crate::error::{LabError, LabResult};
use crate::report::{to_json, Outputs, SCHEMA_VERSION};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoSolve {
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
    pub singularity_count: usize,
    pub total_degree: i64,
    pub singularities: SingularSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub schema_version: u32,
    pub mesh: MeshSummary,
    pub boundary: BoundarySpec,
    pub delta_p1_5: f64,
    pub delta_p2: f64,
    pub dipole: DemoSolve,
    pub control: DemoSolve,
    /// Set when the dipole solve shows no more singularities than the
    /// control: the mesh cannot display the extra ones.
    pub resolution_limited: bool,
}

fn solve(mesh: &Arc<ShellMesh>, psi: &BoundaryField, opts: &SolveOptions, rho_min: f64) -> LabResult<DemoSolve> {
    let (u, report) = minimize(mesh.clone(), psi, opts)?;
    let singularities = detect_singularities(&u, rho_min, DEFAULT_THRESHOLD)?;
    Ok(DemoSolve {
        energy: dirichlet_energy(&u),
        iterations: report.iterations,
        converged: report.converged,
        singularity_count: singularities.len(),
        total_degree: singularities.total_degree(),
        singularities,
    })
}

pub fn compute(mesh: Arc<ShellMesh>, cfg: &DemoConfig, opts: &SolveOptions, rho_min: f64) -> LabResult<DemoReport> {
    let edge = mesh.sphere().max_edge_length();
    if cfg.scale < 4.0 * edge {
        return Err(LabError::Resolution(format!(
            "scale {} below the resolution limit {:.4} (four sphere edges)",
            cfg.scale,
            4.0 * edge
        )));
    }
    let spec = BoundarySpec::BubbleDipole {
        center: cfg.center,
        scale: cfg.scale,
        separation: cfg.separation,
        direction: None,
    };
    let psi = eval_boundary_spec(&spec, mesh.sphere_arc())?;
    let id = BoundaryField::identity(mesh.sphere_arc());
    Ok(DemoReport {
        schema_version: SCHEMA_VERSION,
        mesh: MeshSummary::of(&mesh),
        delta_p1_5: w1p_distance(&psi, &id, 1.5)?,
        delta_p2: w1p_distance(&psi, &id, 2.0)?,
        dipole: solve(&mesh, &psi, opts, rho_min)?,
        control: solve(&mesh, &id, opts, rho_min)?,
        resolution_limited: false,
        boundary: spec,
    })
    .map(|mut r: DemoReport| {
        r.resolution_limited = r.dipole.singularity_count <= r.control.singularity_count;
        r
    })
}

pub fn run(ctx: &Context) -> LabResult<DemoReport> {
    let c = &ctx.config;
    let mesh = ctx.mesh()?;
    let r = compute(mesh.clone(), &c.demo, &c.solver, c.rho_min(&mesh))?;
    Outputs::new(&ctx.out)?.write_all(&[("instability_demo.json", to_json(&r))])?;
    println!(
        "δ(p=1.5) {:.4}, δ(p=2) {:.4}; singularities {} (control {}), energy {:.4} (control {:.4}){}",
        r.delta_p1_5,
        r.delta_p2,
        r.dipole.singularity_count,
        r.control.singularity_count,
        r.dipole.energy,
        r.control.energy,
        if r.resolution_limited { "; resolution-limited" } else { "" }
    );
    Ok(r)
}
