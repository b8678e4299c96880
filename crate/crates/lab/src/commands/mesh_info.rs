use harmap_core::ShellMesh;
use serde::{Deserialize, Serialize};

use super::{Context, MeshSummary};
use crate::error::LabResult;
use crate::report::{to_json, Outputs, SCHEMA_VERSION};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshInfo {
    pub schema_version: u32,
    #[serde(flatten)]
    pub mesh: MeshSummary,
    pub total_volume: f64,
    /// Relative deficit against `4π/3`.
    pub volume_deficit: f64,
    pub sphere_vertices: usize,
    pub sphere_triangles: usize,
    pub sphere_max_edge: f64,
    /// Default singularity detection radius `2h`.
    pub rho_min: f64,
}

pub fn compute(mesh: &ShellMesh) -> MeshInfo {
    let ball = 4.0 * std::f64::consts::PI / 3.0;
    MeshInfo {
        schema_version: SCHEMA_VERSION,
        mesh: MeshSummary::of(mesh),
        total_volume: mesh.total_volume(),
        volume_deficit: 1.0 - mesh.total_volume() / ball,
        sphere_vertices: mesh.sphere().vertex_count(),
        sphere_triangles: mesh.sphere().triangles().len(),
        sphere_max_edge: mesh.sphere().max_edge_length(),
        rho_min: 2.0 * mesh.h(),
    }
}

pub fn run(ctx: &Context) -> LabResult<MeshInfo> {
    let info = compute(&ctx.config.mesh.build()?);
    let text = to_json(&info);
    Outputs::new(&ctx.out)?.write_all(&[("mesh_info.json", text.clone())])?;
    print!("{text}");
    Ok(info)
}
