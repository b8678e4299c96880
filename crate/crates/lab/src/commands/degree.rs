use std::sync::Arc;

use harmap_core::{degree, eval_boundary_spec, BoundarySpec, Degree, SphereMesh};
use serde::{Deserialize, Serialize};

use super::Context;
use crate::error::LabResult;
use crate::report::{to_json, Outputs, SCHEMA_VERSION};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeOutput {
    pub schema_version: u32,
    pub level: usize,
    pub boundary: BoundarySpec,
    pub degree: Degree,
    pub resolved: bool,
}

pub fn compute(spec: &BoundarySpec, level: usize) -> LabResult<DegreeOutput> {
    let sphere = Arc::new(SphereMesh::new(level)?);
    let d = degree(&eval_boundary_spec(spec, sphere)?)?;
    Ok(DegreeOutput {
        schema_version: SCHEMA_VERSION,
        level,
        boundary: spec.clone(),
        degree: d,
        resolved: d.is_resolved(),
    })
}

pub fn run(ctx: &Context) -> LabResult<DegreeOutput> {
    let out = compute(&ctx.config.boundary, ctx.config.mesh.level)?;
    Outputs::new(&ctx.out)?.write_all(&[("degree.json", to_json(&out))])?;
    println!(
        "degree {} (raw {:.6}, residual {:.2e})",
        out.degree.value, out.degree.raw, out.degree.residual
    );
    if !out.resolved {
        log::warn!("degree residual {:.3} suggests an under-resolved map", out.degree.residual);
    }
    Ok(out)
}
