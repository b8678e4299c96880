//! One module per subcommand. Each exposes a `compute` step returning a
//! serializable report and a `run` step that writes it under the output
//! directory.

pub mod bubble;
pub mod degree;
pub mod demo;
pub mod mesh_info;
pub mod monotonicity;
pub mod solve;
pub mod sweep;

use std::path::PathBuf;
use std::sync::Arc;

use harmap_core::ShellMesh;

use crate::config::ExperimentConfig;
use crate::error::LabResult;

/// A validated configuration with command-line overrides applied.
#[derive(Clone, Debug)]
pub struct Context {
    pub config: ExperimentConfig,
    pub out: PathBuf,
}

impl Context {
    pub fn new(mut config: ExperimentConfig, out: Option<PathBuf>, seed: Option<u64>) -> LabResult<Self> {
        if let Some(seed) = seed {
            config.solver.seed = seed;
        }
        config.validate()?;
        let out = out
            .or_else(|| config.out.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok(Context { config, out })
    }

    pub fn mesh(&self) -> LabResult<Arc<ShellMesh>> {
        Ok(Arc::new(self.config.mesh.build()?))
    }
}

/// Mesh parameters echoed in reports.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MeshSummary {
    pub level: usize,
    pub layers: usize,
    pub vertices: usize,
    pub tets: usize,
    pub h: f64,
}

impl MeshSummary {
    pub fn of(mesh: &ShellMesh) -> Self {
        MeshSummary {
            level: mesh.level(),
            layers: mesh.layers(),
            vertices: mesh.vertex_count(),
            tets: mesh.tet_count(),
            h: mesh.h(),
        }
    }
}
