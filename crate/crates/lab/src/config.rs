//! JSON experiment configuration.
//!
//! Every section is optional; missing sections take the defaults below.
//!
//! ```json
//! {
//!   "mesh": {"level": 3, "layers": 24},
//!   "boundary": {"type": "cap_twist", "center": [0, 0, 1], "radius": 1.2, "angle": 0.2},
//!   "solver": {"max_iterations": 5000, "tolerance": 1e-8, "restarts": 3, "seed": 0},
//!   "sweep": {"p": 4, "cap_twist": {"center": [0, 0, 1], "radius": 1.2, "axis": [1, 0, 0],
//!             "angles": [0.8, 0.4, 0.2, 0.1, 0.05]}},
//!   "bubble": {"p": [1.5, 2, 3], "scales": [0.4, 0.28, 0.2, 0.14, 0.1], "level": 6}
//! }
//! ```

use std::path::{Path, PathBuf};

use harmap_core::constructions::{DEFAULT_BUBBLE_LEVEL, DEFAULT_BUBBLE_SCALES, DEFAULT_DIPOLE_SEPARATION};
use harmap_core::{BoundarySpec, ShellMesh, SolveOptions};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    /// Icosphere subdivision level `s`.
    pub level: usize,
    /// Number of radial shells `L`.
    pub layers: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig { level: 3, layers: 24 }
    }
}

impl MeshConfig {
    pub fn build(&self) -> LabResult<ShellMesh> {
        Ok(ShellMesh::new(self.level, self.layers)?)
    }
}

/// Cap twists sharing a cap and axis, one per angle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapTwistLadder {
    pub center: [f64; 3],
    pub radius: f64,
    #[serde(default)]
    pub axis: Option<[f64; 3]>,
    pub angles: Vec<f64>,
}

impl CapTwistLadder {
    pub fn specs(&self) -> Vec<BoundarySpec> {
        self.angles
            .iter()
            .map(|&angle| BoundarySpec::CapTwist {
                center: self.center,
                radius: self.radius,
                angle,
                axis: self.axis,
            })
            .collect()
    }
}

fn default_beta() -> f64 {
    0.25
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Sobolev exponent of the measured distance δ (at least 2).
    pub p: f64,
    /// Hölder exponent for the field comparison.
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Interpolation exponent `q`; the report then quotes `1/(2q)`.
    #[serde(default)]
    pub q: Option<f64>,
    /// Explicit boundary specs, one per point.
    #[serde(default)]
    pub ladder: Vec<BoundarySpec>,
    #[serde(default)]
    pub cap_twist: Option<CapTwistLadder>,
    /// Adds the identity (δ = 0) point.
    #[serde(default = "yes")]
    pub include_identity: bool,
    /// Starts each point from the identity solution instead of the
    /// configured initialization.
    #[serde(default = "yes")]
    pub warm_start: bool,
    /// Shell radius used by the comparison map.
    #[serde(default = "default_rho")]
    pub comparison_rho: f64,
}

fn default_rho() -> f64 {
    0.5
}

impl SweepConfig {
    pub fn specs(&self) -> LabResult<Vec<BoundarySpec>> {
        let mut specs = match (&self.cap_twist, self.ladder.is_empty()) {
            (Some(_), false) => {
                return Err(LabError::Config(
                    "sweep: give either `ladder` or `cap_twist`, not both".into(),
                ))
            }
            (Some(c), true) => c.specs(),
            (None, false) => self.ladder.clone(),
            (None, true) => {
                return Err(LabError::Config("sweep: `ladder` or `cap_twist` is required".into()))
            }
        };
        if self.include_identity {
            specs.push(BoundarySpec::Identity);
        }
        Ok(specs)
    }

    pub fn validate(&self) -> LabResult<()> {
        if !(self.p >= 2.0) {
            return Err(LabError::Config(format!("sweep.p = {} must be >= 2", self.p)));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(LabError::Config(format!("sweep.beta = {} outside ]0, 1]", self.beta)));
        }
        if let Some(q) = self.q {
            if !(q > 2.0 && q.is_finite()) {
                return Err(LabError::Config(format!("sweep.q = {q} must lie in ]2, ∞[")));
            }
        }
        for spec in self.specs()? {
            spec.validate()?;
        }
        Ok(())
    }
}

fn default_bubble_p() -> Vec<f64> {
    vec![1.5, 2.0, 3.0]
}

fn default_scales() -> Vec<f64> {
    DEFAULT_BUBBLE_SCALES.to_vec()
}

fn default_bubble_level() -> usize {
    DEFAULT_BUBBLE_LEVEL
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BubbleConfig {
    #[serde(default = "default_bubble_p")]
    pub p: Vec<f64>,
    #[serde(default = "default_scales")]
    pub scales: Vec<f64>,
    /// Sphere subdivision level (independent of the ball mesh).
    #[serde(default = "default_bubble_level")]
    pub level: usize,
}

impl Default for BubbleConfig {
    fn default() -> Self {
        BubbleConfig {
            p: default_bubble_p(),
            scales: default_scales(),
            level: default_bubble_level(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonotonicityConfig {
    #[serde(default)]
    pub field: Option<PathBuf>,
    #[serde(default)]
    pub center: [f64; 3],
    /// Radii to evaluate; defaults to ten steps from the resolution limit
    /// to the distance to the boundary.
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
}

fn default_demo_scale() -> f64 {
    0.8
}

fn default_separation() -> f64 {
    DEFAULT_DIPOLE_SEPARATION
}

fn north() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoConfig {
    #[serde(default = "default_demo_scale")]
    pub scale: f64,
    #[serde(default = "default_separation")]
    pub separation: f64,
    #[serde(default = "north")]
    pub center: [f64; 3],
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig {
            scale: default_demo_scale(),
            separation: default_separation(),
            center: north(),
        }
    }
}

fn identity() -> BoundarySpec {
    BoundarySpec::Identity
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default = "identity")]
    pub boundary: BoundarySpec,
    #[serde(default)]
    pub solver: SolveOptions,
    /// Detection radius; defaults to twice the mesh size.
    #[serde(default)]
    pub rho_min: Option<f64>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub bubble: BubbleConfig,
    #[serde(default)]
    pub monotonicity: MonotonicityConfig,
    #[serde(default)]
    pub demo: DemoConfig,
    /// Output directory (overridden by `--out`).
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mesh: MeshConfig::default(),
            boundary: identity(),
            solver: SolveOptions::default(),
            rho_min: None,
            sweep: None,
            bubble: BubbleConfig::default(),
            monotonicity: MonotonicityConfig::default(),
            demo: DemoConfig::default(),
            out: None,
        }
    }
}

impl ExperimentConfig {
    /// Parses JSON, naming the offending field on failure.
    pub fn from_json(text: &str) -> LabResult<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            LabError::Config(format!("at `{path}`: {}", e.into_inner()))
        })
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            LabError::Config(msg) => LabError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> LabResult<()> {
        self.solver.validate()?;
        self.boundary.validate()?;
        if let Some(r) = self.rho_min {
            if !(r > 0.0) {
                return Err(LabError::Config(format!("rho_min = {r} must be positive")));
            }
        }
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        Ok(())
    }

    pub fn rho_min(&self, mesh: &ShellMesh) -> f64 {
        self.rho_min.unwrap_or(2.0 * mesh.h())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_takes_defaults() {
        let c = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        c.validate().unwrap();
    }

    #[test]
    fn errors_name_the_field() {
        let e = ExperimentConfig::from_json(r#"{"mesh": {"level": "three", "layers": 4}}"#)
            .unwrap_err();
        assert!(e.to_string().contains("mesh.level"), "{e}");
        assert_eq!(e.exit_code(), 2);
        let e = ExperimentConfig::from_json(r#"{"sweep": {"p": 4, "bogus": 1}}"#).unwrap_err();
        assert!(e.to_string().contains("sweep"), "{e}");
        let e = ExperimentConfig::from_json(r#"{"boundary": {"type": "spiral"}}"#).unwrap_err();
        assert!(e.to_string().contains("boundary"), "{e}");
    }

    #[test]
    fn sweep_specs_and_validation() {
        let c = ExperimentConfig::from_json(
            r#"{"sweep": {"p": 4, "cap_twist": {"center": [0,0,1], "radius": 1.2, "angles": [0.4, 0.2]}}}"#,
        )
        .unwrap();
        let s = c.sweep.as_ref().unwrap();
        assert_eq!(s.specs().unwrap().len(), 3);
        c.validate().unwrap();
        let bad = SweepConfig { p: 1.5, ..s.clone() };
        assert!(bad.validate().is_err());
        let none = SweepConfig {
            cap_twist: None,
            ..s.clone()
        };
        assert!(none.specs().is_err());
    }
}
