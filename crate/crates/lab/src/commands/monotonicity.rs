use harmap_core::{monotonicity_profile, radial_term, SphereField, Vec3, HEDGEHOG_ENERGY};
use serde::{Deserialize, Serialize};

use super::Context;
use crate::error::{LabError, LabResult};
use crate::report::{to_csv, to_json, Outputs, SCHEMA_VERSION};
use crate::vtk;

/// Largest admissible drop of the rescaled energy, `0.05·8π`.
pub const VIOLATION_LIMIT: f64 = 0.05 * HEDGEHOG_ENERGY;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub schema_version: u32,
    pub center: [f64; 3],
    pub radii: Vec<f64>,
    pub rescaled_energy: Vec<f64>,
    /// Radial term over `radii[0] < |x − y| ≤ radii[k]`.
    pub radial_term_cumulative: Vec<f64>,
    pub max_violation: f64,
    pub limit: f64,
    pub passed: bool,
}

/// Ten evenly spaced radii from `2h` to just inside the boundary.
pub fn default_radii(u: &SphereField, center: &Vec3) -> LabResult<Vec<f64>> {
    let lo = 2.0 * u.mesh().h();
    let hi = 1.0 - center.norm() - 1e-9;
    if !(hi > lo) {
        return Err(LabError::Resolution(format!(
            "center at distance {:.4} from the boundary leaves no radii above 2h = {lo:.4}",
            1.0 - center.norm()
        )));
    }
    Ok((0..10).map(|k| lo + (hi - lo) * k as f64 / 9.0).collect())
}

pub fn compute(u: &SphereField, center: &Vec3, radii: Option<&[f64]>) -> LabResult<MonotonicityReport> {
    if !(center.norm() < 1.0) {
        return Err(LabError::Config(format!("center {center:?} is not interior")));
    }
    let radii = match radii {
        Some(r) => r.to_vec(),
        None => default_radii(u, center)?,
    };
    let profile = monotonicity_profile(u, center, &radii)?;
    let mut cumulative = vec![0.0];
    for &r in &radii[1..] {
        cumulative.push(radial_term(u, center, radii[0], r)?);
    }
    Ok(MonotonicityReport {
        schema_version: SCHEMA_VERSION,
        center: profile.center,
        radii,
        rescaled_energy: profile.rescaled,
        radial_term_cumulative: cumulative,
        max_violation: profile.max_violation,
        limit: VIOLATION_LIMIT,
        passed: profile.max_violation <= VIOLATION_LIMIT,
    })
}

pub fn csv(r: &MonotonicityReport) -> String {
    let rows: Vec<Vec<Option<f64>>> = r
        .radii
        .iter()
        .zip(&r.rescaled_energy)
        .zip(&r.radial_term_cumulative)
        .map(|((a, b), c)| vec![Some(*a), Some(*b), Some(*c)])
        .collect();
    to_csv(&["rho", "rescaled_energy", "radial_term_cumulative"], &rows)
}

/// Writes the profile, then fails with a compute error if the drop exceeds
/// [`VIOLATION_LIMIT`]. Fields that are not minimizers may fail.
pub fn run(ctx: &Context) -> LabResult<MonotonicityReport> {
    let m = &ctx.config.monotonicity;
    let path = m
        .field
        .as_ref()
        .ok_or_else(|| LabError::Config("monotonicity needs a field file (`--field`)".into()))?;
    let u = vtk::read(path)?;
    let r = compute(&u, &Vec3::from(m.center), m.radii.as_deref())?;
    Outputs::new(&ctx.out)?.write_all(&[
        ("monotonicity.csv", csv(&r)),
        ("monotonicity.json", to_json(&r)),
    ])?;
    println!("max violation {:.3e} (limit {:.3e})", r.max_violation, r.limit);
    if !r.passed {
        return Err(LabError::Compute(format!(
            "rescaled energy drops by {:.4} > {:.4}",
            r.max_violation, r.limit
        )));
    }
    Ok(r)
}
