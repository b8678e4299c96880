use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::field::{eval_boundary_spec, w1p_seminorm, BoundaryField, BoundarySpec};
use crate::mesh::SphereMesh;
use crate::{Error, Result, Vec3};

use super::fit_line;

/// Gap between the two dipole caps used by [`bubble_scaling_curve`].
pub const DEFAULT_DIPOLE_SEPARATION: f64 = 0.3;

/// Default scale ladder; resolved from sphere level 6 on.
pub const DEFAULT_BUBBLE_SCALES: [f64; 5] = [0.4, 0.28, 0.2, 0.14, 0.1];

/// Sphere level used for scaling curves unless configured otherwise.
pub const DEFAULT_BUBBLE_LEVEL: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub lambda: f64,
    pub norm: f64,
}

/// `‖∇_T(ψ_λ − id)‖_{L^p}` over a ladder of dipole scales with the fitted
/// log-log slope (expected `(2−p)/p` for small scales).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BubbleScaling {
    pub p: f64,
    pub rows: Vec<ScalingRow>,
    /// Scales dropped as under-resolved.
    pub excluded: Vec<f64>,
    pub slope: f64,
    pub slope_stderr: f64,
    pub expected_slope: f64,
}

/// Evaluates dipoles centered at `e₃` at each scale and fits the slope.
///
/// Scales below four times the longest sphere edge are excluded with a
/// warning; at least two resolved scales are required.
pub fn bubble_scaling_curve(p: f64, scales: &[f64], sphere: Arc<SphereMesh>) -> Result<BubbleScaling> {
    if !(1.0..=4.0).contains(&p) {
        return Err(Error::param(format!("p = {p} outside [1, 4]")));
    }
    let min_scale = 4.0 * sphere.max_edge_length();
    let id = BoundaryField::identity(sphere.clone());
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for &lambda in scales {
        if lambda < min_scale {
            log::warn!("scale {lambda} below resolution limit {min_scale:.4}; excluded");
            excluded.push(lambda);
            continue;
        }
        let spec = BoundarySpec::bubble_dipole(Vec3::z(), lambda, DEFAULT_DIPOLE_SEPARATION);
        let psi = eval_boundary_spec(&spec, sphere.clone())?;
        rows.push(ScalingRow {
            lambda,
            norm: w1p_seminorm(&psi, &id, p)?,
        });
    }
    if rows.len() < 2 {
        return Err(Error::Resolution(format!(
            "only {} resolved scales (need 2; minimum scale {min_scale:.4})",
            rows.len()
        )));
    }
    rows.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let lx: Vec<f64> = rows.iter().map(|r| r.lambda.ln()).collect();
    let ly: Vec<f64> = rows.iter().map(|r| r.norm.ln()).collect();
    let (slope, _, slope_stderr) = fit_line(&lx, &ly);
    Ok(BubbleScaling {
        p,
        rows,
        excluded,
        slope,
        slope_stderr,
        expected_slope: (2.0 - p) / p,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationCheck {
    /// `‖f‖_{L^q}`.
    pub lhs: f64,
    /// `‖f‖_{L²}^{2/q}·‖f‖_{L^∞}^{1−2/q}`.
    pub rhs: f64,
    pub holds: bool,
}

/// Checks `‖f‖_q ≤ ‖f‖_2^{2/q}‖f‖_∞^{1−2/q}` for vertex data with lumped
/// area weights.
pub fn interpolation_check_values(
    sphere: &SphereMesh,
    values: &[Vec3],
    q: f64,
) -> Result<InterpolationCheck> {
    if !(q > 2.0 && q.is_finite()) {
        return Err(Error::param(format!("q = {q} must lie in ]2, ∞[")));
    }
    if values.len() != sphere.vertex_count() {
        return Err(Error::MeshMismatch);
    }
    let w = sphere.vertex_areas();
    let mut sq = 0.0;
    let mut sqq = 0.0;
    let mut sup: f64 = 0.0;
    for (f, a) in values.iter().zip(&w) {
        let n = f.norm();
        sq += a * n * n;
        sqq += a * n.powf(q);
        sup = sup.max(n);
    }
    let lhs = sqq.powf(1.0 / q);
    let rhs = sq.sqrt().powf(2.0 / q) * sup.powf(1.0 - 2.0 / q);
    Ok(InterpolationCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-10),
    })
}

/// [`interpolation_check_values`] applied to `f − g`.
pub fn interpolation_check(f: &BoundaryField, g: &BoundaryField, q: f64) -> Result<InterpolationCheck> {
    if !f.same_mesh(g) {
        return Err(Error::MeshMismatch);
    }
    let diff: Vec<Vec3> = f.values().iter().zip(g.values()).map(|(a, b)| a - b).collect();
    interpolation_check_values(f.sphere(), &diff, q)
}
