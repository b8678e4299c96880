//! Discrete Dirichlet energy and the localized quantities of the
//! monotonicity formula.
//!
//! Ball-localized sums include a tetrahedron when its centroid lies in the
//! ball, so every localized quantity is a sum over a subset of tets.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::exec::Exec;
use crate::field::SphereField;
use crate::mesh::ShellMesh;
use crate::{Error, Result, Vec3};

/// Gradient of `u` on tet `t` as a 3×3 matrix, row `c` = ∇u_c.
pub fn tet_gradient(mesh: &ShellMesh, values: &[Vec3], t: usize) -> Matrix3<f64> {
    let g = mesh.gradients(t);
    let tet = &mesh.tets()[t];
    // Differences against vertex 0 so constants give exactly zero.
    let u0 = values[tet[0]];
    let mut m = Matrix3::zeros();
    for a in 1..4 {
        m += (values[tet[a]] - u0) * g[a].transpose();
    }
    m
}

/// `vol_T · |∇u_T|²` for tet `t`.
pub fn tet_energy(mesh: &ShellMesh, values: &[Vec3], t: usize) -> f64 {
    mesh.volumes()[t] * tet_gradient(mesh, values, t).norm_squared()
}

/// Per-tet energies in tet order.
pub fn tet_energies(u: &SphereField, exec: Exec) -> Vec<f64> {
    let mesh = u.mesh();
    exec.map(mesh.tet_count(), |t| tet_energy(mesh, u.values(), t))
}

/// `Σ_T vol_T |∇u_T|²` over all tets.
pub fn dirichlet_energy(u: &SphereField) -> f64 {
    dirichlet_energy_with(u, Exec::default())
}

pub fn dirichlet_energy_with(u: &SphereField, exec: Exec) -> f64 {
    let mesh = u.mesh();
    mesh.tet_sum(exec, |t| tet_energy(mesh, u.values(), t))
}

/// Energy of raw vertex values (not necessarily unit-norm).
pub fn vertex_data_energy(mesh: &ShellMesh, values: &[Vec3], exec: Exec) -> f64 {
    mesh.tet_sum(exec, |t| tet_energy(mesh, values, t))
}

const RADIUS_SLACK: f64 = 1e-12;

/// Checks that `B(y, ρ)` is resolved and inside the unit ball.
pub fn check_ball(mesh: &ShellMesh, y: &Vec3, rho: f64) -> Result<()> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::param(format!("radius {rho} must be positive")));
    }
    if rho < 2.0 * mesh.h() * (1.0 - RADIUS_SLACK) {
        return Err(Error::Resolution(format!(
            "radius {rho} below twice the mesh size (2h = {})",
            2.0 * mesh.h()
        )));
    }
    if y.norm() + rho > 1.0 + RADIUS_SLACK {
        return Err(Error::param(format!(
            "ball B({:?}, {rho}) is not contained in the unit ball",
            [y.x, y.y, y.z]
        )));
    }
    Ok(())
}

/// `(1/ρ)·E(B(y, ρ))` without the resolution and containment checks.
pub fn rescaled_energy_unchecked(u: &SphereField, y: &Vec3, rho: f64) -> f64 {
    let mesh = u.mesh();
    mesh.sum_in_ball(y, rho, |t| tet_energy(mesh, u.values(), t)) / rho
}

/// `(1/ρ)·Σ vol_T |∇u_T|²` over tets with centroid in `B(y, ρ)`.
pub fn rescaled_energy(u: &SphereField, y: &Vec3, rho: f64) -> Result<f64> {
    check_ball(u.mesh(), y, rho)?;
    Ok(rescaled_energy_unchecked(u, y, rho))
}

/// Rescaled energies at increasing radii about one center.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyProfile {
    pub center: [f64; 3],
    pub radii: Vec<f64>,
    pub rescaled: Vec<f64>,
    /// `max(0, max_k rescaled[k] − rescaled[k+1])`.
    pub max_violation: f64,
}

pub fn monotonicity_profile(u: &SphereField, y: &Vec3, radii: &[f64]) -> Result<EnergyProfile> {
    if radii.is_empty() {
        return Err(Error::param("empty radius list"));
    }
    if let Some(w) = radii.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::param(format!(
            "radii must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    let rescaled = radii
        .iter()
        .map(|&r| rescaled_energy(u, y, r))
        .collect::<Result<Vec<_>>>()?;
    let max_violation = rescaled
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(0.0, f64::max);
    Ok(EnergyProfile {
        center: [y.x, y.y, y.z],
        radii: radii.to_vec(),
        rescaled,
        max_violation,
    })
}

/// `Σ vol_T (2/r_T)|∇u_T·(c_T − y)/r_T|²` over tets with centroid `c_T` in
/// the annulus `ρ_in < |c_T − y| ≤ ρ_out`, where `r_T = |c_T − y|`.
///
/// The annulus is exactly the set difference of the two balls used by
/// [`rescaled_energy`].
pub fn radial_term(u: &SphereField, y: &Vec3, rho_in: f64, rho_out: f64) -> Result<f64> {
    if !(rho_in < rho_out) {
        return Err(Error::param(format!(
            "inner radius {rho_in} must be below outer radius {rho_out}"
        )));
    }
    let mesh = u.mesh();
    check_ball(mesh, y, rho_in)?;
    check_ball(mesh, y, rho_out)?;
    let inner = mesh.tets_in_ball(y, rho_in);
    let mut total = 0.0;
    for t in mesh.tets_in_ball(y, rho_out) {
        if inner.binary_search(&t).is_ok() {
            continue;
        }
        let d = mesh.centroids()[t] - y;
        let r = d.norm();
        let du = tet_gradient(mesh, u.values(), t) * (d / r);
        total += mesh.volumes()[t] * 2.0 / r * du.norm_squared();
    }
    Ok(total)
}
