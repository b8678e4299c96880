use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::field::{BoundaryField, SphereField};
use crate::{Error, Result, Vec3, HEDGEHOG_ENERGY};

/// Smallest admissible `|z|` in the outer annulus.
const MIN_Z: f64 = 0.1;

/// Radial comparison map built from a field `u` and boundary data `ψ`.
///
/// Inside `B_ρ` the map is `u(x/ρ)` (P1 interpolation, normalized); on
/// `ρ ≤ |x| ≤ 1` it is `z/|z|` with
/// `z(x) = [(1−|x|)ψ(x/|x|) + (|x|−ρ)x/|x|]/(1−ρ)`, so its trace is the
/// identity. `ρ` must be a shell radius `k/L`.
pub fn comparison_map(u: &SphereField, psi: &BoundaryField, rho: f64) -> Result<SphereField> {
    let mesh = u.mesh();
    if psi.sphere().level() != mesh.level() {
        return Err(Error::MeshMismatch);
    }
    let layers = mesh.layers() as f64;
    let k_rho = (rho * layers).round();
    if !(rho > 0.0 && rho < 1.0) || (rho * layers - k_rho).abs() > 1e-9 {
        return Err(Error::param(format!(
            "ρ = {rho} must be a shell radius k/{} in ]0, 1[",
            mesh.layers()
        )));
    }
    let k_rho = k_rho as usize;
    let n = mesh.sphere().vertex_count();
    let mut values = Vec::with_capacity(mesh.vertex_count());
    values.push(interpolated(u, &Vec3::zeros())?);
    for k in 1..=mesh.layers() {
        let r = mesh.shell_radius(k);
        for j in 0..n {
            let v = mesh.vertex_id(k, j);
            let x = mesh.vertices()[v];
            let w = if k < k_rho {
                interpolated(u, &(x / rho))?
            } else if k == mesh.layers() {
                mesh.sphere().vertices()[j]
            } else {
                let omega = mesh.sphere().vertices()[j];
                let z = (psi.values()[j] * (1.0 - r) + omega * (r - rho)) / (1.0 - rho);
                let nz = z.norm();
                if nz < MIN_Z {
                    return Err(Error::Construction(format!(
                        "|z| = {nz:.3} < {MIN_Z} at vertex {v}: boundary data too far from the identity"
                    )));
                }
                z / nz
            };
            values.push(w);
        }
    }
    SphereField::new(u.mesh_arc(), values)
}

fn interpolated(u: &SphereField, x: &Vec3) -> Result<Vec3> {
    let v = u.mesh().interpolate(u.values(), x)?;
    let n = v.norm();
    if n < 1e-12 {
        return Err(Error::Construction(format!(
            "interpolated value vanishes at {:?}",
            [x.x, x.y, x.z]
        )));
    }
    Ok(v / n)
}

/// Upper bound for the comparison-map energy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonBound {
    pub bound: f64,
    /// Coefficient of `(1+1/κ)δ²/(1−s)²`.
    pub c6: f64,
    /// `s = ‖ψ − id‖_{L^∞}`, in place of the Sobolev-embedding estimate.
    pub sup_distance: f64,
}

/// `E[u] + 8π(1−ρ)[(1+κ)/(1−s)² − 1] + c₆(1+1/κ)δ²/(1−s)²` with
/// `c₆ = 2^{1−2/p}(4π)^{(p−2)/p}(1−ρ³)/(3(1−ρ)²)` and `s` the measured
/// sup distance of `ψ` to the identity.
pub fn comparison_bound(
    energy_u: f64,
    delta: f64,
    sup_distance: f64,
    p: f64,
    rho: f64,
    kappa: f64,
) -> Result<ComparisonBound> {
    if !(p >= 2.0) || !(kappa > 0.0) || !(rho > 0.0 && rho < 1.0) || !(delta >= 0.0) {
        return Err(Error::param(format!(
            "need p >= 2, κ > 0, ρ in ]0,1[, δ >= 0 (got p={p}, κ={kappa}, ρ={rho}, δ={delta})"
        )));
    }
    if !(sup_distance < 1.0) {
        return Err(Error::NotApplicable(format!(
            "sup distance {sup_distance} >= 1: the radial interpolation may vanish"
        )));
    }
    let e = if p.is_infinite() { 1.0 } else { (p - 2.0) / p };
    let c6 = 2f64.powf(e) * (4.0 * PI).powf(e) * (1.0 - rho.powi(3)) / (3.0 * (1.0 - rho).powi(2));
    let shrink = (1.0 - sup_distance).powi(2);
    let bound = energy_u
        + HEDGEHOG_ENERGY * (1.0 - rho) * ((1.0 + kappa) / shrink - 1.0)
        + c6 * (1.0 + 1.0 / kappa) * delta * delta / shrink;
    Ok(ComparisonBound {
        bound,
        c6,
        sup_distance,
    })
}
