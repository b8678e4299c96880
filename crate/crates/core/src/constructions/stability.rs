use std::sync::Arc;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::energy::{dirichlet_energy, tet_gradient};
use crate::field::{holder_distance, holder_distance_outside, lp_distance, w1p_distance, BoundaryField, SphereField};
use crate::mesh::ShellMesh;
use crate::minimizer::{energy_upper_bound_check, minimize, shifted_hedgehog, SolveOptions};
use crate::topology::{degree, detect_singularities, SingularSet, DEFAULT_THRESHOLD};
use crate::{Error, Result, Vec3, HEDGEHOG_ENERGY};

use super::registration::{apply_registration, RegistrationMap};
use super::rotation::{fit_rotation, rotation_deviation};
use super::arr;

/// Inner and outer radii of the annulus used for rotation fits and the
/// closeness proxy.
pub const ANNULUS: (f64, f64) = (1.0 / 3.0, 2.0 / 3.0);

/// `E − 8π` and `|a|` for a field with identity trace and one singularity.
pub fn bcl_gap(u: &SphereField, set: &SingularSet) -> Result<(f64, f64)> {
    let d = degree(&u.trace())?;
    if d.value != 1 {
        return Err(Error::NotApplicable(format!("boundary degree {} != 1", d.value)));
    }
    if set.len() != 1 {
        return Err(Error::NotApplicable(format!("{} singularities detected (need 1)", set.len())));
    }
    Ok((dirichlet_energy(u) - HEDGEHOG_ENERGY, set.points[0].position().norm()))
}

/// `sup |u − (x−a)/|x−a||` over vertices plus `max |∇u_T − ∇h_T|` over tets
/// in the annulus `1/3 ≤ |x − a| ≤ 2/3`, `h` the P1 interpolant of the
/// hedgehog centered at `a`.
pub fn energy_proxy(u: &SphereField, a: &Vec3) -> f64 {
    let mesh = u.mesh();
    let h = shifted_hedgehog(u.mesh_arc(), a);
    let inside = |x: &Vec3| {
        let r = (x - a).norm();
        r >= ANNULUS.0 && r <= ANNULUS.1
    };
    let sup = mesh
        .vertices()
        .iter()
        .zip(u.values().iter().zip(h.values()))
        .filter(|(x, _)| inside(x))
        .map(|(_, (p, q))| (p - q).norm())
        .fold(0.0, f64::max);
    let grad = (0..mesh.tet_count())
        .filter(|&t| inside(&mesh.centroids()[t]))
        .map(|t| (tet_gradient(mesh, u.values(), t) - tet_gradient(mesh, h.values(), t)).norm())
        .fold(0.0, f64::max);
    sup + grad
}

/// Discrete minimizer for identity boundary data with its singularity and
/// tangent rotation; the reference `v` of the stability comparison.
#[derive(Clone, Debug)]
pub struct ReferenceSolution {
    pub field: SphereField,
    pub singularity: Vec3,
    pub theta: Matrix3<f64>,
    pub energy: f64,
}

impl ReferenceSolution {
    pub fn compute(mesh: Arc<ShellMesh>, opts: &SolveOptions, rho_min: f64) -> Result<Self> {
        let id = BoundaryField::identity(mesh.sphere_arc());
        let (field, _) = minimize(mesh, &id, opts)?;
        Self::from_field(field, rho_min)
    }

    pub fn from_field(field: SphereField, rho_min: f64) -> Result<Self> {
        let set = detect_singularities(&field, rho_min, DEFAULT_THRESHOLD)?;
        if set.len() != 1 {
            return Err(Error::NotApplicable(format!(
                "reference solution has {} singularities",
                set.len()
            )));
        }
        let singularity = set.points[0].position();
        let theta = fit_rotation(&field, &singularity, ANNULUS.0, ANNULUS.1)?;
        let energy = dirichlet_energy(&field);
        Ok(ReferenceSolution {
            field,
            singularity,
            theta,
            energy,
        })
    }
}

/// One point of a stability sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    /// `‖ψ − id‖_{W^{1,p}}`.
    pub delta: f64,
    pub p: f64,
    /// `‖ψ − id‖_{L^∞}`.
    pub sup_distance: f64,
    pub a: [f64; 3],
    pub a_norm: f64,
    /// `|a − a₀|`, displacement from the reference singularity.
    pub a_shift: f64,
    pub theta: [[f64; 3]; 3],
    /// `‖Θ − I‖` (Frobenius).
    pub theta_dev: f64,
    pub energy: f64,
    pub energy_gap: f64,
    /// `‖u − v∘η‖_{C^{0,β}}` against the registered reference, outside the
    /// ball of radius `2h` about `a`.
    pub holder: f64,
    /// The same distance over all vertices.
    pub holder_full: f64,
    /// `‖u − Θ(x−a)/|x−a|‖_{C^{0,β}}` outside the ball of radius `2h` about `a`.
    pub holder_hedgehog: f64,
    pub beta: f64,
    pub energy_proxy: f64,
    pub lip_eta: f64,
    pub lip_eta_inv: f64,
    pub singularity_count: usize,
    pub total_degree: i64,
    /// Set when the singular set is not a single degree-one point.
    pub flagged: bool,
    pub kappa: f64,
    pub energy_bound: f64,
    pub energy_bound_holds: bool,
}

/// Builds the record for a solved field `u` with trace `ψ`.
pub fn stability_record(
    u: &SphereField,
    psi: &BoundaryField,
    p: f64,
    beta: f64,
    reference: &ReferenceSolution,
    rho_min: f64,
) -> Result<StabilityRecord> {
    let id = BoundaryField::identity(psi.sphere_arc());
    let delta = w1p_distance(psi, &id, p)?;
    let sup_distance = lp_distance(psi, &id, f64::INFINITY)?;
    let set = detect_singularities(u, rho_min, DEFAULT_THRESHOLD)?;
    let flagged = set.len() != 1 || set.points[0].degree != 1;
    let a = set
        .points
        .iter()
        .map(|s| s.position())
        .min_by(|x, y| x.norm().total_cmp(&y.norm()))
        .unwrap_or_else(Vec3::zeros);
    let theta = if a.norm() < ANNULUS.0 {
        fit_rotation(u, &a, ANNULUS.0, ANNULUS.1)?
    } else {
        return Err(Error::NotApplicable(format!(
            "singularity at |a| = {} lies outside the fitting annulus",
            a.norm()
        )));
    };
    let model = shifted_hedgehog(u.mesh_arc(), &a).rotated(&theta)?;
    let core = 2.0 * u.mesh().h();
    let holder_hedgehog = holder_distance_outside(u, &model, beta, &[a], core)?;
    let eta = RegistrationMap::from_singularities(
        &[(a, theta)],
        &[(reference.singularity, reference.theta)],
    )?;
    let reg = apply_registration(&reference.field, &eta)?;
    let holder = holder_distance_outside(u, &reg.field, beta, &[a], core)?;
    let holder_full = holder_distance(u, &reg.field, beta)?;
    let energy = dirichlet_energy(u);
    let kappa = delta.sqrt();
    let (energy_bound, energy_bound_holds) = if kappa > 0.0 {
        let c = energy_upper_bound_check(energy, delta, p, kappa)?;
        (c.bound, c.holds)
    } else {
        (HEDGEHOG_ENERGY, energy <= HEDGEHOG_ENERGY)
    };
    let mut theta_rows = [[0.0; 3]; 3];
    for (i, row) in theta_rows.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = theta[(i, j)];
        }
    }
    Ok(StabilityRecord {
        delta,
        p,
        sup_distance,
        a: arr(&a),
        a_norm: a.norm(),
        a_shift: (a - reference.singularity).norm(),
        theta: theta_rows,
        theta_dev: rotation_deviation(&theta),
        energy,
        energy_gap: energy - HEDGEHOG_ENERGY,
        holder,
        holder_full,
        holder_hedgehog,
        beta,
        energy_proxy: energy_proxy(u, &a),
        lip_eta: reg.lip_eta,
        lip_eta_inv: reg.lip_eta_inv,
        singularity_count: set.len(),
        total_degree: set.total_degree(),
        flagged,
        kappa,
        energy_bound,
        energy_bound_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimizer::hedgehog;

    #[test]
    fn proxy_vanishes_on_the_hedgehog() {
        let m = Arc::new(ShellMesh::new(2, 6).unwrap());
        assert!(energy_proxy(&hedgehog(m.clone()), &Vec3::zeros()) < 1e-12);
        let a = Vec3::new(0.05, 0.0, 0.0);
        assert!(energy_proxy(&hedgehog(m.clone()), &a) > 0.0);
        assert!(energy_proxy(&shifted_hedgehog(m, &a), &a) < 1e-12);
    }

    #[test]
    fn bcl_gap_requires_one_singularity() {
        let m = Arc::new(ShellMesh::new(3, 12).unwrap());
        let u = hedgehog(m.clone());
        let empty = SingularSet {
            points: vec![],
            rho_min: 0.3,
            threshold: DEFAULT_THRESHOLD,
        };
        assert!(matches!(bcl_gap(&u, &empty), Err(Error::NotApplicable(_))));
        let set = detect_singularities(&u, 2.0 * m.h(), DEFAULT_THRESHOLD).unwrap();
        let (gap, a) = bcl_gap(&u, &set).unwrap();
        assert!(gap.abs() < 0.05 * HEDGEHOG_ENERGY);
        assert!(a <= 2.0 * m.h());
    }
}
