//! Minimization of the discrete Dirichlet energy over unit-vector fields
//! with fixed boundary values.
//!
//! Writing the energy as `E = Σ_ab K_ab u_a·u_b` with the P1 stiffness `K`,
//! the part of `E` that depends on one interior value `u_i` is
//! `2 u_i·b_i + const` with `b_i = Σ_{j≠i} K_ij u_j`, whose minimum over the
//! unit sphere is `u_i = −b_i/|b_i|`. A sweep applies this update to every
//! interior vertex in ascending order (nonlinear Gauss–Seidel).

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exec::Exec;
use crate::field::{BoundaryField, SphereField};
use crate::linalg::{stiffness, CsrMatrix};
use crate::mesh::ShellMesh;
use crate::{Error, Result, Vec3, HEDGEHOG_ENERGY};

/// How the first restart is initialized.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initialization {
    /// Degree-0 homogeneous extension of the boundary data.
    #[default]
    HomogeneousExtension,
    /// Independent random unit vectors at interior vertices.
    RandomSeeded,
    /// Explicit vertex values; boundary entries are overwritten by the data.
    #[serde(skip)]
    Given(Vec<Vec3>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub max_iterations: usize,
    /// Stop when a sweep lowers the energy by less than this fraction.
    pub tolerance: f64,
    pub initialization: Initialization,
    pub seed: u64,
    /// Number of independent starts; restarts after the first perturb the
    /// initial field with seeded noise of size [`SolveOptions::perturbation`].
    pub restarts: usize,
    pub perturbation: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iterations: 5000,
            tolerance: 1e-8,
            initialization: Initialization::HomogeneousExtension,
            seed: 0,
            restarts: 3,
            perturbation: 0.3,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::param(format!("tolerance {} must be > 0", self.tolerance)));
        }
        if self.restarts < 1 {
            return Err(Error::param("restarts must be >= 1"));
        }
        if self.max_iterations < 1 {
            return Err(Error::param("max_iterations must be >= 1"));
        }
        if !(self.perturbation >= 0.0 && self.perturbation.is_finite()) {
            return Err(Error::param("perturbation must be finite and >= 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Sweeps performed by the returned restart.
    pub iterations: usize,
    /// Energy before the first sweep, then after every sweep.
    pub energy_history: Vec<f64>,
    pub final_energy: f64,
    pub converged: bool,
    /// Index of the returned restart.
    pub best_restart: usize,
    pub restart_energies: Vec<f64>,
    pub restart_converged: Vec<bool>,
    /// Whether each restart's energy history is nonincreasing (to a relative
    /// round-off of 1e-12 per sweep).
    pub restart_monotone: Vec<bool>,
    /// Vertices skipped because their local average vanished.
    pub skipped_updates: usize,
    /// Excluded from serialized reports so they stay reproducible.
    #[serde(skip)]
    pub wall_time: Duration,
}

/// The hedgehog `x/|x|`; the origin vertex gets `e₃`.
pub fn hedgehog(mesh: Arc<ShellMesh>) -> SphereField {
    let values = mesh
        .vertices()
        .iter()
        .map(|x| {
            let r = x.norm();
            if r == 0.0 {
                Vec3::z()
            } else {
                x / r
            }
        })
        .collect();
    SphereField::new(mesh, values).expect("hedgehog values are unit vectors")
}

/// Hedgehog centered at `a`: `(x − a)/|x − a|`, `e₃` at `x = a`.
pub fn shifted_hedgehog(mesh: Arc<ShellMesh>, a: &Vec3) -> SphereField {
    let values = mesh
        .vertices()
        .iter()
        .map(|x| {
            let d = x - a;
            let r = d.norm();
            if r == 0.0 {
                Vec3::z()
            } else {
                d / r
            }
        })
        .collect();
    SphereField::new(mesh, values).expect("hedgehog values are unit vectors")
}

fn check_sphere(psi: &BoundaryField, mesh: &ShellMesh) -> Result<()> {
    if psi.sphere().level() != mesh.level() {
        return Err(Error::MeshMismatch);
    }
    Ok(())
}

/// `x ↦ ψ(x/|x|)`, exact at every shell vertex; the origin gets `ψ(ω₀)`.
pub fn homogeneous_extension(psi: &BoundaryField, mesh: Arc<ShellMesh>) -> Result<SphereField> {
    check_sphere(psi, &mesh)?;
    let n = mesh.sphere().vertex_count();
    let mut values = Vec::with_capacity(mesh.vertex_count());
    values.push(psi.values()[0]);
    for _ in 0..mesh.layers() {
        values.extend_from_slice(psi.values());
    }
    debug_assert_eq!(values.len(), 1 + mesh.layers() * n);
    SphereField::new(mesh, values)
}

/// Whether `E ≤ (1+κ)·8π + (1+1/κ)·(4π)^{(p−2)/p}·δ²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub holds: bool,
    pub bound: f64,
    /// `bound − energy`.
    pub slack: f64,
}

pub fn energy_upper_bound(delta: f64, p: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::param(format!("κ = {kappa} must be positive")));
    }
    if !(p >= 2.0) {
        return Err(Error::param(format!("p = {p} must be >= 2")));
    }
    if !(delta >= 0.0) {
        return Err(Error::param(format!("δ = {delta} must be >= 0")));
    }
    let area = 4.0 * std::f64::consts::PI;
    let factor = if p.is_infinite() { area } else { area.powf((p - 2.0) / p) };
    Ok((1.0 + kappa) * HEDGEHOG_ENERGY + (1.0 + 1.0 / kappa) * factor * delta * delta)
}

pub fn energy_upper_bound_check(energy: f64, delta: f64, p: f64, kappa: f64) -> Result<BoundCheck> {
    let bound = energy_upper_bound(delta, p, kappa)?;
    Ok(BoundCheck {
        holds: energy <= bound,
        bound,
        slack: bound - energy,
    })
}

/// Reusable solver state for one mesh: the stiffness matrix and a free-vertex
/// list.
pub struct Solver {
    mesh: Arc<ShellMesh>,
    k: CsrMatrix,
    free: Vec<usize>,
}

impl Solver {
    pub fn new(mesh: Arc<ShellMesh>) -> Self {
        let k = stiffness(&mesh);
        let free = (0..mesh.vertex_count()).filter(|&v| !mesh.is_boundary(v)).collect();
        Solver { mesh, k, free }
    }

    pub fn mesh(&self) -> &Arc<ShellMesh> {
        &self.mesh
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.k
    }

    /// `Σ_ab K_ab u_a·u_b`, rows summed in order.
    pub fn energy(&self, u: &[Vec3]) -> f64 {
        let mut total = 0.0;
        for a in 0..self.k.n() {
            let (cols, vals) = self.k.row(a);
            let mut s = Vec3::zeros();
            for (&b, &w) in cols.iter().zip(vals) {
                s += u[b] * w;
            }
            total += u[a].dot(&s);
        }
        total
    }

    /// `b_i = Σ_{j≠i} K_ij u_j`.
    fn off_diagonal_sum(&self, u: &[Vec3], i: usize) -> Vec3 {
        let (cols, vals) = self.k.row(i);
        let mut b = Vec3::zeros();
        for (&j, &w) in cols.iter().zip(vals) {
            if j != i {
                b += u[j] * w;
            }
        }
        b
    }

    /// One ascending Gauss–Seidel sweep; returns the number of skipped
    /// vertices.
    pub fn sweep(&self, u: &mut [Vec3]) -> usize {
        let mut skipped = 0;
        for &i in &self.free {
            let b = self.off_diagonal_sum(u, i);
            let nb = b.norm();
            let old = u[i];
            if nb > 1e-14 {
                let cand = -b / nb;
                // Local energy change 2(cand − old)·b.
                if (cand - old).dot(&b) <= 0.0 {
                    u[i] = cand;
                    continue;
                }
            }
            match self.gradient_step(u, i, &b) {
                Some(v) => u[i] = v,
                None => {
                    skipped += 1;
                    log::debug!("vertex {i}: no decreasing update, left unchanged");
                }
            }
        }
        skipped
    }

    /// Projected gradient step with backtracking on the local energy.
    fn gradient_step(&self, u: &[Vec3], i: usize, b: &Vec3) -> Option<Vec3> {
        let old = u[i];
        let kii = self.k.diag(i);
        let local = |v: &Vec3| kii * v.norm_squared() + 2.0 * v.dot(b);
        let e0 = local(&old);
        let g = b - old * old.dot(b);
        if g.norm() < 1e-300 {
            return None;
        }
        let mut t = 1.0 / (kii.abs() + b.norm());
        for _ in 0..40 {
            let v = (old - g * t).normalize();
            if local(&v) < e0 {
                return Some(v);
            }
            t *= 0.5;
        }
        None
    }

    /// Runs sweeps from `u` until the relative decrease drops below the
    /// tolerance.
    pub fn relax(&self, u: &mut [Vec3], opts: &SolveOptions) -> RelaxOutcome {
        let mut history = vec![self.energy(u)];
        let mut skipped = 0;
        let mut converged = false;
        for _ in 0..opts.max_iterations {
            let before = *history.last().unwrap();
            skipped += self.sweep(u);
            let after = self.energy(u);
            history.push(after);
            if before <= 0.0 || (before - after) <= opts.tolerance * before {
                converged = true;
                break;
            }
        }
        RelaxOutcome {
            history,
            skipped,
            converged,
        }
    }
}

pub struct RelaxOutcome {
    pub history: Vec<f64>,
    pub skipped: usize,
    pub converged: bool,
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm_squared();
        if n > 1e-4 && n <= 1.0 {
            return v / n.sqrt();
        }
    }
}

/// Initial vertex values for restart `r`.
fn initial_field(
    mesh: &Arc<ShellMesh>,
    psi: &BoundaryField,
    opts: &SolveOptions,
    restart: usize,
) -> Result<Vec<Vec3>> {
    let mut u = match &opts.initialization {
        Initialization::HomogeneousExtension => {
            homogeneous_extension(psi, mesh.clone())?.into_values()
        }
        Initialization::RandomSeeded => homogeneous_extension(psi, mesh.clone())?.into_values(),
        Initialization::Given(values) => {
            if values.len() != mesh.vertex_count() {
                return Err(Error::Input(format!(
                    "initial field has {} values for {} vertices",
                    values.len(),
                    mesh.vertex_count()
                )));
            }
            SphereField::from_unnormalized(mesh.clone(), values.clone())?.into_values()
        }
    };
    let random = matches!(opts.initialization, Initialization::RandomSeeded);
    if random || restart > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(restart as u64));
        for (v, val) in u.iter_mut().enumerate() {
            if mesh.is_boundary(v) {
                continue;
            }
            let noise = random_unit(&mut rng);
            *val = if random {
                noise
            } else {
                let w = *val + noise * opts.perturbation;
                if w.norm() > 1e-8 {
                    w.normalize()
                } else {
                    noise
                }
            };
        }
    }
    let n = mesh.sphere().vertex_count();
    let boundary = mesh.boundary_vertex_ids();
    u[boundary].copy_from_slice(&psi.values()[..n]);
    Ok(u)
}

pub fn is_nonincreasing(history: &[f64]) -> bool {
    history.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs())
}

/// Minimizes the discrete energy with boundary values `ψ`.
///
/// Restarts run concurrently under the default [`Exec`]; the lowest final
/// energy wins, ties going to the earliest restart.
pub fn minimize(
    mesh: Arc<ShellMesh>,
    psi: &BoundaryField,
    opts: &SolveOptions,
) -> Result<(SphereField, SolveReport)> {
    minimize_with(mesh, psi, opts, Exec::default())
}

pub fn minimize_with(
    mesh: Arc<ShellMesh>,
    psi: &BoundaryField,
    opts: &SolveOptions,
    exec: Exec,
) -> Result<(SphereField, SolveReport)> {
    opts.validate()?;
    check_sphere(psi, &mesh)?;
    if let Some(i) = psi.values().iter().position(|v| (v.norm() - 1.0).abs() > 1e-10) {
        return Err(Error::Input(format!("boundary value {i} is not a unit vector")));
    }
    let start = Instant::now();
    let solver = Solver::new(mesh.clone());
    let inits = (0..opts.restarts)
        .map(|r| initial_field(&mesh, psi, opts, r))
        .collect::<Result<Vec<_>>>()?;
    let runs = exec.map_slice(&inits, |init| {
        let mut u = init.clone();
        let out = solver.relax(&mut u, opts);
        (u, out)
    });
    let restart_energies: Vec<f64> = runs.iter().map(|(_, o)| *o.history.last().unwrap()).collect();
    let restart_converged = runs.iter().map(|(_, o)| o.converged).collect();
    let restart_monotone = runs.iter().map(|(_, o)| is_nonincreasing(&o.history)).collect();
    let mut best = 0;
    for (r, &e) in restart_energies.iter().enumerate() {
        if e < restart_energies[best] {
            best = r;
        }
    }
    let (u, out) = runs.into_iter().nth(best).unwrap();
    if out.skipped > 0 {
        log::warn!("{} vertex updates skipped (vanishing local average)", out.skipped);
    }
    let report = SolveReport {
        iterations: out.history.len() - 1,
        final_energy: *out.history.last().unwrap(),
        energy_history: out.history,
        converged: out.converged,
        best_restart: best,
        restart_energies,
        restart_converged,
        restart_monotone,
        skipped_updates: out.skipped,
        wall_time: start.elapsed(),
    };
    Ok((SphereField::new(mesh, u)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::dirichlet_energy;
    use crate::field::{eval_boundary_spec, rotation_about, BoundarySpec};

    fn mesh(s: usize, l: usize) -> Arc<ShellMesh> {
        Arc::new(ShellMesh::new(s, l).unwrap())
    }

    #[test]
    fn hedgehog_values() {
        let m = mesh(2, 4);
        let u = hedgehog(m.clone());
        for v in m.boundary_vertex_ids() {
            assert!((u.values()[v] - m.vertices()[v]).norm() < 1e-15);
        }
        let probe = shifted_hedgehog(m.clone(), &Vec3::zeros());
        assert_eq!(probe.values(), u.values());
        assert_eq!(u.values()[0], Vec3::z());
        // A vertex on the e₃ axis at radius 1/2, if present.
        if let Some(v) = m
            .vertices()
            .iter()
            .position(|x| (x - Vec3::new(0.0, 0.0, 0.5)).norm() < 1e-12)
        {
            assert!((u.values()[v] - Vec3::z()).norm() < 1e-15);
        }
    }

    #[test]
    fn homogeneous_extension_cases() {
        let m = mesh(2, 4);
        let id = BoundaryField::identity(m.sphere_arc());
        let ext = homogeneous_extension(&id, m.clone()).unwrap();
        let hh = hedgehog(m.clone());
        for v in 1..m.vertex_count() {
            assert!((ext.values()[v] - hh.values()[v]).norm() < 1e-12);
        }
        let r = rotation_about(&Vec3::new(0.2, 1.0, -0.4), 0.8);
        let rot = eval_boundary_spec(&BoundarySpec::rotation(&r), m.sphere_arc()).unwrap();
        let ext = homogeneous_extension(&rot, m.clone()).unwrap();
        for v in 1..m.vertex_count() {
            assert!((ext.values()[v] - r * hh.values()[v]).norm() < 1e-12);
        }
        let other = BoundaryField::identity(Arc::new(crate::SphereMesh::new(3).unwrap()));
        assert!(matches!(homogeneous_extension(&other, m), Err(Error::MeshMismatch)));
    }

    #[test]
    fn upper_bound_arithmetic() {
        let c = energy_upper_bound_check(HEDGEHOG_ENERGY, 0.0, 4.0, 0.3).unwrap();
        assert!(c.holds);
        assert!((c.slack - HEDGEHOG_ENERGY * 0.3).abs() < 1e-12);
        assert!(!energy_upper_bound_check(10.0 * HEDGEHOG_ENERGY, 0.01, 4.0, 0.1).unwrap().holds);
        assert!(energy_upper_bound_check(1.0, 0.1, 1.5, 0.1).is_err());
        assert!(energy_upper_bound_check(1.0, 0.1, 2.0, 0.0).is_err());
    }

    #[test]
    fn constant_boundary_converges_immediately() {
        let m = mesh(2, 4);
        let c = BoundaryField::new(m.sphere_arc(), vec![Vec3::x(); m.sphere().vertex_count()])
            .unwrap();
        let opts = SolveOptions {
            restarts: 1,
            ..Default::default()
        };
        let (u, rep) = minimize(m, &c, &opts).unwrap();
        assert!(rep.converged && rep.iterations <= 2);
        assert!(dirichlet_energy(&u) < 1e-24);
    }

    #[test]
    fn sweeps_decrease_energy_and_keep_invariants() {
        let m = mesh(2, 4);
        let psi = eval_boundary_spec(
            &BoundarySpec::cap_twist(Vec3::new(0.0, 0.6, 0.8), 0.8, 1.0),
            m.sphere_arc(),
        )
        .unwrap();
        let opts = SolveOptions {
            initialization: Initialization::RandomSeeded,
            restarts: 2,
            max_iterations: 200,
            seed: 9,
            ..Default::default()
        };
        let (u, rep) = minimize(m.clone(), &psi, &opts).unwrap();
        for w in rep.energy_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        for (k, v) in m.boundary_vertex_ids().enumerate() {
            assert_eq!(u.values()[v], psi.values()[k]);
        }
        assert!(u.values().iter().all(|v| (v.norm() - 1.0).abs() < 1e-10));
        let (u2, rep2) = minimize(m, &psi, &opts).unwrap();
        assert_eq!(u.values(), u2.values());
        assert_eq!(rep.energy_history, rep2.energy_history);
    }

    #[test]
    fn solver_energy_matches_tet_energy() {
        let m = mesh(2, 5);
        let u = hedgehog(m.clone());
        let s = Solver::new(m);
        let e = s.energy(u.values());
        assert!((e - dirichlet_energy(&u)).abs() < 1e-10 * e);
    }

    #[test]
    fn non_unit_boundary_is_rejected() {
        let m = mesh(1, 2);
        let psi = BoundaryField::identity(m.sphere_arc());
        let opts = SolveOptions {
            restarts: 0,
            ..Default::default()
        };
        assert!(minimize(m, &psi, &opts).is_err());
    }

    #[test]
    fn sequential_and_parallel_solves_agree() {
        let m = mesh(2, 4);
        let psi = BoundaryField::identity(m.sphere_arc());
        let opts = SolveOptions {
            max_iterations: 100,
            ..Default::default()
        };
        let (a, _) = minimize_with(m.clone(), &psi, &opts, Exec::Sequential).unwrap();
        let (b, _) = minimize_with(m, &psi, &opts, Exec::default()).unwrap();
        assert_eq!(a.values(), b.values());
    }
}
