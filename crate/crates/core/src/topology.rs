//! Degrees of sphere maps and detection of point singularities.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::energy::{check_ball, rescaled_energy_unchecked};
use crate::exec::Exec;
use crate::field::{BoundaryField, SphereField};
use crate::mesh::SphereMesh;
use crate::{Error, Result, Vec3};

/// Default concentration threshold, half the hedgehog energy.
pub const DEFAULT_THRESHOLD: f64 = 4.0 * PI;

/// Residual above which a degree is flagged as under-resolved.
pub const RESIDUAL_WARNING: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Degree {
    pub value: i64,
    /// Total signed solid angle over 4π before rounding.
    pub raw: f64,
    /// `|raw − value|`.
    pub residual: f64,
}

impl Degree {
    fn from_raw(raw: f64) -> Self {
        let value = raw.round();
        Degree {
            value: value as i64,
            raw,
            residual: (raw - value).abs(),
        }
    }

    pub fn is_resolved(&self) -> bool {
        self.residual <= RESIDUAL_WARNING
    }
}

/// Signed solid angle of the spherical triangle `(a, b, c)` of unit vectors
/// (van Oosterom–Strackee).
pub fn solid_angle(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let num = a.dot(&b.cross(c));
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den)
}

/// Degree of vertex data over an oriented triangulation.
pub fn degree_of(triangles: &[[usize; 3]], values: &[Vec3]) -> Degree {
    let total = triangles
        .iter()
        .map(|&[a, b, c]| solid_angle(&values[a], &values[b], &values[c]))
        .fold(0.0, |s, x| s + x);
    Degree::from_raw(total / (4.0 * PI))
}

/// Degree of a boundary map; warns when the residual exceeds 0.1.
pub fn degree(psi: &BoundaryField) -> Result<Degree> {
    let d = degree_of(psi.sphere().triangles(), psi.values());
    if !d.is_resolved() {
        log::warn!("degree residual {:.3} exceeds {RESIDUAL_WARNING}: map under-resolved", d.residual);
    }
    Ok(d)
}

/// Probe level used by [`local_degree`].
fn probe_level(u: &SphereField) -> usize {
    u.mesh().level().max(2)
}

/// Degree of `u` restricted to the sphere `∂B(y, ρ)`.
///
/// The probe is an icosphere at the mesh's subdivision level; values come
/// from point location and P1 interpolation, then normalization.
pub fn local_degree(u: &SphereField, y: &Vec3, rho: f64) -> Result<Degree> {
    let probe = SphereMesh::new(probe_level(u))?;
    local_degree_on(u, y, rho, &probe)
}

pub fn local_degree_on(u: &SphereField, y: &Vec3, rho: f64, probe: &SphereMesh) -> Result<Degree> {
    check_ball(u.mesh(), y, rho)?;
    let mesh = u.mesh();
    let values = probe
        .scaled_points(y, rho)
        .iter()
        .map(|x| {
            let v = mesh.interpolate(u.values(), x)?;
            let n = v.norm();
            if n < 1e-12 {
                return Err(Error::Interpolation(format!(
                    "interpolated value vanishes at {:?}",
                    [x.x, x.y, x.z]
                )));
            }
            Ok(v / n)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(degree_of(probe.triangles(), &values))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularPoint {
    pub position: [f64; 3],
    pub degree: i64,
    /// `(1/ρ_min)·E(B(position, ρ_min))`.
    pub concentration: f64,
    /// Number of concentrating vertices in the cluster.
    pub cluster_size: usize,
}

impl SingularPoint {
    pub fn position(&self) -> Vec3 {
        Vec3::from(self.position)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularSet {
    pub points: Vec<SingularPoint>,
    pub rho_min: f64,
    pub threshold: f64,
}

impl SingularSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_degree(&self) -> i64 {
        self.points.iter().map(|p| p.degree).sum()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            self.0[hi] = lo;
        }
    }
}

/// Energy-concentration singularity detector.
///
/// Vertices `x` with `B(x, ρ_min)` inside the ball and
/// `(1/ρ_min)E(B(x, ρ_min)) ≥ threshold` are grouped by single linkage at
/// distance `2ρ_min`. Each group is represented by the concentration-weighted
/// mean of its vertices and kept when the local degree on the sphere of
/// radius `2ρ_min` (shrunk to fit inside the ball, never below `2h`) is
/// nonzero. Groups whose representatives end up closer than `2ρ_min` are
/// merged.
pub fn detect_singularities(u: &SphereField, rho_min: f64, threshold: f64) -> Result<SingularSet> {
    detect_singularities_with(u, rho_min, threshold, Exec::default())
}

pub fn detect_singularities_with(
    u: &SphereField,
    rho_min: f64,
    threshold: f64,
    exec: Exec,
) -> Result<SingularSet> {
    let mesh = u.mesh();
    check_ball(mesh, &Vec3::zeros(), rho_min)?;
    let candidates: Vec<usize> = (0..mesh.vertex_count())
        .filter(|&v| mesh.vertices()[v].norm() + rho_min <= 1.0 + 1e-12)
        .collect();
    let conc = exec.map_slice(&candidates, |&v| rescaled_energy_unchecked(u, &mesh.vertices()[v], rho_min));
    let hot: Vec<(usize, f64)> = candidates
        .iter()
        .zip(&conc)
        .filter(|(_, &c)| c >= threshold)
        .map(|(&v, &c)| (v, c))
        .collect();

    let link = 2.0 * rho_min;
    let mut uf = UnionFind((0..hot.len()).collect());
    for i in 0..hot.len() {
        for j in (i + 1)..hot.len() {
            if (mesh.vertices()[hot[i].0] - mesh.vertices()[hot[j].0]).norm() <= link {
                uf.union(i, j);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of = vec![usize::MAX; hot.len()];
    for i in 0..hot.len() {
        let r = uf.find(i);
        if root_of[r] == usize::MAX {
            root_of[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_of[r]].push(i);
    }

    let mut merged = true;
    let mut centers: Vec<(Vec3, f64, usize)> = groups
        .iter()
        .map(|g| weighted_center(g.iter().map(|&i| (mesh.vertices()[hot[i].0], hot[i].1))))
        .collect();
    while merged {
        merged = false;
        'outer: for i in 0..centers.len() {
            for j in (i + 1)..centers.len() {
                if (centers[i].0 - centers[j].0).norm() < link {
                    let (a, b) = (centers[i], centers[j]);
                    let w = a.1 + b.1;
                    centers[i] = ((a.0 * a.1 + b.0 * b.1) / w, w, a.2 + b.2);
                    centers.remove(j);
                    merged = true;
                    break 'outer;
                }
            }
        }
    }

    let probe = SphereMesh::new(probe_level(u))?;
    let mut points = Vec::new();
    for (c, _, size) in centers {
        let radius = link.min(1.0 - c.norm());
        if radius < 2.0 * mesh.h() {
            log::warn!("concentration near the boundary at {c:?} cannot be probed");
            continue;
        }
        let d = local_degree_on(u, &c, radius, &probe)?;
        if d.value == 0 {
            continue;
        }
        let concentration = if c.norm() + rho_min <= 1.0 {
            rescaled_energy_unchecked(u, &c, rho_min)
        } else {
            f64::NAN
        };
        points.push(SingularPoint {
            position: [c.x, c.y, c.z],
            degree: d.value,
            concentration,
            cluster_size: size,
        });
    }
    Ok(SingularSet {
        points,
        rho_min,
        threshold,
    })
}

fn weighted_center(items: impl Iterator<Item = (Vec3, f64)>) -> (Vec3, f64, usize) {
    let mut s = Vec3::zeros();
    let mut w = 0.0;
    let mut n = 0;
    for (x, c) in items {
        s += x * c;
        w += c;
        n += 1;
    }
    (s / w, w, n)
}

/// Identity, constant and antipodal maps on a sphere mesh, for tests and demos.
pub fn antipodal(sphere: Arc<SphereMesh>) -> BoundaryField {
    let values = sphere.vertices().iter().map(|w| -w).collect();
    BoundaryField::new(sphere, values).expect("antipodal values are unit vectors")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{eval_boundary_spec, rotation_about, BoundarySpec};
    use crate::mesh::ShellMesh;
    use crate::minimizer::{hedgehog, shifted_hedgehog};

    fn sphere(s: usize) -> Arc<SphereMesh> {
        Arc::new(SphereMesh::new(s).unwrap())
    }

    #[test]
    fn solid_angle_of_octant() {
        let w = solid_angle(&Vec3::x(), &Vec3::y(), &Vec3::z());
        assert!((w - PI / 2.0).abs() < 1e-14);
        assert!((solid_angle(&Vec3::x(), &Vec3::z(), &Vec3::y()) + PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn basic_degrees() {
        let s = sphere(3);
        let id = degree(&BoundaryField::identity(s.clone())).unwrap();
        assert_eq!(id.value, 1);
        assert!(id.residual < 1e-10);
        let c = BoundaryField::new(s.clone(), vec![Vec3::y(); s.vertex_count()]).unwrap();
        assert_eq!(degree(&c).unwrap().value, 0);
        assert_eq!(degree(&antipodal(s.clone())).unwrap().value, -1);
        let r = rotation_about(&Vec3::new(1.0, 1.0, 0.0), 2.0);
        let rot = eval_boundary_spec(&BoundarySpec::rotation(&r), s).unwrap();
        assert_eq!(degree(&rot).unwrap().value, 1);
    }

    #[test]
    fn hedgehog_local_degrees() {
        let m = Arc::new(ShellMesh::new(4, 20).unwrap());
        let u = hedgehog(m.clone());
        for &rho in &[0.2, 0.4, 0.8] {
            assert_eq!(local_degree(&u, &Vec3::zeros(), rho).unwrap().value, 1);
        }
        assert_eq!(local_degree(&u, &Vec3::new(0.6, 0.0, 0.0), 0.2).unwrap().value, 0);
        assert!(local_degree(&u, &Vec3::new(0.9, 0.0, 0.0), 0.2).is_err());
    }

    #[test]
    fn detects_single_hedgehog_singularity() {
        let m = Arc::new(ShellMesh::new(3, 12).unwrap());
        let rho = 2.0 * m.h();
        let set = detect_singularities(&hedgehog(m.clone()), rho, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.points[0].degree, 1);
        assert!(set.points[0].position().norm() <= 2.0 * m.h());
        let c = SphereField::new(m.clone(), vec![Vec3::x(); m.vertex_count()]).unwrap();
        assert!(detect_singularities(&c, rho, DEFAULT_THRESHOLD).unwrap().is_empty());
    }

    #[test]
    fn shifted_hedgehog_singularity_is_tracked() {
        let m = Arc::new(ShellMesh::new(3, 12).unwrap());
        let a = Vec3::new(0.12, -0.05, 0.08);
        let u = shifted_hedgehog(m.clone(), &a);
        let set = detect_singularities(&u, 2.0 * m.h(), DEFAULT_THRESHOLD).unwrap();
        assert_eq!(set.len(), 1);
        assert!((set.points[0].position() - a).norm() < m.h(), "{:?}", set.points[0]);
    }
}
