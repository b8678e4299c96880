//! S²-valued fields on ball and sphere meshes, boundary-map families and
//! the distances used to compare them.
//!
//! All norms treat maps as embedded in R³: differences are componentwise.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Complex, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exec::Exec;
use crate::mesh::{ShellMesh, SphereMesh};
use crate::{Error, Result, Vec3};

const UNIT_TOL: f64 = 1e-10;

/// Per-vertex unit vectors on a [`ShellMesh`].
#[derive(Clone, Debug)]
pub struct SphereField {
    mesh: Arc<ShellMesh>,
    values: Vec<Vec3>,
}

impl SphereField {
    /// Wraps values, checking count and unit norm.
    pub fn new(mesh: Arc<ShellMesh>, values: Vec<Vec3>) -> Result<Self> {
        if values.len() != mesh.vertex_count() {
            return Err(Error::Input(format!(
                "{} values for {} vertices",
                values.len(),
                mesh.vertex_count()
            )));
        }
        if let Some(i) = values.iter().position(|v| (v.norm() - 1.0).abs() > UNIT_TOL) {
            return Err(Error::Input(format!(
                "value {i} has norm {} (expected 1)",
                values[i].norm()
            )));
        }
        Ok(SphereField { mesh, values })
    }

    /// Normalizes every value; fails on (near) zero vectors.
    pub fn from_unnormalized(mesh: Arc<ShellMesh>, values: Vec<Vec3>) -> Result<Self> {
        let values = normalize_all(values)?;
        Self::new(mesh, values)
    }

    pub fn mesh(&self) -> &ShellMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> Arc<ShellMesh> {
        Arc::clone(&self.mesh)
    }

    pub fn values(&self) -> &[Vec3] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Vec3> {
        self.values
    }

    pub fn same_mesh(&self, other: &SphereField) -> bool {
        self.mesh.same_as(&other.mesh)
    }

    /// Applies a fixed 3×3 matrix to every value (e.g. a rotation).
    pub fn rotated(&self, m: &Matrix3<f64>) -> Result<SphereField> {
        SphereField::from_unnormalized(self.mesh_arc(), self.values.iter().map(|v| m * v).collect())
    }

    /// Field values on the boundary shell, as a boundary field.
    pub fn trace(&self) -> BoundaryField {
        BoundaryField {
            sphere: self.mesh.sphere_arc(),
            values: self.mesh.boundary_vertex_ids().map(|v| self.values[v]).collect(),
        }
    }
}

/// Per-vertex unit vectors on a [`SphereMesh`].
#[derive(Clone, Debug)]
pub struct BoundaryField {
    sphere: Arc<SphereMesh>,
    values: Vec<Vec3>,
}

impl BoundaryField {
    pub fn new(sphere: Arc<SphereMesh>, values: Vec<Vec3>) -> Result<Self> {
        if values.len() != sphere.vertex_count() {
            return Err(Error::Input(format!(
                "{} values for {} sphere vertices",
                values.len(),
                sphere.vertex_count()
            )));
        }
        if let Some(i) = values.iter().position(|v| (v.norm() - 1.0).abs() > UNIT_TOL) {
            return Err(Error::Input(format!(
                "boundary value {i} has norm {} (expected 1)",
                values[i].norm()
            )));
        }
        Ok(BoundaryField { sphere, values })
    }

    pub fn identity(sphere: Arc<SphereMesh>) -> Self {
        let values = sphere.vertices().to_vec();
        BoundaryField { sphere, values }
    }

    pub fn sphere(&self) -> &SphereMesh {
        &self.sphere
    }

    pub fn sphere_arc(&self) -> Arc<SphereMesh> {
        Arc::clone(&self.sphere)
    }

    pub fn values(&self) -> &[Vec3] {
        &self.values
    }

    pub fn same_mesh(&self, other: &BoundaryField) -> bool {
        Arc::ptr_eq(&self.sphere, &other.sphere) || self.sphere.level() == other.sphere.level()
    }

    /// Pointwise `m·ψ`, renormalized.
    pub fn mapped(&self, f: impl Fn(&Vec3) -> Vec3) -> Result<BoundaryField> {
        BoundaryField::new(self.sphere_arc(), normalize_all(self.values.iter().map(f).collect())?)
    }
}

fn normalize_all(mut values: Vec<Vec3>) -> Result<Vec<Vec3>> {
    for (i, v) in values.iter_mut().enumerate() {
        let n = v.norm();
        if !(n > 1e-300) || !n.is_finite() {
            return Err(Error::Input(format!("value {i} cannot be normalized ({n})")));
        }
        // Already-unit values are kept bit-for-bit.
        if (n - 1.0).abs() > f64::EPSILON {
            *v /= n;
        }
    }
    Ok(values)
}

/// Symbolic boundary maps S² → S².
///
/// JSON form: `{"type": "<kind>", ...}` with the fields below. Vectors are
/// `[x, y, z]` arrays and matrices are row-major `[[..], [..], [..]]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySpec {
    Identity,
    Constant {
        value: [f64; 3],
    },
    /// `ω ↦ Θω` for an orthogonal `Θ`.
    Rotation {
        matrix: [[f64; 3]; 3],
    },
    /// Rotates points of the cap `dist(ω, center) < radius` about `axis`
    /// (the cap center when absent) by `angle · b(dist/radius)` with the
    /// bump `b(t) = 1 − 3t² + 2t³`.
    CapTwist {
        center: [f64; 3],
        radius: f64,
        angle: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        axis: Option<[f64; 3]>,
    },
    /// A degree +1 bubble in the cap of radius `scale` about `center` and a
    /// degree −1 bubble in a second cap of the same radius whose boundary is
    /// at geodesic distance `separation` from the first. The second center
    /// lies along `direction` (a default tangent when absent).
    BubbleDipole {
        center: [f64; 3],
        scale: f64,
        separation: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        direction: Option<[f64; 3]>,
    },
    /// Applies the listed maps in order: `maps[n-1] ∘ … ∘ maps[0]`.
    Composition {
        maps: Vec<BoundarySpec>,
    },
}

/// Relative size of the inner bubble core within a dipole cap.
pub const BUBBLE_CORE: f64 = 0.5;

/// The C¹ cutoff `1 − 3t² + 2t³`, equal to 1 at 0 and 0 at 1.
pub fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        1.0 - t * t * (3.0 - 2.0 * t)
    }
}

/// Derivative of [`bump`].
pub fn bump_derivative(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        6.0 * t * (t - 1.0)
    }
}

fn v3(a: &[f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

/// Rodrigues rotation matrix about a unit axis.
pub fn rotation_about(axis: &Vec3, angle: f64) -> Matrix3<f64> {
    let k = axis.normalize();
    let (s, c) = angle.sin_cos();
    let kx = Matrix3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
    Matrix3::identity() + kx * s + kx * kx * (1.0 - c)
}

/// Unit vector perpendicular to `n`, chosen deterministically.
pub fn perpendicular(n: &Vec3) -> Vec3 {
    let a = n.abs();
    let trial = if a.x <= a.y && a.x <= a.z {
        Vec3::x()
    } else if a.y <= a.z {
        Vec3::y()
    } else {
        Vec3::z()
    };
    n.cross(&trial).normalize()
}

impl BoundarySpec {
    pub fn rotation(m: &Matrix3<f64>) -> Self {
        let mut matrix = [[0.0; 3]; 3];
        for (i, row) in matrix.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = m[(i, j)];
            }
        }
        BoundarySpec::Rotation { matrix }
    }

    pub fn rotation_axis_angle(axis: Vec3, angle: f64) -> Self {
        Self::rotation(&rotation_about(&axis, angle))
    }

    pub fn cap_twist(center: Vec3, radius: f64, angle: f64) -> Self {
        BoundarySpec::CapTwist {
            center: center.into(),
            radius,
            angle,
            axis: None,
        }
    }

    pub fn bubble_dipole(center: Vec3, scale: f64, separation: f64) -> Self {
        BoundarySpec::BubbleDipole {
            center: center.into(),
            scale,
            separation,
            direction: None,
        }
    }

    /// Checks parameter ranges.
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: &[f64; 3]| -> Result<()> {
            let n = v3(v).norm();
            if (n - 1.0).abs() > 1e-9 {
                return Err(Error::param(format!("{name} must be a unit vector (norm {n})")));
            }
            Ok(())
        };
        match self {
            BoundarySpec::Identity => Ok(()),
            BoundarySpec::Constant { value } => unit("constant value", value),
            BoundarySpec::Rotation { matrix } => {
                let m = Matrix3::from_fn(|i, j| matrix[i][j]);
                let err = (m.transpose() * m - Matrix3::identity()).abs().max();
                if err > 1e-12 {
                    return Err(Error::param(format!(
                        "rotation matrix is not orthogonal (deviation {err:e})"
                    )));
                }
                Ok(())
            }
            BoundarySpec::CapTwist {
                center,
                radius,
                angle,
                axis,
            } => {
                unit("cap center", center)?;
                if let Some(a) = axis {
                    unit("cap axis", a)?;
                }
                if !(*radius > 0.0 && *radius < PI / 2.0) {
                    return Err(Error::param(format!("cap radius {radius} outside ]0, π/2[")));
                }
                if !angle.is_finite() {
                    return Err(Error::param("cap angle must be finite"));
                }
                Ok(())
            }
            BoundarySpec::BubbleDipole {
                center,
                scale,
                separation,
                direction,
            } => {
                unit("dipole center", center)?;
                if !(*scale > 0.0 && *scale < PI / 2.0) {
                    return Err(Error::param(format!("dipole scale {scale} outside ]0, π/2[")));
                }
                if !(*separation > 0.0 && *separation < PI / 4.0) {
                    return Err(Error::param(format!(
                        "dipole separation {separation} outside ]0, π/4["
                    )));
                }
                if 2.0 * scale + separation >= PI {
                    return Err(Error::param(format!(
                        "dipole caps overlap: 2·{scale} + {separation} >= π"
                    )));
                }
                if let Some(d) = direction {
                    let c = v3(center);
                    let t = v3(d) - c * c.dot(&v3(d));
                    if t.norm() < 1e-9 {
                        return Err(Error::param("dipole direction is parallel to the center"));
                    }
                }
                Ok(())
            }
            BoundarySpec::Composition { maps } => maps.iter().try_for_each(|m| m.validate()),
        }
    }

    /// Evaluates the map at a point of S².
    pub fn apply(&self, w: &Vec3) -> Vec3 {
        match self {
            BoundarySpec::Identity => *w,
            BoundarySpec::Constant { value } => v3(value),
            BoundarySpec::Rotation { matrix } => Matrix3::from_fn(|i, j| matrix[i][j]) * w,
            BoundarySpec::CapTwist {
                center,
                radius,
                angle,
                axis,
            } => {
                let c = v3(center);
                let dist = w.dot(&c).clamp(-1.0, 1.0).acos();
                if dist >= *radius {
                    return *w;
                }
                let axis = axis.map(|a| v3(&a)).unwrap_or(c);
                (rotation_about(&axis, angle * bump(dist / radius)) * w).normalize()
            }
            BoundarySpec::BubbleDipole {
                center,
                scale,
                separation,
                direction,
            } => {
                let (first, second) = dipole_caps(&v3(center), *scale, *separation, direction);
                if let Some(v) = first.apply(w, *scale, false) {
                    v
                } else if let Some(v) = second.apply(w, *scale, true) {
                    v
                } else {
                    *w
                }
            }
            BoundarySpec::Composition { maps } => {
                maps.iter().fold(*w, |acc, m| m.apply(&acc).normalize())
            }
        }
    }
}

/// Right-handed frame `(e1, e2, n)` around a cap center.
#[derive(Clone, Copy, Debug)]
struct CapFrame {
    n: Vec3,
    e1: Vec3,
    e2: Vec3,
}

impl CapFrame {
    fn new(n: Vec3, e1: Vec3) -> Self {
        let e1 = (e1 - n * n.dot(&e1)).normalize();
        CapFrame {
            n,
            e1,
            e2: n.cross(&e1),
        }
    }

    /// Bubble map inside the cap of geodesic radius `scale`, `None` outside.
    ///
    /// In the stereographic coordinate `z` about the center the map is
    /// `z + b(t)·cℓ/z` for the +1 bubble and `z + b(t)·cℓ/z̄` for the −1
    /// bubble, with `ℓ = tan(scale/2)` the cap radius in `z`, `t` the
    /// normalized geodesic distance and `c` the relative core size: the
    /// sphere is covered once inside `|z| ≲ cℓ`. The center goes to `−n`.
    fn apply(&self, w: &Vec3, scale: f64, anti: bool) -> Option<Vec3> {
        let cosd = w.dot(&self.n).clamp(-1.0, 1.0);
        let dist = cosd.acos();
        if dist >= scale {
            return None;
        }
        let t = dist / scale;
        let ell = (scale / 2.0).tan();
        let z = Complex::new(w.dot(&self.e1), w.dot(&self.e2)) / (1.0 + cosd);
        if z.norm_sqr() == 0.0 {
            return Some(-self.n);
        }
        let pole = if anti { z.conj() } else { z };
        let wz = z + pole.inv() * (bump(t) * BUBBLE_CORE * ell);
        let m2 = wz.norm_sqr();
        if !m2.is_finite() {
            return Some(-self.n);
        }
        let v = (self.n * (1.0 - m2) + (self.e1 * wz.re + self.e2 * wz.im) * 2.0) / (1.0 + m2);
        Some(v.normalize())
    }
}

fn dipole_caps(
    center: &Vec3,
    scale: f64,
    separation: f64,
    direction: &Option<[f64; 3]>,
) -> (CapFrame, CapFrame) {
    let n = center.normalize();
    let t = match direction {
        Some(d) => v3(d),
        None => perpendicular(&n),
    };
    let first = CapFrame::new(n, t);
    let gap = 2.0 * scale + separation;
    let n2 = (n * gap.cos() + first.e1 * gap.sin()).normalize();
    // Tangent at the second center pointing away from the first.
    let e = first.e1 * gap.cos() - n * gap.sin();
    (first, CapFrame::new(n2, e))
}

/// Centers of the +1 and −1 bubble caps of a dipole spec.
pub fn dipole_centers(spec: &BoundarySpec) -> Option<(Vec3, Vec3)> {
    match spec {
        BoundarySpec::BubbleDipole {
            center,
            scale,
            separation,
            direction,
        } => {
            let (a, b) = dipole_caps(&v3(center), *scale, *separation, direction);
            Some((a.n, b.n))
        }
        _ => None,
    }
}

/// Samples a boundary spec at the sphere-mesh vertices.
pub fn eval_boundary_spec(spec: &BoundarySpec, sphere: Arc<SphereMesh>) -> Result<BoundaryField> {
    spec.validate()?;
    let values = sphere.vertices().iter().map(|w| spec.apply(w)).collect();
    BoundaryField::new(sphere, normalize_all(values)?)
}

/// The two parts of a discrete W^{1,p} distance on the sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct W1pParts {
    /// `‖f − g‖_{L^p}` (maximum over vertices for p = ∞).
    pub lp: f64,
    /// `‖∇_T(f − g)‖_{L^p}` (maximum over triangles for p = ∞).
    pub grad: f64,
    /// Combined norm `(lp^p + grad^p)^{1/p}`, or `lp + grad` for p = ∞.
    pub value: f64,
}

/// Per-vertex differences and per-triangle Frobenius gradient norms.
fn difference_data(f: &BoundaryField, g: &BoundaryField) -> Result<(Vec<f64>, Vec<f64>)> {
    if !f.same_mesh(g) {
        return Err(Error::MeshMismatch);
    }
    let sphere = f.sphere();
    let diff: Vec<Vec3> = f.values.iter().zip(&g.values).map(|(a, b)| a - b).collect();
    let point = diff.iter().map(|d| d.norm()).collect();
    let grad = (0..sphere.triangles().len())
        .map(|t| triangle_gradient_norm(sphere, t, &diff))
        .collect();
    Ok((point, grad))
}

/// Frobenius norm of the tangential gradient of the affine interpolant of
/// vector data on triangle `t`.
pub fn triangle_gradient_norm(sphere: &SphereMesh, t: usize, data: &[Vec3]) -> f64 {
    let g = sphere.triangle_gradients(t);
    let tri = sphere.triangles()[t];
    let mut sq = 0.0;
    for c in 0..3 {
        let grad = g[0] * data[tri[0]][c] + g[1] * data[tri[1]][c] + g[2] * data[tri[2]][c];
        sq += grad.norm_squared();
    }
    sq.sqrt()
}

fn lp_norm(values: &[f64], weights: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().cloned().fold(0.0, f64::max);
    }
    values
        .iter()
        .zip(weights)
        .map(|(v, w)| w * v.powf(p))
        .fold(0.0, |a, x| a + x)
        .powf(1.0 / p)
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(Error::param(format!("exponent p = {p} must be >= 1")));
    }
    Ok(())
}

/// Discrete `‖f − g‖_{W^{1,p}(S²)}` with lumped vertex areas for the L^p part
/// and per-triangle constant gradients weighted by triangle area.
pub fn w1p_distance(f: &BoundaryField, g: &BoundaryField, p: f64) -> Result<f64> {
    Ok(w1p_parts(f, g, p)?.value)
}

pub fn w1p_parts(f: &BoundaryField, g: &BoundaryField, p: f64) -> Result<W1pParts> {
    check_p(p)?;
    let (point, grad) = difference_data(f, g)?;
    let sphere = f.sphere();
    let vertex_w = sphere.vertex_areas();
    let tri_w: Vec<f64> = (0..sphere.triangles().len()).map(|t| sphere.triangle_area(t)).collect();
    let lp = lp_norm(&point, &vertex_w, p);
    let gr = lp_norm(&grad, &tri_w, p);
    let value = if p.is_infinite() {
        lp + gr
    } else {
        (lp.powf(p) + gr.powf(p)).powf(1.0 / p)
    };
    Ok(W1pParts {
        lp,
        grad: gr,
        value,
    })
}

/// Probability-normalized W^{1,p} distance: the vertex and triangle
/// measures each get mass ½, so the result is nondecreasing in `p`.
pub fn w1p_distance_normalized(f: &BoundaryField, g: &BoundaryField, p: f64) -> Result<f64> {
    check_p(p)?;
    let (point, grad) = difference_data(f, g)?;
    let sphere = f.sphere();
    let area = sphere.total_area();
    let vertex_w: Vec<f64> = sphere.vertex_areas().iter().map(|a| 0.5 * a / area).collect();
    let tri_w: Vec<f64> =
        (0..sphere.triangles().len()).map(|t| 0.5 * sphere.triangle_area(t) / area).collect();
    if p.is_infinite() {
        return Ok(lp_norm(&point, &vertex_w, p).max(lp_norm(&grad, &tri_w, p)));
    }
    let a = lp_norm(&point, &vertex_w, p).powf(p);
    let b = lp_norm(&grad, &tri_w, p).powf(p);
    Ok((a + b).powf(1.0 / p))
}

/// `‖∇_T(f − g)‖_{L^p}` alone.
pub fn w1p_seminorm(f: &BoundaryField, g: &BoundaryField, p: f64) -> Result<f64> {
    Ok(w1p_parts(f, g, p)?.grad)
}

/// `‖f − g‖_{L^p}` with lumped vertex weights.
pub fn lp_distance(f: &BoundaryField, g: &BoundaryField, p: f64) -> Result<f64> {
    Ok(w1p_parts(f, g, p)?.lp)
}

/// Seed of the long-range pair sample used by [`holder_distance`].
pub const HOLDER_SEED: u64 = 0x5EED;
/// Number of random long-range pairs.
pub const HOLDER_RANDOM_PAIRS: usize = 100_000;

/// Discrete Hölder distance `‖u − v‖_{C^{0,β}}` over the ball.
///
/// Sup term over all vertices plus the seminorm over sampled vertex pairs at
/// distance at least `2h`: every pair sharing a tetrahedron plus
/// [`HOLDER_RANDOM_PAIRS`] seeded random pairs.
pub fn holder_distance(u: &SphereField, v: &SphereField, beta: f64) -> Result<f64> {
    if !u.same_mesh(v) {
        return Err(Error::MeshMismatch);
    }
    let mesh = u.mesh();
    let mut edges = Vec::new();
    for a in 0..mesh.vertex_count() {
        for &b in mesh.neighbors(a) {
            if b > a {
                edges.push((a, b));
            }
        }
    }
    holder_distance_points(
        mesh.vertices(),
        u.values(),
        v.values(),
        &edges,
        2.0 * mesh.h(),
        beta,
        Exec::default(),
    )
}

/// [`holder_distance`] restricted to vertices at distance at least `radius`
/// from every point of `centers`.
///
/// Vertex values at a discrete singularity carry no information (the
/// continuum map has no value there), so comparisons of singular fields
/// drop a mesh-scale neighbourhood of each singular point.
pub fn holder_distance_outside(
    u: &SphereField,
    v: &SphereField,
    beta: f64,
    centers: &[Vec3],
    radius: f64,
) -> Result<f64> {
    if !u.same_mesh(v) {
        return Err(Error::MeshMismatch);
    }
    let mesh = u.mesh();
    let keep: Vec<bool> = mesh
        .vertices()
        .iter()
        .map(|x| centers.iter().all(|c| (x - c).norm() >= radius))
        .collect();
    let mut index = vec![usize::MAX; mesh.vertex_count()];
    let mut points = Vec::new();
    let (mut uu, mut vv) = (Vec::new(), Vec::new());
    for i in (0..mesh.vertex_count()).filter(|&i| keep[i]) {
        index[i] = points.len();
        points.push(mesh.vertices()[i]);
        uu.push(u.values()[i]);
        vv.push(v.values()[i]);
    }
    let mut edges = Vec::new();
    for a in (0..mesh.vertex_count()).filter(|&a| keep[a]) {
        for &b in mesh.neighbors(a) {
            if b > a && keep[b] {
                edges.push((index[a], index[b]));
            }
        }
    }
    holder_distance_points(&points, &uu, &vv, &edges, 2.0 * mesh.h(), beta, Exec::default())
}

/// Hölder distance on raw point data; see [`holder_distance`].
///
/// Random pairs are drawn over a canonical (coordinate-sorted) vertex order,
/// so the result does not depend on how vertices are labelled.
pub fn holder_distance_points(
    points: &[Vec3],
    u: &[Vec3],
    v: &[Vec3],
    local_pairs: &[(usize, usize)],
    min_separation: f64,
    beta: f64,
    exec: Exec,
) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::param(format!("Hölder exponent {beta} outside ]0, 1]")));
    }
    if u.len() != points.len() || v.len() != points.len() {
        return Err(Error::MeshMismatch);
    }
    let n = points.len();
    let e: Vec<Vec3> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    let sup = e.iter().map(|d| d.norm()).fold(0.0, f64::max);
    let quotient = |i: usize, j: usize| -> f64 {
        let d = (points[i] - points[j]).norm();
        if d < min_separation {
            0.0
        } else {
            (e[i] - e[j]).norm() / d.powf(beta)
        }
    };
    let local = exec.max(local_pairs.len(), |k| quotient(local_pairs[k].0, local_pairs[k].1));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (p, q) = (points[a], points[b]);
        p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)).then(p.z.total_cmp(&q.z))
    });
    let mut rng = ChaCha8Rng::seed_from_u64(HOLDER_SEED);
    let pairs: Vec<(usize, usize)> = if n < 2 {
        Vec::new()
    } else {
        (0..HOLDER_RANDOM_PAIRS)
            .map(|_| (order[rng.gen_range(0..n)], order[rng.gen_range(0..n)]))
            .collect()
    };
    let long = exec.max(pairs.len(), |k| quotient(pairs[k].0, pairs[k].1));
    Ok(sup + local.max(long))
}
