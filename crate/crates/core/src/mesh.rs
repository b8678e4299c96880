//! Layered-icosphere meshes of the closed unit ball.
//!
//! A [`SphereMesh`] is a subdivided icosahedron projected onto S². A
//! [`ShellMesh`] stacks `L` scaled copies of it at radii `k/L`, splits every
//! prism between consecutive shells into three tetrahedra and cones the
//! innermost shell to the origin.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::exec::Exec;
use crate::{Error, Result, Vec3};

pub const MAX_SUBDIVISION: usize = 7;

/// Oriented triangulation of the unit sphere.
#[derive(Clone, Debug)]
pub struct SphereMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    level: usize,
}

/// Builds the icosphere of subdivision level `level` (0..=7).
pub fn build_sphere_mesh(level: usize) -> Result<SphereMesh> {
    SphereMesh::new(level)
}

impl SphereMesh {
    pub fn new(level: usize) -> Result<Self> {
        if level > MAX_SUBDIVISION {
            return Err(Error::param(format!(
                "subdivision level {level} out of range 0..={MAX_SUBDIVISION}"
            )));
        }
        let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
        let mut vertices: Vec<Vec3> = [
            [-1.0, phi, 0.0],
            [1.0, phi, 0.0],
            [-1.0, -phi, 0.0],
            [1.0, -phi, 0.0],
            [0.0, -1.0, phi],
            [0.0, 1.0, phi],
            [0.0, -1.0, -phi],
            [0.0, 1.0, -phi],
            [phi, 0.0, -1.0],
            [phi, 0.0, 1.0],
            [-phi, 0.0, -1.0],
            [-phi, 0.0, 1.0],
        ]
        .iter()
        .map(|p| Vec3::new(p[0], p[1], p[2]).normalize())
        .collect();
        let mut triangles: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for t in triangles.iter_mut() {
            let (a, b, c) = (vertices[t[0]], vertices[t[1]], vertices[t[2]]);
            if (b - a).cross(&(c - a)).dot(&(a + b + c)) < 0.0 {
                t.swap(1, 2);
            }
        }
        for _ in 0..level {
            let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
            let mut next = Vec::with_capacity(triangles.len() * 4);
            let mut midpoint = |i: usize, j: usize, verts: &mut Vec<Vec3>| -> usize {
                let key = if i < j { (i, j) } else { (j, i) };
                *midpoints.entry(key).or_insert_with(|| {
                    verts.push(((verts[i] + verts[j]) * 0.5).normalize());
                    verts.len() - 1
                })
            };
            for &[a, b, c] in &triangles {
                let ab = midpoint(a, b, &mut vertices);
                let bc = midpoint(b, c, &mut vertices);
                let ca = midpoint(c, a, &mut vertices);
                next.push([a, ab, ca]);
                next.push([b, bc, ab]);
                next.push([c, ca, bc]);
                next.push([ab, bc, ca]);
            }
            triangles = next;
        }
        Ok(SphereMesh {
            vertices,
            triangles,
            level,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Number of distinct edges.
    pub fn edge_count(&self) -> usize {
        self.triangles.len() * 3 / 2
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (a, b, c) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    /// Sum of flat triangle areas.
    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Lumped vertex areas: one third of every incident triangle.
    pub fn vertex_areas(&self) -> Vec<f64> {
        let mut areas = vec![0.0; self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            let a = self.triangle_area(t) / 3.0;
            for &v in tri {
                areas[v] += a;
            }
        }
        areas
    }

    /// Longest chord between adjacent vertices.
    pub fn max_edge_length(&self) -> f64 {
        let mut h: f64 = 0.0;
        for &[a, b, c] in &self.triangles {
            let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
            h = h.max((pa - pb).norm()).max((pb - pc).norm()).max((pc - pa).norm());
        }
        h
    }

    /// Tangential gradients of the three barycentric functions of triangle `t`.
    pub fn triangle_gradients(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        let p = [self.vertices[a], self.vertices[b], self.vertices[c]];
        let n = (p[1] - p[0]).cross(&(p[2] - p[0]));
        let twice_area_sq = n.norm_squared();
        let mut g = [Vec3::zeros(); 3];
        for i in 0..3 {
            let opposite = p[(i + 2) % 3] - p[(i + 1) % 3];
            g[i] = n.cross(&opposite) / twice_area_sq;
        }
        g
    }

    /// Scaled copy of the sphere vertices, e.g. for probe spheres.
    pub fn scaled_points(&self, center: &Vec3, radius: f64) -> Vec<Vec3> {
        self.vertices.iter().map(|v| center + v * radius).collect()
    }
}

/// Tetrahedral mesh of the closed unit ball made of concentric icosphere
/// shells.
///
/// Vertex 0 is the origin; vertex `1 + (k-1)·n + j` is `(k/L)·ω_j` where
/// `ω_j` is sphere vertex `j` and `n` the sphere vertex count.
#[derive(Clone, Debug)]
pub struct ShellMesh {
    sphere: Arc<SphereMesh>,
    layers: usize,
    vertices: Vec<Vec3>,
    tets: Vec<[usize; 4]>,
    volumes: Vec<f64>,
    gradients: Vec<[Vec3; 4]>,
    centroids: Vec<Vec3>,
    h: f64,
    neighbors: Vec<Vec<usize>>,
    direction_grid: DirectionGrid,
    centroid_grid: CentroidGrid,
}

pub fn build_shell_mesh(level: usize, layers: usize) -> Result<ShellMesh> {
    ShellMesh::new(level, layers)
}

impl ShellMesh {
    pub fn new(level: usize, layers: usize) -> Result<Self> {
        if level < 1 {
            return Err(Error::param("shell meshes need subdivision level >= 1"));
        }
        if layers < 2 {
            return Err(Error::param(format!("layer count {layers} < 2")));
        }
        let sphere = Arc::new(SphereMesh::new(level)?);
        let n = sphere.vertex_count();
        let mut vertices = Vec::with_capacity(layers * n + 1);
        vertices.push(Vec3::zeros());
        for k in 1..=layers {
            let r = k as f64 / layers as f64;
            vertices.extend(sphere.vertices().iter().map(|w| w * r));
        }
        let id = |k: usize, j: usize| 1 + (k - 1) * n + j;

        let mut tets = Vec::with_capacity(sphere.triangles().len() * (3 * (layers - 1) + 1));
        for &[a, b, c] in sphere.triangles() {
            tets.push([0, id(1, a), id(1, b), id(1, c)]);
        }
        for k in 1..layers {
            for tri in sphere.triangles() {
                let mut s = *tri;
                s.sort_unstable();
                let [i, j, l] = s;
                // Quad face (p, q) with p < q gets the diagonal p_bottom–q_top,
                // which both neighbouring prisms agree on.
                tets.push([id(k, i), id(k, j), id(k, l), id(k + 1, l)]);
                tets.push([id(k, i), id(k, j), id(k + 1, j), id(k + 1, l)]);
                tets.push([id(k, i), id(k + 1, i), id(k + 1, j), id(k + 1, l)]);
            }
        }

        let mut volumes = Vec::with_capacity(tets.len());
        let mut gradients = Vec::with_capacity(tets.len());
        let mut centroids = Vec::with_capacity(tets.len());
        for (e, t) in tets.iter_mut().enumerate() {
            let mut vol = signed_volume(&vertices, t);
            if vol < 0.0 {
                t.swap(2, 3);
                vol = -vol;
            }
            let scale = (vertices[t[1]] - vertices[t[0]]).norm();
            if !(vol > 1e-12 * scale.powi(3)) {
                return Err(Error::Construction(format!(
                    "tetrahedron {e} {t:?} has nonpositive volume {vol:e}"
                )));
            }
            let p = [vertices[t[0]], vertices[t[1]], vertices[t[2]], vertices[t[3]]];
            volumes.push(vol);
            gradients.push(barycentric_gradients(&p));
            centroids.push((p[0] + p[1] + p[2] + p[3]) / 4.0);
        }

        let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); vertices.len()];
        let mut h: f64 = 0.0;
        for t in &tets {
            for a in 0..4 {
                for b in (a + 1)..4 {
                    neighbors[t[a]].push(t[b]);
                    neighbors[t[b]].push(t[a]);
                    h = h.max((vertices[t[a]] - vertices[t[b]]).norm());
                }
            }
        }
        for list in neighbors.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }

        let direction_grid = DirectionGrid::new(&sphere);
        let centroid_grid = CentroidGrid::new(&centroids, h);
        Ok(ShellMesh {
            sphere,
            layers,
            vertices,
            tets,
            volumes,
            gradients,
            centroids,
            h,
            neighbors,
            direction_grid,
            centroid_grid,
        })
    }

    pub fn sphere(&self) -> &SphereMesh {
        &self.sphere
    }

    /// Shared handle to the boundary triangulation.
    pub fn sphere_arc(&self) -> Arc<SphereMesh> {
        Arc::clone(&self.sphere)
    }

    /// Whether two meshes were built from the same parameters.
    pub fn same_as(&self, other: &ShellMesh) -> bool {
        std::ptr::eq(self, other)
            || (self.level() == other.level() && self.layers == other.layers)
    }

    pub fn level(&self) -> usize {
        self.sphere.level
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    pub fn tet_count(&self) -> usize {
        self.tets.len()
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn centroids(&self) -> &[Vec3] {
        &self.centroids
    }

    /// Barycentric gradients of tet `t`, in the order of `tets()[t]`.
    pub fn gradients(&self, t: usize) -> &[Vec3; 4] {
        &self.gradients[t]
    }

    /// Maximum edge length.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn total_volume(&self) -> f64 {
        self.volumes.iter().sum()
    }

    /// Sorted vertex adjacency (vertices sharing a tetrahedron).
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn shell_radius(&self, k: usize) -> f64 {
        k as f64 / self.layers as f64
    }

    /// Index of the vertex `(k/L)·ω_j`, `k >= 1`.
    pub fn vertex_id(&self, shell: usize, sphere_vertex: usize) -> usize {
        1 + (shell - 1) * self.sphere.vertex_count() + sphere_vertex
    }

    /// Shell index (0 for the origin) and sphere vertex of a vertex.
    pub fn vertex_position(&self, v: usize) -> (usize, usize) {
        if v == 0 {
            return (0, 0);
        }
        let n = self.sphere.vertex_count();
        ((v - 1) / n + 1, (v - 1) % n)
    }

    /// Ids of the outermost shell, in sphere-vertex order.
    pub fn boundary_vertex_ids(&self) -> std::ops::Range<usize> {
        let n = self.sphere.vertex_count();
        let start = 1 + (self.layers - 1) * n;
        start..start + n
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary_vertex_ids().contains(&v)
    }

    /// Tets whose centroid lies in the closed ball `B(center, radius)`.
    pub fn tets_in_ball(&self, center: &Vec3, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.centroid_grid.for_each_in_ball(center, radius, &self.centroids, |t| out.push(t));
        out.sort_unstable();
        out
    }

    /// Sum of `f(t)` over tets with centroid in `B(center, radius)`, in
    /// ascending tet order.
    pub fn sum_in_ball<F: Fn(usize) -> f64>(&self, center: &Vec3, radius: f64, f: F) -> f64 {
        self.tets_in_ball(center, radius).into_iter().map(f).fold(0.0, |a, x| a + x)
    }

    /// Locates `x` in the mesh, returning the tet and barycentric weights.
    ///
    /// Points slightly outside the polyhedral boundary (between a flat
    /// boundary facet and the sphere) are pulled onto the outermost layer
    /// with clamped weights. Points with `|x| > 1 + tol` are rejected.
    pub fn locate(&self, x: &Vec3) -> Result<(usize, [f64; 4])> {
        let r = x.norm();
        if r > 1.0 + 1e-9 {
            return Err(Error::Interpolation(format!("point {x:?} lies outside the ball")));
        }
        if r < 1e-300 {
            return Ok((0, [1.0, 0.0, 0.0, 0.0]));
        }
        let dir = x / r;
        let tri = self
            .direction_grid
            .find(&self.sphere, &dir)
            .ok_or_else(|| Error::Interpolation(format!("no sphere triangle contains {dir:?}")))?;
        let [a, b, c] = self.sphere.triangles[tri];
        // Shell coordinate: x = α ω_a + β ω_b + γ ω_c with α + β + γ the
        // normalized radius of the flat shell through x.
        let m = nalgebra::Matrix3::from_columns(&[
            self.sphere.vertices[a],
            self.sphere.vertices[b],
            self.sphere.vertices[c],
        ]);
        let coeffs = m
            .lu()
            .solve(x)
            .ok_or_else(|| Error::Interpolation("singular sphere triangle".into()))?;
        let tau = coeffs.sum();
        let layers = self.layers;
        let n_tri = self.sphere.triangles.len();
        let candidates: Vec<usize> = if tau * layers as f64 <= 1.0 {
            vec![tri]
        } else {
            let k = ((tau * layers as f64).floor() as usize).clamp(1, layers - 1);
            let base = n_tri + (k - 1) * 3 * n_tri + 3 * tri;
            vec![base, base + 1, base + 2]
        };
        let mut best = (candidates[0], [0.0; 4], f64::NEG_INFINITY);
        for &t in &candidates {
            let w = self.barycentric(t, x);
            let min = w.iter().cloned().fold(f64::INFINITY, f64::min);
            if min > best.2 {
                best = (t, w, min);
            }
        }
        let (t, mut w, min) = best;
        if min < -1e-6 {
            if tau <= 1.0 - 1e-9 {
                return Err(Error::Interpolation(format!(
                    "point {x:?} not found in its prism (min weight {min:e})"
                )));
            }
            for wi in w.iter_mut() {
                *wi = wi.max(0.0);
            }
            let s: f64 = w.iter().sum();
            for wi in w.iter_mut() {
                *wi /= s;
            }
        }
        Ok((t, w))
    }

    /// Barycentric coordinates of `x` with respect to tet `t`.
    pub fn barycentric(&self, t: usize, x: &Vec3) -> [f64; 4] {
        let g = &self.gradients[t];
        let v = &self.tets[t];
        let mut w = [0.0; 4];
        let mut rest = 1.0;
        for i in 1..4 {
            // λ_i is affine with gradient g_i and vanishes on the face
            // opposite vertex i, which contains vertex 0.
            w[i] = g[i].dot(&(x - self.vertices[v[0]]));
            rest -= w[i];
        }
        w[0] = rest;
        w
    }

    /// P1 interpolation of vertex data at `x` (not normalized).
    pub fn interpolate(&self, values: &[Vec3], x: &Vec3) -> Result<Vec3> {
        let (t, w) = self.locate(x)?;
        let v = &self.tets[t];
        Ok(values[v[0]] * w[0] + values[v[1]] * w[1] + values[v[2]] * w[2] + values[v[3]] * w[3])
    }

    /// Per-tet contributions reduced in tet order.
    pub fn tet_sum<F>(&self, exec: Exec, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        exec.sum(self.tets.len(), f)
    }
}

fn signed_volume(vertices: &[Vec3], t: &[usize; 4]) -> f64 {
    let (a, b, c, d) = (vertices[t[0]], vertices[t[1]], vertices[t[2]], vertices[t[3]]);
    (b - a).cross(&(c - a)).dot(&(d - a)) / 6.0
}

fn barycentric_gradients(p: &[Vec3; 4]) -> [Vec3; 4] {
    let e1 = p[1] - p[0];
    let e2 = p[2] - p[0];
    let e3 = p[3] - p[0];
    let det = e1.cross(&e2).dot(&e3);
    let g1 = e2.cross(&e3) / det;
    let g2 = e3.cross(&e1) / det;
    let g3 = e1.cross(&e2) / det;
    [-(g1 + g2 + g3), g1, g2, g3]
}

/// Gradient of the affine interpolant of scalar values on a tetrahedron.
///
/// Fails on degenerate tetrahedra.
pub fn p1_gradient(corners: &[Vec3; 4], values: [f64; 4]) -> Result<Vec3> {
    let e1 = corners[1] - corners[0];
    let e2 = corners[2] - corners[0];
    let e3 = corners[3] - corners[0];
    let det = e1.cross(&e2).dot(&e3);
    let scale = e1.norm().max(e2.norm()).max(e3.norm());
    if det.abs() <= 1e-14 * scale.powi(3) {
        return Err(Error::Construction("degenerate tetrahedron".into()));
    }
    let g = barycentric_gradients(corners);
    Ok(g[0] * values[0] + g[1] * values[1] + g[2] * values[2] + g[3] * values[3])
}

/// Bucket grid over sphere-triangle directions for cone lookups.
#[derive(Clone, Debug)]
struct DirectionGrid {
    n: usize,
    cells: Vec<Vec<usize>>,
}

impl DirectionGrid {
    fn new(sphere: &SphereMesh) -> Self {
        let h = sphere.max_edge_length();
        let n = ((2.0 / h).ceil() as usize).clamp(2, 96);
        let mut cells = vec![Vec::new(); n * n * n];
        for (t, tri) in sphere.triangles.iter().enumerate() {
            let (mut lo, mut hi) = (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY));
            for &v in tri {
                lo = lo.inf(&sphere.vertices[v]);
                hi = hi.sup(&sphere.vertices[v]);
            }
            let (i0, i1) = (Self::cell(n, &lo), Self::cell(n, &hi));
            for i in i0[0]..=i1[0] {
                for j in i0[1]..=i1[1] {
                    for k in i0[2]..=i1[2] {
                        cells[(i * n + j) * n + k].push(t);
                    }
                }
            }
        }
        DirectionGrid { n, cells }
    }

    fn cell(n: usize, p: &Vec3) -> [usize; 3] {
        let f = |x: f64| (((x + 1.0) * 0.5 * n as f64).floor().max(0.0) as usize).min(n - 1);
        [f(p.x), f(p.y), f(p.z)]
    }

    /// Triangle whose cone contains `dir` (unit vector).
    fn find(&self, sphere: &SphereMesh, dir: &Vec3) -> Option<usize> {
        // The point where the ray meets a flat triangle lies inside the
        // triangle's bounding box, which is slightly inside the sphere.
        let c = Self::cell(self.n, dir);
        let mut best: Option<(usize, f64)> = None;
        let lo = |x: usize| x.saturating_sub(1);
        let hi = |x: usize| (x + 1).min(self.n - 1);
        for i in lo(c[0])..=hi(c[0]) {
            for j in lo(c[1])..=hi(c[1]) {
                for k in lo(c[2])..=hi(c[2]) {
                    for &t in &self.cells[(i * self.n + j) * self.n + k] {
                        let [a, b, cc] = sphere.triangles[t];
                        let (pa, pb, pc) =
                            (sphere.vertices[a], sphere.vertices[b], sphere.vertices[cc]);
                        let m = [
                            pb.cross(&pc).dot(dir),
                            pc.cross(&pa).dot(dir),
                            pa.cross(&pb).dot(dir),
                        ];
                        let min = m[0].min(m[1]).min(m[2]);
                        if best.is_none_or(|(_, bm)| min > bm) {
                            best = Some((t, min));
                        }
                        if min >= 0.0 {
                            return Some(t);
                        }
                    }
                }
            }
        }
        best.filter(|&(_, m)| m > -1e-9).map(|(t, _)| t)
    }
}

#[derive(Clone, Debug)]
struct CentroidGrid {
    n: usize,
    cell: f64,
    cells: Vec<Vec<usize>>,
}

impl CentroidGrid {
    fn new(centroids: &[Vec3], h: f64) -> Self {
        let n = ((2.0 / (0.5 * h)).ceil() as usize).clamp(4, 128);
        let cell = 2.0 / n as f64;
        let mut cells = vec![Vec::new(); n * n * n];
        for (t, c) in centroids.iter().enumerate() {
            let [i, j, k] = Self::index(n, cell, c);
            cells[(i * n + j) * n + k].push(t);
        }
        CentroidGrid { n, cell, cells }
    }

    fn index(n: usize, cell: f64, p: &Vec3) -> [usize; 3] {
        let f = |x: f64| (((x + 1.0) / cell).floor().max(0.0) as usize).min(n - 1);
        [f(p.x), f(p.y), f(p.z)]
    }

    fn for_each_in_ball<F: FnMut(usize)>(
        &self,
        center: &Vec3,
        radius: f64,
        centroids: &[Vec3],
        mut f: F,
    ) {
        let lo = Self::index(self.n, self.cell, &(center - Vec3::repeat(radius)));
        let hi = Self::index(self.n, self.cell, &(center + Vec3::repeat(radius)));
        let r2 = radius * radius;
        for i in lo[0]..=hi[0] {
            for j in lo[1]..=hi[1] {
                for k in lo[2]..=hi[2] {
                    for &t in &self.cells[(i * self.n + j) * self.n + k] {
                        if (centroids[t] - center).norm_squared() <= r2 {
                            f(t);
                        }
                    }
                }
            }
        }
    }
}

/// Exact volume of the unit ball.
pub const BALL_VOLUME: f64 = 4.0 * PI / 3.0;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn icosahedron_counts() {
        let s = SphereMesh::new(0).unwrap();
        assert_eq!(s.vertex_count(), 12);
        assert_eq!(s.triangles().len(), 20);
    }

    #[test]
    fn level_two_counts_and_euler() {
        let s = SphereMesh::new(2).unwrap();
        assert_eq!(s.vertex_count(), 162);
        assert_eq!(s.triangles().len(), 320);
        let chi = s.vertex_count() as i64 - s.edge_count() as i64 + s.triangles().len() as i64;
        assert_eq!(chi, 2);
    }

    #[test]
    fn sphere_invariants() {
        for level in 0..=4 {
            let s = SphereMesh::new(level).unwrap();
            assert_eq!(s.vertex_count(), 10 * 4usize.pow(level as u32) + 2);
            assert_eq!(s.triangles().len(), 20 * 4usize.pow(level as u32));
            for v in s.vertices() {
                assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-12);
            }
            for &[a, b, c] in s.triangles() {
                let (pa, pb, pc) = (s.vertices()[a], s.vertices()[b], s.vertices()[c]);
                assert!((pb - pa).cross(&(pc - pa)).dot(&(pa + pb + pc)) > 0.0);
            }
        }
    }

    #[test]
    fn level_out_of_range() {
        assert!(matches!(SphereMesh::new(8), Err(Error::Parameter(_))));
    }

    #[test]
    fn level_three_area_close_to_sphere() {
        let s = SphereMesh::new(3).unwrap();
        let area = s.total_area();
        assert!((area - 4.0 * PI).abs() / (4.0 * PI) < 0.01, "area {area}");
    }

    #[test]
    fn shell_counts() {
        let m = ShellMesh::new(1, 2).unwrap();
        assert_eq!(m.vertex_count(), 85);
        let m = ShellMesh::new(2, 3).unwrap();
        assert_eq!(m.vertex_count(), 3 * 162 + 1);
        assert_eq!(m.tet_count(), 320 * (3 * 2 + 1));
    }

    #[test]
    fn shell_rejects_bad_parameters() {
        assert!(ShellMesh::new(0, 4).is_err());
        assert!(ShellMesh::new(2, 1).is_err());
    }

    #[test]
    fn boundary_ids_are_on_unit_sphere() {
        let m = ShellMesh::new(2, 4).unwrap();
        let ids = m.boundary_vertex_ids();
        for v in ids.clone() {
            assert_abs_diff_eq!(m.vertices()[v].norm(), 1.0, epsilon = 1e-12);
        }
        for v in 0..m.vertex_count() {
            let on_sphere = (m.vertices()[v].norm() - 1.0).abs() < 1e-12;
            assert_eq!(on_sphere, ids.contains(&v));
        }
    }

    #[test]
    fn positive_volumes_and_ball_volume() {
        // The inscribed polyhedron loses about 3.4% of the volume at s = 2.
        for (s, l, tol) in [(2, 3, 0.035), (2, 6, 0.035), (3, 4, 0.01), (4, 4, 0.003)] {
            let m = ShellMesh::new(s, l).unwrap();
            assert!(m.volumes().iter().all(|&v| v > 0.0));
            let ratio = m.total_volume() / BALL_VOLUME;
            assert!((ratio - 1.0).abs() <= tol, "s={s} L={l} ratio {ratio}");
        }
    }

    #[test]
    fn refinement_halves_volume_error() {
        let e = |s, l| (ShellMesh::new(s, l).unwrap().total_volume() - BALL_VOLUME).abs();
        assert!(e(3, 8) <= 0.5 * e(2, 4));
    }

    #[test]
    fn deterministic_construction() {
        let a = ShellMesh::new(2, 3).unwrap();
        let b = ShellMesh::new(2, 3).unwrap();
        for (p, q) in a.vertices().iter().zip(b.vertices()) {
            for i in 0..3 {
                assert_eq!(p[i].to_bits(), q[i].to_bits());
            }
        }
        assert_eq!(a.tets(), b.tets());
    }

    #[test]
    fn adjacency_connected_and_interior_stars() {
        let m = ShellMesh::new(2, 3).unwrap();
        let mut count = vec![0usize; m.vertex_count()];
        for t in m.tets() {
            for &v in t {
                count[v] += 1;
            }
        }
        for v in 0..m.vertex_count() {
            if !m.is_boundary(v) {
                assert!(count[v] >= 4, "vertex {v} in {} tets", count[v]);
            }
        }
        let mut seen = vec![false; m.vertex_count()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in m.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn conforming_faces() {
        // Every interior triangular face is shared by exactly two tets.
        let m = ShellMesh::new(2, 3).unwrap();
        let mut faces: HashMap<[usize; 3], usize> = HashMap::new();
        for t in m.tets() {
            for skip in 0..4 {
                let mut f = [0; 3];
                let mut n = 0;
                for (i, &v) in t.iter().enumerate() {
                    if i != skip {
                        f[n] = v;
                        n += 1;
                    }
                }
                f.sort_unstable();
                *faces.entry(f).or_default() += 1;
            }
        }
        let boundary: usize = faces.values().filter(|&&c| c == 1).count();
        assert!(faces.values().all(|&c| c == 1 || c == 2));
        assert_eq!(boundary, m.sphere().triangles().len());
    }

    #[test]
    fn gradient_of_constant_and_affine() {
        let p = [
            Vec3::new(0.1, 0.0, 0.0),
            Vec3::new(1.0, 0.2, 0.0),
            Vec3::new(0.0, 1.0, 0.3),
            Vec3::new(0.2, 0.1, 1.0),
        ];
        let g = p1_gradient(&p, [2.5; 4]).unwrap();
        assert!(g.norm() < 1e-12);
        let g = p1_gradient(&p, [p[0].x, p[1].x, p[2].x, p[3].x]).unwrap();
        assert_abs_diff_eq!((g - Vec3::x()).norm(), 0.0, epsilon = 1e-12);
        let a = Vec3::new(-0.7, 1.3, 2.1);
        let vals = [0, 1, 2, 3].map(|i| a.dot(&p[i]) + 0.4);
        let g = p1_gradient(&p, vals).unwrap();
        assert_abs_diff_eq!((g - a).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_gradient_fails() {
        let p = [Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::x() + Vec3::y()];
        assert!(p1_gradient(&p, [0.0; 4]).is_err());
    }

    #[test]
    fn locate_reproduces_affine_functions() {
        let m = ShellMesh::new(2, 4).unwrap();
        let values: Vec<Vec3> = m.vertices().iter().map(|x| Vec3::new(x.x, 2.0 * x.y, -x.z + 1.0)).collect();
        let pts = [
            Vec3::new(0.01, -0.02, 0.005),
            Vec3::new(0.3, 0.2, -0.5),
            Vec3::new(-0.7, 0.1, 0.6),
            Vec3::new(0.0, 0.0, 0.93),
            m.vertices()[57] * 0.999,
        ];
        for x in pts {
            let y = m.interpolate(&values, &x).unwrap();
            assert_abs_diff_eq!((y - Vec3::new(x.x, 2.0 * x.y, -x.z + 1.0)).norm(), 0.0, epsilon = 1e-9);
        }
        assert!(m.locate(&Vec3::new(0.0, 1.1, 0.0)).is_err());
    }

    #[test]
    fn ball_query_matches_brute_force() {
        let m = ShellMesh::new(2, 4).unwrap();
        let c = Vec3::new(0.2, -0.1, 0.3);
        let fast = m.tets_in_ball(&c, 0.35);
        let slow: Vec<usize> =
            (0..m.tet_count()).filter(|&t| (m.centroids()[t] - c).norm() <= 0.35).collect();
        assert_eq!(fast, slow);
    }
}
