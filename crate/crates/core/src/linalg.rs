//! P1 stiffness assembly and a Jacobi-preconditioned conjugate gradient.

use crate::mesh::ShellMesh;

/// Symmetric sparse matrix in compressed-row form with sorted columns.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
    diag_pos: Vec<usize>,
}

impl CsrMatrix {
    pub fn n(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.cols[a..b], &self.vals[a..b])
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.vals[self.diag_pos[i]]
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n() {
            let (c, v) = self.row(i);
            y[i] = c.iter().zip(v).map(|(&j, &a)| a * x[j]).sum();
        }
    }
}

/// Scalar P1 Laplace stiffness `K_ab = Σ_T vol_T ∇λ_a·∇λ_b`.
///
/// The Dirichlet energy of a vector field `u` is `Σ_ab K_ab u_a·u_b`.
pub fn stiffness(mesh: &ShellMesh) -> CsrMatrix {
    let n = mesh.vertex_count();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    row_ptr.push(0);
    let mut diag_pos = Vec::with_capacity(n);
    for v in 0..n {
        let nb = mesh.neighbors(v);
        let mut inserted = false;
        for &w in nb {
            if !inserted && w > v {
                diag_pos.push(cols.len());
                cols.push(v);
                inserted = true;
            }
            cols.push(w);
        }
        if !inserted {
            diag_pos.push(cols.len());
            cols.push(v);
        }
        row_ptr.push(cols.len());
    }
    let mut vals = vec![0.0; cols.len()];
    let find = |row: usize, col: usize, cols: &[usize]| -> usize {
        let (a, b) = (row_ptr[row], row_ptr[row + 1]);
        a + cols[a..b].binary_search(&col).expect("adjacency covers all tet edges")
    };
    for (t, tet) in mesh.tets().iter().enumerate() {
        let g = mesh.gradients(t);
        let vol = mesh.volumes()[t];
        for a in 0..4 {
            for b in 0..4 {
                let k = find(tet[a], tet[b], &cols);
                vals[k] += vol * g[a].dot(&g[b]);
            }
        }
    }
    CsrMatrix {
        row_ptr,
        cols,
        vals,
        diag_pos,
    }
}

/// Solves `K x = 0` on free rows with `x` fixed on rows where `fixed[i]`.
///
/// `x` holds the Dirichlet values on entry (and an initial guess elsewhere).
/// Returns the iteration count and final relative residual.
pub fn solve_dirichlet(
    k: &CsrMatrix,
    fixed: &[bool],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> (usize, f64) {
    let n = k.n();
    // r = -K x restricted to free rows
    let mut r = vec![0.0; n];
    k.mul_vec(x, &mut r);
    for i in 0..n {
        r[i] = if fixed[i] { 0.0 } else { -r[i] };
    }
    let inv_diag: Vec<f64> = (0..n)
        .map(|i| if fixed[i] { 0.0 } else { 1.0 / k.diag(i) })
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let norm0 = dot(&r, &r).sqrt().max(1e-300);
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut rel = dot(&r, &r).sqrt() / norm0;
    if norm0 <= 1e-300 || rel < tol {
        return (0, 0.0);
    }
    for it in 1..=max_iter {
        k.mul_vec(&p, &mut q);
        for i in 0..n {
            if fixed[i] {
                q[i] = 0.0;
            }
        }
        let alpha = rz / dot(&p, &q);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        rel = dot(&r, &r).sqrt() / norm0;
        if rel < tol {
            return (it, rel);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    (max_iter, rel)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stiffness_annihilates_constants_and_is_symmetric() {
        let m = ShellMesh::new(1, 3).unwrap();
        let k = stiffness(&m);
        let ones = vec![1.0; k.n()];
        let mut y = vec![0.0; k.n()];
        k.mul_vec(&ones, &mut y);
        assert!(y.iter().all(|v| v.abs() < 1e-12));
        for i in 0..k.n() {
            let (c, v) = k.row(i);
            for (&j, &a) in c.iter().zip(v) {
                let (cj, vj) = k.row(j);
                let pos = cj.binary_search(&i).unwrap();
                assert!((vj[pos] - a).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn harmonic_extension_of_affine_data_is_exact() {
        let m = ShellMesh::new(2, 4).unwrap();
        let k = stiffness(&m);
        let fixed: Vec<bool> = (0..m.vertex_count()).map(|v| m.is_boundary(v)).collect();
        let f = |p: &crate::Vec3| 0.3 * p.x - 1.2 * p.y + 0.5 * p.z + 2.0;
        let mut x: Vec<f64> = m
            .vertices()
            .iter()
            .enumerate()
            .map(|(v, p)| if fixed[v] { f(p) } else { 0.0 })
            .collect();
        let (_, rel) = solve_dirichlet(&k, &fixed, &mut x, 1e-12, 2000);
        assert!(rel < 1e-12);
        for (v, p) in m.vertices().iter().enumerate() {
            assert!((x[v] - f(p)).abs() < 1e-8);
        }
    }
}
