use nalgebra::Matrix3;

use crate::field::SphereField;
use crate::{Error, Result, Vec3};

/// Orthogonal `Θ` maximizing `Σ ⟨u(x), Θ(x − a)/|x − a|⟩` over vertices in
/// the annulus `r₁ ≤ |x| ≤ r₂` (orthogonal Procrustes, reflections allowed).
pub fn fit_rotation(u: &SphereField, a: &Vec3, r1: f64, r2: f64) -> Result<Matrix3<f64>> {
    if !(0.0 <= r1 && r1 < r2 && r2 <= 1.0) {
        return Err(Error::param(format!("annulus [{r1}, {r2}] is not inside the unit ball")));
    }
    if a.norm() >= r1 {
        return Err(Error::param(format!(
            "center |a| = {} must lie inside the inner radius {r1}",
            a.norm()
        )));
    }
    let mesh = u.mesh();
    let mut m = Matrix3::zeros();
    let mut count = 0;
    for (x, val) in mesh.vertices().iter().zip(u.values()) {
        let r = x.norm();
        if r < r1 || r > r2 {
            continue;
        }
        let d = (x - a).normalize();
        m += val * d.transpose();
        count += 1;
    }
    if count < 3 {
        return Err(Error::Resolution(format!(
            "annulus [{r1}, {r2}] contains only {count} vertices"
        )));
    }
    let svd = m.svd(true, true);
    let s = svd.singular_values;
    let (smax, smin) = (s.max(), s.min());
    if !(smin > 1e-9 * smax) {
        return Err(Error::Alignment(format!(
            "correlation matrix is rank deficient (singular values {:.3e}, {:.3e}, {:.3e})",
            s[0], s[1], s[2]
        )));
    }
    let theta = svd.u.unwrap() * svd.v_t.unwrap();
    Ok(orthonormalize(&theta))
}

/// One Newton step of the polar iteration, removing round-off drift.
fn orthonormalize(q: &Matrix3<f64>) -> Matrix3<f64> {
    let inv_t = q.try_inverse().map(|i| i.transpose()).unwrap_or(*q);
    (q + inv_t) * 0.5
}

/// Frobenius norm `‖Θ − I‖`.
pub fn rotation_deviation(theta: &Matrix3<f64>) -> f64 {
    (theta - Matrix3::identity()).norm()
}
