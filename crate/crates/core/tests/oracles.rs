//! Mesh quantities against independent quadratures.

use std::f64::consts::PI;
use std::sync::Arc;

use harmap_core::constructions::{bubble_scaling_curve, DEFAULT_BUBBLE_SCALES};
use harmap_core::field::{bump, BUBBLE_CORE};
use harmap_core::*;

/// One bubble cap written out in polar coordinates `(d, φ)` about the north
/// pole: the map `z + b(d/λ)·cℓ/z` in the stereographic coordinate.
fn cap_map(d: f64, phi: f64, lambda: f64) -> [f64; 3] {
    let ell = (lambda / 2.0).tan();
    let r = (d / 2.0).tan();
    let k = bump(d / lambda) * BUBBLE_CORE * ell / r;
    // With z = r e^{iφ}, the bubble term is k e^{-iφ}.
    let (re, im) = (r * phi.cos() + k * phi.cos(), r * phi.sin() - k * phi.sin());
    let m2 = re * re + im * im;
    [2.0 * re / (1.0 + m2), 2.0 * im / (1.0 + m2), (1.0 - m2) / (1.0 + m2)]
}

/// `∫_cap |∇_T(ψ − id)|^p` by midpoint quadrature with central differences.
fn cap_integral(lambda: f64, p: f64) -> f64 {
    let (nd, nphi) = (1500, 96);
    let h = 1e-6;
    let diff = |d: f64, phi: f64| {
        let v = cap_map(d, phi, lambda);
        let w = [d.sin() * phi.cos(), d.sin() * phi.sin(), d.cos()];
        [v[0] - w[0], v[1] - w[1], v[2] - w[2]]
    };
    let mut total = 0.0;
    for i in 0..nd {
        let d = (i as f64 + 0.5) * lambda / nd as f64;
        for j in 0..nphi {
            let phi = (j as f64 + 0.5) * 2.0 * PI / nphi as f64;
            let (a, b) = (diff(d + h, phi), diff(d - h, phi));
            let (c, e) = (diff(d, phi + h), diff(d, phi - h));
            let mut g2 = 0.0;
            for k in 0..3 {
                let dd = (a[k] - b[k]) / (2.0 * h);
                let dp = (c[k] - e[k]) / (2.0 * h) / d.sin();
                g2 += dd * dd + dp * dp;
            }
            total += g2.powf(p / 2.0) * d.sin() * (lambda / nd as f64) * (2.0 * PI / nphi as f64);
        }
    }
    total
}

#[test]
fn bubble_norms_match_quadrature() {
    let sphere = Arc::new(SphereMesh::new(6).unwrap());
    for p in [1.5, 2.0, 3.0] {
        let curve = bubble_scaling_curve(p, &[0.4, 0.2], sphere.clone()).unwrap();
        for row in &curve.rows {
            // Both caps contribute equally (the second is a mirror image).
            let exact = (2.0 * cap_integral(row.lambda, p)).powf(1.0 / p);
            let rel = (row.norm - exact).abs() / exact;
            assert!(rel < 0.06, "p={p} λ={}: mesh {} vs quadrature {exact}", row.lambda, row.norm);
        }
    }
}

#[test]
fn quadrature_slopes_are_the_scaling_exponents() {
    for p in [1.5, 2.0, 3.0] {
        let (a, b) = (cap_integral(0.1, p), cap_integral(0.05, p));
        let slope = (a / b).powf(1.0 / p).ln() / 2f64.ln();
        assert!((slope - (2.0 - p) / p).abs() < 0.01, "p={p}: {slope}");
    }
}

#[test]
fn mesh_slopes_decrease_in_p() {
    let sphere = Arc::new(SphereMesh::new(6).unwrap());
    let slopes: Vec<f64> = [1.5, 2.0, 3.0]
        .iter()
        .map(|&p| bubble_scaling_curve(p, &DEFAULT_BUBBLE_SCALES, sphere.clone()).unwrap().slope)
        .collect();
    assert!(slopes[0] > slopes[1] && slopes[1] > slopes[2], "{slopes:?}");
}

#[test]
fn hedgehog_energy_against_closed_form() {
    // ∫_B 2/|x|² = 8π; the error shrinks under refinement.
    let mut prev = 0.0;
    for (s, l) in [(2, 6), (3, 12), (4, 24)] {
        let m = Arc::new(ShellMesh::new(s, l).unwrap());
        let e = dirichlet_energy(&hedgehog(m));
        assert!((e - HEDGEHOG_ENERGY).abs() < (HEDGEHOG_ENERGY - prev).abs() || prev == 0.0);
        prev = e;
    }
    assert!((prev - HEDGEHOG_ENERGY).abs() < 0.02 * HEDGEHOG_ENERGY, "{prev}");
}
