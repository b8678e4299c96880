use std::sync::{Arc, OnceLock};

use harmap_core::constructions::{comparison_map, interpolation_check_values};
use harmap_core::field::{holder_distance_points, rotation_about, w1p_distance_normalized};
use harmap_core::topology::antipodal;
use harmap_core::*;
use nalgebra::Matrix3;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sphere() -> Arc<SphereMesh> {
    static S: OnceLock<Arc<SphereMesh>> = OnceLock::new();
    S.get_or_init(|| Arc::new(SphereMesh::new(2).unwrap())).clone()
}

fn ball() -> Arc<ShellMesh> {
    static M: OnceLock<Arc<ShellMesh>> = OnceLock::new();
    M.get_or_init(|| Arc::new(ShellMesh::new(2, 4).unwrap())).clone()
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Identity plus a seeded perturbation of size `eps`, renormalized.
fn perturbed(seed: u64, eps: f64) -> BoundaryField {
    let s = sphere();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = s
        .vertices()
        .iter()
        .map(|w| (w + random_unit(&mut rng) * eps).normalize())
        .collect();
    BoundaryField::new(s, values).unwrap()
}

fn rotation(axis: (f64, f64, f64), angle: f64) -> Matrix3<f64> {
    rotation_about(&Vec3::new(axis.0, axis.1, axis.2 + 1e-3), angle)
}

fn axis() -> impl Strategy<Value = (f64, f64, f64)> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn w1p_is_a_metric(a in 0u64..1000, b in 0u64..1000, c in 0u64..1000, eps in 0.01..0.8f64) {
        let (f, g, h) = (perturbed(a, eps), perturbed(b, eps), perturbed(c, eps));
        for p in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
            let fg = w1p_distance(&f, &g, p).unwrap();
            prop_assert_eq!(w1p_distance(&f, &f, p).unwrap(), 0.0);
            prop_assert!((fg - w1p_distance(&g, &f, p).unwrap()).abs() <= 1e-12 * fg.max(1.0));
            let fh = w1p_distance(&f, &h, p).unwrap();
            let hg = w1p_distance(&h, &g, p).unwrap();
            prop_assert!(fg <= (fh + hg) * (1.0 + 1e-12), "p={p}: {fg} > {fh} + {hg}");
        }
    }

    #[test]
    fn normalized_w1p_is_monotone_in_p(seed in 0u64..1000, eps in 0.01..0.8f64) {
        let f = perturbed(seed, eps);
        let id = BoundaryField::identity(sphere());
        let ps = [1.0, 1.5, 2.0, 3.0, 4.0, 8.0, f64::INFINITY];
        let d: Vec<f64> = ps.iter().map(|&p| w1p_distance_normalized(&f, &id, p).unwrap()).collect();
        for k in 1..d.len() {
            prop_assert!(d[k - 1] <= d[k] * (1.0 + 1e-12), "{:?}", d);
        }
    }

    #[test]
    fn holder_is_invariant_under_relabeling(seed in 0u64..1000, beta in 0.1..1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 300;
        let pts: Vec<Vec3> = (0..n).map(|_| random_unit(&mut rng) * rng.gen_range(0.1..1.0)).collect();
        let u: Vec<Vec3> = (0..n).map(|_| random_unit(&mut rng)).collect();
        let v: Vec<Vec3> = (0..n).map(|_| random_unit(&mut rng)).collect();
        let pairs: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        let base = holder_distance_points(&pts, &u, &v, &pairs, 0.05, beta, Exec::Sequential).unwrap();
        // Reverse labels: i -> n-1-i.
        let r = |x: &[Vec3]| x.iter().rev().copied().collect::<Vec<_>>();
        let rpairs: Vec<(usize, usize)> = pairs.iter().map(|&(i, j)| (n - 1 - j, n - 1 - i)).collect();
        let relabeled = holder_distance_points(&r(&pts), &r(&u), &r(&v), &rpairs, 0.05, beta, Exec::Sequential).unwrap();
        prop_assert_eq!(base, relabeled);
        prop_assert_eq!(holder_distance_points(&pts, &u, &u, &pairs, 0.05, beta, Exec::Sequential).unwrap(), 0.0);
    }

    #[test]
    fn degree_is_rotation_invariant(ax in axis(), angle in -3.0..3.0f64) {
        let r = rotation(ax, angle);
        let s = sphere();
        let id = BoundaryField::identity(s.clone());
        let rot = id.mapped(|w| r * w).unwrap();
        prop_assert_eq!(degree(&rot).unwrap().value, 1);
        let anti = antipodal(s);
        let rot_anti = anti.mapped(|w| r * w).unwrap();
        prop_assert_eq!(degree(&rot_anti).unwrap().value, -1);
        let flipped = rot.mapped(|w| -w).unwrap();
        prop_assert_eq!(degree(&flipped).unwrap().value, -degree(&rot).unwrap().value);
    }

    #[test]
    fn energy_is_invariant_under_target_rotations(ax in axis(), angle in -3.0..3.0f64) {
        let u = hedgehog(ball());
        let e = dirichlet_energy(&u);
        let er = dirichlet_energy(&u.rotated(&rotation(ax, angle)).unwrap());
        prop_assert!((e - er).abs() <= 1e-10 * e);
    }

    #[test]
    fn fit_rotation_recovers_rotated_hedgehogs(ax in axis(), angle in -3.0..3.0f64) {
        let r = rotation(ax, angle);
        let u = hedgehog(ball()).rotated(&r).unwrap();
        let fit = fit_rotation(&u, &Vec3::zeros(), 1.0 / 3.0, 2.0 / 3.0).unwrap();
        prop_assert!((fit - r).norm() < 1e-9);
        prop_assert!((fit.transpose() * fit - Matrix3::identity()).norm() < 1e-12);
    }

    #[test]
    fn comparison_map_is_unit_with_identity_trace(ax in axis(), angle in -0.5..0.5f64) {
        let m = ball();
        let r = rotation(ax, angle);
        let psi = eval_boundary_spec(&BoundarySpec::rotation(&r), m.sphere_arc()).unwrap();
        let w = comparison_map(&hedgehog(m.clone()), &psi, 0.5).unwrap();
        prop_assert!(w.values().iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
        for v in m.boundary_vertex_ids() {
            prop_assert_eq!(w.values()[v], m.vertices()[v]);
        }
    }
}

#[test]
fn interpolation_inequality_over_seeded_differences() {
    let s = sphere();
    let mut violations = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let diff: Vec<Vec3> = (0..s.vertex_count())
            .map(|_| random_unit(&mut rng) * rng.gen_range(0.0..2.0))
            .collect();
        for q in [3.0, 4.0, 8.0] {
            if !interpolation_check_values(&s, &diff, q).unwrap().holds {
                violations += 1;
            }
        }
    }
    assert_eq!(violations, 0);
}

#[test]
fn identity_registration_is_identity_on_fields() {
    let u = hedgehog(ball());
    let r = apply_registration(&u, &RegistrationMap::identity()).unwrap();
    assert_eq!(r.field.values(), u.values());
}
