use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{bump, SphereField};
use crate::{Error, Result, Vec3};

/// One singularity pair: `source` (of the perturbed field) is moved onto
/// `target` (of the reference field) inside `B(target, τ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegistrationEntry {
    pub source: Vec3,
    pub target: Vec3,
    /// Tangent-map rotation of the reference at `target`.
    pub theta_target: Matrix3<f64>,
    /// Tangent-map rotation of the perturbed field at `source`.
    pub theta_source: Matrix3<f64>,
    pub tau: f64,
}

impl RegistrationEntry {
    /// Cutoff equal to 1 on `B(target, τ/2)` and 0 outside `B(target, τ)`.
    pub fn cutoff(&self, x: &Vec3) -> f64 {
        let half = self.tau / 2.0;
        bump(((x - self.target).norm() - half) / half)
    }

    /// `ξ(x) = Θ_target⁻¹ Θ_source (x − source) + target`.
    pub fn xi(&self, x: &Vec3) -> Vec3 {
        self.theta_target.transpose() * self.theta_source * (x - self.source) + self.target
    }
}

/// Piecewise registration `η`: the identity outside the balls, and
/// `λξ + (1−λ)id` inside each `B(target, τ)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RegistrationMap {
    entries: Vec<RegistrationEntry>,
}

impl RegistrationMap {
    pub fn identity() -> Self {
        RegistrationMap::default()
    }

    /// Validates disjointness, containment and `|source − target| < τ/2`.
    pub fn new(entries: Vec<RegistrationEntry>) -> Result<Self> {
        for (i, e) in entries.iter().enumerate() {
            if !(e.tau > 0.0) {
                return Err(Error::param(format!("entry {i}: τ = {} must be positive", e.tau)));
            }
            if e.target.norm() + e.tau > 1.0 + 1e-12 {
                return Err(Error::param(format!("entry {i}: ball leaves the unit ball")));
            }
            let d = (e.source - e.target).norm();
            if !(d < e.tau / 2.0) {
                return Err(Error::param(format!(
                    "entry {i}: |source − target| = {d} is not below τ/2 = {}",
                    e.tau / 2.0
                )));
            }
            for th in [&e.theta_target, &e.theta_source] {
                if (th.transpose() * th - Matrix3::identity()).abs().max() > 1e-10 {
                    return Err(Error::param(format!("entry {i}: rotation is not orthogonal")));
                }
            }
            for (j, f) in entries.iter().enumerate().take(i) {
                if (e.target - f.target).norm() < e.tau + f.tau {
                    return Err(Error::param(format!("balls of entries {j} and {i} overlap")));
                }
            }
        }
        Ok(RegistrationMap { entries })
    }

    /// Pairs `sources[j]` with `targets[j]` using the common radius
    /// `τ = max_j |source_j − target_j|^{1/2}`, clipped to half the smallest
    /// target separation and to the distance from the targets to the
    /// boundary. Pairs with equal points and rotations are dropped, and all
    /// pairs are dropped when every point already matches (`τ = 0`).
    pub fn from_singularities(
        sources: &[(Vec3, Matrix3<f64>)],
        targets: &[(Vec3, Matrix3<f64>)],
    ) -> Result<Self> {
        if sources.len() != targets.len() {
            return Err(Error::param(format!(
                "{} sources for {} targets",
                sources.len(),
                targets.len()
            )));
        }
        let mut tau = sources
            .iter()
            .zip(targets)
            .map(|(s, t)| (s.0 - t.0).norm().sqrt())
            .fold(0.0, f64::max);
        for (i, t) in targets.iter().enumerate() {
            tau = tau.min(1.0 - t.0.norm());
            for u in targets.iter().skip(i + 1) {
                tau = tau.min((t.0 - u.0).norm() / 2.0);
            }
        }
        let entries = sources
            .iter()
            .zip(targets)
            .filter(|(s, t)| s.0 != t.0 || s.1 != t.1)
            .map(|(s, t)| RegistrationEntry {
                source: s.0,
                target: t.0,
                theta_target: t.1,
                theta_source: s.1,
                tau,
            })
            .collect::<Vec<_>>();
        if !(tau > 0.0) {
            return Ok(RegistrationMap::identity());
        }
        RegistrationMap::new(entries)
    }

    pub fn entries(&self) -> &[RegistrationEntry] {
        &self.entries
    }

    pub fn is_identity(&self) -> bool {
        self.entries.is_empty()
    }

    /// `η(x)`.
    pub fn eta(&self, x: &Vec3) -> Vec3 {
        for e in &self.entries {
            if (x - e.target).norm() < e.tau {
                let l = e.cutoff(x);
                return e.xi(x) * l + x * (1.0 - l);
            }
        }
        *x
    }

    fn touches(&self, x: &Vec3) -> bool {
        self.entries.iter().any(|e| (x - e.target).norm() < e.tau)
    }
}

/// `v∘η` with Lipschitz estimates of `η − id` and `η⁻¹ − id`.
#[derive(Clone, Debug)]
pub struct Registration {
    pub field: SphereField,
    pub lip_eta: f64,
    pub lip_eta_inv: f64,
    /// Vertices whose image left the ball and was clamped to the sphere.
    pub clamped: usize,
}

/// Seed and count of the random difference quotients per entry.
const LIP_SEED: u64 = 0x1E7A;
const LIP_SAMPLES: usize = 20_000;

/// Samples `v` at `η(x)` for every vertex (P1 interpolation, normalized).
/// Vertices outside all registration balls keep their values exactly.
pub fn apply_registration(v: &SphereField, eta: &RegistrationMap) -> Result<Registration> {
    let mesh = v.mesh();
    let mut clamped = 0;
    let mut values = Vec::with_capacity(mesh.vertex_count());
    for (i, x) in mesh.vertices().iter().enumerate() {
        if !eta.touches(x) {
            values.push(v.values()[i]);
            continue;
        }
        let mut y = eta.eta(x);
        if y.norm() > 1.0 {
            log::debug!("η maps vertex {i} outside the ball; clamped");
            y /= y.norm();
            clamped += 1;
        }
        let w = mesh.interpolate(v.values(), &y)?;
        let n = w.norm();
        if n < 1e-12 {
            return Err(Error::Interpolation(format!("v∘η vanishes at vertex {i}")));
        }
        values.push(w / n);
    }
    if clamped > 0 {
        log::warn!("{clamped} registered points left the ball and were clamped");
    }
    let (lip_eta, lip_eta_inv) = lipschitz_estimates(v, eta);
    Ok(Registration {
        field: SphereField::new(v.mesh_arc(), values)?,
        lip_eta,
        lip_eta_inv,
        clamped,
    })
}

/// Largest difference quotients of `η − id` and of `η⁻¹ − id` over mesh
/// edges touching a ball plus short random pairs inside each ball.
///
/// For `η⁻¹` the quotient at `(η(x), η(y))` is
/// `|(η−id)(x) − (η−id)(y)| / |η(x) − η(y)|`, so no inversion is needed.
pub fn lipschitz_estimates(v: &SphereField, eta: &RegistrationMap) -> (f64, f64) {
    if eta.is_identity() {
        return (0.0, 0.0);
    }
    let mut fwd: f64 = 0.0;
    let mut inv: f64 = 0.0;
    let mut visit = |x: &Vec3, y: &Vec3| {
        let (ex, ey) = (eta.eta(x), eta.eta(y));
        let num = ((ex - x) - (ey - y)).norm();
        let d = (x - y).norm();
        let de = (ex - ey).norm();
        if d > 0.0 {
            fwd = fwd.max(num / d);
        }
        if de > 0.0 {
            inv = inv.max(num / de);
        }
    };
    let mesh = v.mesh();
    for a in 0..mesh.vertex_count() {
        let xa = mesh.vertices()[a];
        for &b in mesh.neighbors(a) {
            if b > a {
                let xb = mesh.vertices()[b];
                if eta.touches(&xa) || eta.touches(&xb) {
                    visit(&xa, &xb);
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(LIP_SEED);
    for e in eta.entries() {
        let step = 1e-4 * e.tau;
        for _ in 0..LIP_SAMPLES {
            let x = loop {
                let p = Vec3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                );
                if p.norm_squared() <= 1.0 {
                    break e.target + p * e.tau;
                }
            };
            let dir = loop {
                let p = Vec3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                );
                let n = p.norm();
                if n > 1e-3 && n <= 1.0 {
                    break p / n;
                }
            };
            visit(&x, &(x + dir * step));
        }
    }
    (fwd, inv)
}
