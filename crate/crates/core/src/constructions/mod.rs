//! Explicit competitor and comparison constructions: the radial comparison
//! map, projection extensions, rotation fitting, singularity registration,
//! bubble scaling and the per-point stability record.

mod bubbles;
mod comparison;
mod hkl;
mod registration;
mod rotation;
mod stability;

pub use bubbles::{
    bubble_scaling_curve, interpolation_check, interpolation_check_values, BubbleScaling,
    InterpolationCheck, ScalingRow, DEFAULT_BUBBLE_LEVEL, DEFAULT_BUBBLE_SCALES, DEFAULT_DIPOLE_SEPARATION,
};
pub use comparison::{comparison_bound, comparison_map, ComparisonBound};
pub use hkl::{hkl_extension, HklExtension, HKL_CONSTANT};
pub use registration::{apply_registration, Registration, RegistrationEntry, RegistrationMap};
pub use rotation::{fit_rotation, rotation_deviation};
pub use stability::{ANNULUS, bcl_gap, energy_proxy, stability_record, ReferenceSolution, StabilityRecord};

use crate::Vec3;

/// Least-squares slope and intercept of `y` against `x` with the standard
/// error of the slope (`NaN` for fewer than three points).
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let se = if x.len() > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| {
                let r = b - (intercept + slope * a);
                r * r
            })
            .sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    (slope, intercept, se)
}

pub(crate) fn arr(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}
