//! Discrete Dirichlet-energy minimizers for maps from the unit ball of R³
//! into the unit sphere S², together with the diagnostics used to study
//! their stability under boundary perturbations: topological degrees,
//! singularity detection, monotonicity profiles and a handful of explicit
//! competitor constructions.
//!
//! Fields are P1 (piecewise affine) on a layered icosphere tetrahedral mesh;
//! see [`mesh::ShellMesh`].

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod constructions;
pub mod energy;
mod error;
pub mod exec;
pub mod field;
pub mod linalg;
pub mod mesh;
pub mod minimizer;
pub mod topology;

pub use error::{Error, Result};

pub use constructions::{
    apply_registration, bcl_gap, bubble_scaling_curve, comparison_map, energy_proxy,
    fit_rotation, hkl_extension, interpolation_check, BubbleScaling, HklExtension,
    Registration, RegistrationEntry, RegistrationMap, StabilityRecord, ReferenceSolution, stability_record, HKL_CONSTANT,
};
pub use energy::{
    dirichlet_energy, monotonicity_profile, radial_term, rescaled_energy, EnergyProfile,
};
pub use exec::Exec;
pub use field::{
    eval_boundary_spec, holder_distance, holder_distance_outside, w1p_distance, BoundaryField, BoundarySpec, SphereField,
};
pub use mesh::{p1_gradient, ShellMesh, SphereMesh};
pub use minimizer::{
    shifted_hedgehog, BoundCheck, Solver,
    energy_upper_bound_check, hedgehog, homogeneous_extension, minimize, Initialization,
    SolveOptions, SolveReport,
};
pub use topology::{DEFAULT_THRESHOLD, degree, detect_singularities, local_degree, Degree, SingularPoint, SingularSet};

/// Three-vectors used for positions and field values.
pub type Vec3 = nalgebra::Vector3<f64>;

/// The quantized energy of the hedgehog `x/|x|` on the unit ball, 8π.
pub const HEDGEHOG_ENERGY: f64 = 8.0 * std::f64::consts::PI;
