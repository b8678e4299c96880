//! Stability sweeps: solve once per boundary spec, then measure every point
//! against the identity solution at one or more Sobolev exponents.

use std::sync::Arc;

use harmap_core::constructions::{comparison_bound, comparison_map};
use harmap_core::exec::Exec;
use harmap_core::minimizer::minimize_with;
use harmap_core::{
    dirichlet_energy, eval_boundary_spec, stability_record, BoundaryField, BoundarySpec,
    Initialization, ReferenceSolution, ShellMesh, SolveOptions, SolveReport, SphereField,
    StabilityRecord, HEDGEHOG_ENERGY,
};
use serde::{Deserialize, Serialize};

use super::{Context, MeshSummary};
use crate::config::SweepConfig;
use crate::error::{LabError, LabResult};
use crate::report::{log_log_slope, spearman, to_csv, to_json, Outputs, PassCount, Slope, SCHEMA_VERSION};

pub const CSV_HEADER: [&str; 5] = ["delta", "a_norm", "holder", "theta_dev", "energy_gap"];

/// A solved sweep point.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub spec: BoundarySpec,
    pub field: SphereField,
    pub report: SolveReport,
}

/// All solves of a sweep; independent of the exponent used to measure δ.
#[derive(Clone, Debug)]
pub struct SweepSolves {
    pub mesh: Arc<ShellMesh>,
    pub rho_min: f64,
    pub reference: ReferenceSolution,
    pub reference_report: SolveReport,
    pub points: Vec<SweepPoint>,
}

fn solve_point(
    mesh: &Arc<ShellMesh>,
    spec: &BoundarySpec,
    opts: &SolveOptions,
) -> LabResult<(SphereField, SolveReport)> {
    let psi = eval_boundary_spec(spec, mesh.sphere_arc())?;
    Ok(minimize_with(mesh.clone(), &psi, opts, Exec::Sequential)?)
}

#[cfg(feature = "parallel")]
fn solve_all(
    mesh: &Arc<ShellMesh>,
    specs: &[BoundarySpec],
    opts: &SolveOptions,
) -> Vec<LabResult<(SphereField, SolveReport)>> {
    use rayon::prelude::*;
    specs.par_iter().map(|s| solve_point(mesh, s, opts)).collect()
}

#[cfg(not(feature = "parallel"))]
fn solve_all(
    mesh: &Arc<ShellMesh>,
    specs: &[BoundarySpec],
    opts: &SolveOptions,
) -> Vec<LabResult<(SphereField, SolveReport)>> {
    specs.iter().map(|s| solve_point(mesh, s, opts)).collect()
}

/// Solves the identity reference, then every spec. With `warm_start`, each
/// point is a single descent from the reference field; otherwise it uses
/// `opts` as given. Identity specs reuse the reference solve.
pub fn solve_sweep(
    mesh: Arc<ShellMesh>,
    specs: &[BoundarySpec],
    opts: &SolveOptions,
    warm_start: bool,
    rho_min: f64,
) -> LabResult<SweepSolves> {
    let id = BoundaryField::identity(mesh.sphere_arc());
    let (field, reference_report) = minimize_with(mesh.clone(), &id, opts, Exec::default())?;
    let reference = ReferenceSolution::from_field(field, rho_min)?;
    let point_opts = if warm_start {
        SolveOptions {
            initialization: Initialization::Given(reference.field.values().to_vec()),
            restarts: 1,
            ..opts.clone()
        }
    } else {
        opts.clone()
    };
    let pending: Vec<BoundarySpec> = specs
        .iter()
        .filter(|s| **s != BoundarySpec::Identity)
        .cloned()
        .collect();
    let mut solved = solve_all(&mesh, &pending, &point_opts).into_iter();
    let mut points = Vec::with_capacity(specs.len());
    for spec in specs {
        let (field, report) = if *spec == BoundarySpec::Identity {
            (reference.field.clone(), reference_report.clone())
        } else {
            solved.next().expect("one solve per pending spec")?
        };
        points.push(SweepPoint {
            spec: spec.clone(),
            field,
            report,
        });
    }
    Ok(SweepSolves {
        mesh,
        rho_min,
        reference,
        reference_report,
        points,
    })
}

/// The comparison-map check at one point: the minimizer is below the
/// competitor built from the reference, which is below its bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonCheck {
    pub rho: f64,
    pub competitor_energy: f64,
    pub bound: f64,
    pub minimizer_below_competitor: bool,
    pub competitor_below_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub spec: BoundarySpec,
    pub delta: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_energy: f64,
    /// Absent when the point could not be measured (see `error`).
    pub record: Option<StabilityRecord>,
    pub comparison: Option<ComparisonCheck>,
    pub flagged: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSlopes {
    /// `|a − a₀|` against δ, `a₀` the reference singularity.
    pub a_shift: Option<Slope>,
    pub a_norm: Option<Slope>,
    pub holder: Option<Slope>,
    pub holder_hedgehog: Option<Slope>,
    pub theta_dev: Option<Slope>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectedExponents {
    pub a: f64,
    pub holder: f64,
    /// `1/(2q)` when `q` is configured.
    pub holder_q: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSummary {
    pub singularity: [f64; 3],
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub p: f64,
    pub beta: f64,
    pub q: Option<f64>,
    pub mesh: MeshSummary,
    pub rho_min: f64,
    pub reference: ReferenceSummary,
    /// Sorted by δ.
    pub rows: Vec<SweepRow>,
    /// Fits over unflagged points with δ > 0.
    pub slopes: SweepSlopes,
    pub expected: ExpectedExponents,
    pub energy_bound: PassCount,
    pub comparison: PassCount,
    pub flagged_count: usize,
    /// Spearman correlation of `|a|²` with `E − 8π` over measured points.
    pub bcl_spearman: Option<f64>,
}

fn comparison_check(
    reference: &ReferenceSolution,
    psi: &BoundaryField,
    minimizer_energy: f64,
    record: &StabilityRecord,
    rho: f64,
) -> LabResult<Option<ComparisonCheck>> {
    if record.delta == 0.0 {
        return Ok(None);
    }
    let layers = reference.field.mesh().layers() as f64;
    let rho = (rho * layers).round().clamp(1.0, layers - 1.0) / layers;
    let w = comparison_map(&reference.field, psi, rho)?;
    let competitor_energy = dirichlet_energy(&w);
    let b = comparison_bound(
        reference.energy,
        record.delta,
        record.sup_distance,
        record.p,
        rho,
        record.kappa,
    )?;
    Ok(Some(ComparisonCheck {
        rho,
        competitor_energy,
        bound: b.bound,
        minimizer_below_competitor: minimizer_energy <= competitor_energy,
        competitor_below_bound: competitor_energy <= b.bound,
    }))
}

fn measure(
    solves: &SweepSolves,
    point: &SweepPoint,
    cfg: &SweepParams,
) -> LabResult<SweepRow> {
    let psi = point.field.trace();
    let id = BoundaryField::identity(psi.sphere_arc());
    let delta = harmap_core::w1p_distance(&psi, &id, cfg.p)?;
    let base = SweepRow {
        spec: point.spec.clone(),
        delta,
        iterations: point.report.iterations,
        converged: point.report.converged,
        final_energy: point.report.final_energy,
        record: None,
        comparison: None,
        flagged: true,
        error: None,
    };
    match stability_record(&point.field, &psi, cfg.p, cfg.beta, &solves.reference, solves.rho_min) {
        Ok(record) => {
            let comparison = match comparison_check(
                &solves.reference,
                &psi,
                record.energy,
                &record,
                cfg.comparison_rho,
            ) {
                Ok(c) => c,
                Err(e) => {
                    log::warn!("comparison check skipped at δ = {delta:.4}: {e}");
                    None
                }
            };
            Ok(SweepRow {
                flagged: record.flagged,
                record: Some(record),
                comparison,
                ..base
            })
        }
        Err(e @ (harmap_core::Error::NotApplicable(_) | harmap_core::Error::Alignment(_))) => {
            log::warn!("sweep point δ = {delta:.4} flagged: {e}");
            Ok(SweepRow {
                error: Some(e.to_string()),
                ..base
            })
        }
        Err(e) => Err(e.into()),
    }
}

/// Measurement parameters of one report.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepParams {
    pub p: f64,
    pub beta: f64,
    pub q: Option<f64>,
    pub comparison_rho: f64,
}

impl From<&SweepConfig> for SweepParams {
    fn from(c: &SweepConfig) -> Self {
        SweepParams {
            p: c.p,
            beta: c.beta,
            q: c.q,
            comparison_rho: c.comparison_rho,
        }
    }
}

pub fn report(solves: &SweepSolves, params: &SweepParams) -> LabResult<SweepReport> {
    let mut rows = solves
        .points
        .iter()
        .map(|pt| measure(solves, pt, params))
        .collect::<LabResult<Vec<_>>>()?;
    rows.sort_by(|a, b| a.delta.total_cmp(&b.delta));
    let fit: Vec<&StabilityRecord> = rows
        .iter()
        .filter(|r| !r.flagged && r.delta > 0.0)
        .filter_map(|r| r.record.as_ref())
        .collect();
    let x: Vec<f64> = fit.iter().map(|r| r.delta).collect();
    let slope = |f: fn(&StabilityRecord) -> f64| {
        let y: Vec<f64> = fit.iter().map(|r| f(r)).collect();
        log_log_slope(&x, &y)
    };
    let slopes = SweepSlopes {
        a_shift: slope(|r| r.a_shift),
        a_norm: slope(|r| r.a_norm),
        holder: slope(|r| r.holder),
        holder_hedgehog: slope(|r| r.holder_hedgehog),
        theta_dev: slope(|r| r.theta_dev),
    };
    let measured: Vec<&StabilityRecord> = rows.iter().filter_map(|r| r.record.as_ref()).collect();
    let a2: Vec<f64> = measured.iter().map(|r| r.a_norm * r.a_norm).collect();
    let gap: Vec<f64> = measured.iter().map(|r| r.energy_gap).collect();
    let comparisons: Vec<&ComparisonCheck> = rows.iter().filter_map(|r| r.comparison.as_ref()).collect();
    Ok(SweepReport {
        schema_version: SCHEMA_VERSION,
        p: params.p,
        beta: params.beta,
        q: params.q,
        mesh: MeshSummary::of(&solves.mesh),
        rho_min: solves.rho_min,
        reference: ReferenceSummary {
            singularity: [
                solves.reference.singularity.x,
                solves.reference.singularity.y,
                solves.reference.singularity.z,
            ],
            energy: solves.reference.energy,
            iterations: solves.reference_report.iterations,
            converged: solves.reference_report.converged,
        },
        energy_bound: PassCount::of(measured.iter().map(|r| r.energy_bound_holds)),
        comparison: PassCount::of(
            comparisons
                .iter()
                .map(|c| c.minimizer_below_competitor && c.competitor_below_bound),
        ),
        flagged_count: rows.iter().filter(|r| r.flagged).count(),
        bcl_spearman: spearman(&a2, &gap),
        rows,
        slopes,
        expected: ExpectedExponents {
            a: 0.5,
            holder: 0.25,
            holder_q: params.q.map(|q| 1.0 / (2.0 * q)),
        },
    })
}

pub fn csv(report: &SweepReport) -> String {
    let rows: Vec<Vec<Option<f64>>> = report
        .rows
        .iter()
        .map(|r| match &r.record {
            Some(s) => vec![Some(r.delta), Some(s.a_norm), Some(s.holder), Some(s.theta_dev), Some(s.energy_gap)],
            None => vec![Some(r.delta), None, None, None, None],
        })
        .collect();
    to_csv(&CSV_HEADER, &rows)
}

pub fn run(ctx: &Context) -> LabResult<SweepReport> {
    let c = &ctx.config;
    let sweep = c
        .sweep
        .as_ref()
        .ok_or_else(|| LabError::Config("the sweep command needs a `sweep` section".into()))?;
    let mesh = ctx.mesh()?;
    let rho_min = c.rho_min(&mesh);
    let specs = sweep.specs()?;
    let solves = solve_sweep(mesh, &specs, &c.solver, sweep.warm_start, rho_min)?;
    let rep = report(&solves, &SweepParams::from(sweep))?;
    Outputs::new(&ctx.out)?.write_all(&[("sweep.csv", csv(&rep)), ("sweep.json", to_json(&rep))])?;
    let show = |s: &Option<Slope>| s.map_or("n/a".to_string(), |s| format!("{:.3}", s.value));
    println!(
        "{} points ({} flagged); slopes vs δ: |a−a₀| {}, |a| {}, holder {}; energy bound {}/{}",
        rep.rows.len(),
        rep.flagged_count,
        show(&rep.slopes.a_shift),
        show(&rep.slopes.a_norm),
        show(&rep.slopes.holder),
        rep.energy_bound.passed,
        rep.energy_bound.total,
    );
    if rep.reference.energy > 1.05 * HEDGEHOG_ENERGY {
        log::warn!("reference energy {:.4} is more than 5% above 8π", rep.reference.energy);
    }
    Ok(rep)
}
