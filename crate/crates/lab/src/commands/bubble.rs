use std::sync::Arc;

use harmap_core::{bubble_scaling_curve, BubbleScaling, SphereMesh};
use serde::{Deserialize, Serialize};

use super::Context;
use crate::config::BubbleConfig;
use crate::error::LabResult;
use crate::report::{to_csv, to_json, Outputs, SCHEMA_VERSION};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BubbleReport {
    pub schema_version: u32,
    pub level: usize,
    pub curves: Vec<BubbleScaling>,
}

pub fn compute(cfg: &BubbleConfig) -> LabResult<BubbleReport> {
    let sphere = Arc::new(SphereMesh::new(cfg.level)?);
    let curves = cfg
        .p
        .iter()
        .map(|&p| bubble_scaling_curve(p, &cfg.scales, sphere.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BubbleReport {
        schema_version: SCHEMA_VERSION,
        level: cfg.level,
        curves,
    })
}

/// `p,lambda,norm`, one row per curve point.
pub fn norms_csv(r: &BubbleReport) -> String {
    let rows: Vec<Vec<Option<f64>>> = r
        .curves
        .iter()
        .flat_map(|c| c.rows.iter().map(move |row| vec![Some(c.p), Some(row.lambda), Some(row.norm)]))
        .collect();
    to_csv(&["p", "lambda", "norm"], &rows)
}

/// `p,slope,expected_slope,stderr`, one row per curve.
pub fn slopes_csv(r: &BubbleReport) -> String {
    let rows: Vec<Vec<Option<f64>>> = r
        .curves
        .iter()
        .map(|c| {
            vec![
                Some(c.p),
                Some(c.slope),
                Some(c.expected_slope),
                c.slope_stderr.is_finite().then_some(c.slope_stderr),
            ]
        })
        .collect();
    to_csv(&["p", "slope", "expected_slope", "stderr"], &rows)
}

pub fn run(ctx: &Context, cfg: &BubbleConfig) -> LabResult<BubbleReport> {
    let r = compute(cfg)?;
    Outputs::new(&ctx.out)?.write_all(&[
        ("bubble_scaling.csv", norms_csv(&r)),
        ("bubble_slopes.csv", slopes_csv(&r)),
        ("bubble_scaling.json", to_json(&r)),
    ])?;
    for c in &r.curves {
        println!(
            "p = {}: slope {:.4} (expected {:.4}) over {} scales",
            c.p,
            c.slope,
            c.expected_slope,
            c.rows.len()
        );
    }
    Ok(r)
}
