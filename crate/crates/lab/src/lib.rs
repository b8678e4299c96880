//! Command-line experiments built on `harmap-core`: configuration loading,
//! report emission (JSON + CSV) and VTK field files.
//!
//! Exit codes: 1 for compute and I/O failures, 2 for configuration errors,
//! 3 when a requested scale or radius is below the mesh resolution.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod vtk;

pub use error::{LabError, LabResult};
