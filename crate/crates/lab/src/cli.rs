use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, Context};
use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};

#[derive(Debug, Parser)]
#[command(name = "harmap", version, about = "Experiments on discrete minimizing harmonic maps B³ → S²")]
pub struct Cli {
    /// JSON experiment configuration (defaults apply when absent).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides `solver.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (default `out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for the data-parallel kernels.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize with the configured boundary data; writes field.vtk and solve.json.
    Solve,
    /// Stability sweep over the configured ladder; writes sweep.csv and sweep.json.
    Sweep,
    /// Dipole norm scaling against the bubble scale.
    BubbleScaling(BubbleArgs),
    /// Rescaled-energy profile of a field file about a center.
    Monotonicity(MonotonicityArgs),
    /// Degree of the configured boundary map.
    Degree,
    /// Dipole boundary data next to the identity control.
    InstabilityDemo(DemoArgs),
    /// Mesh statistics.
    MeshInfo,
}

#[derive(Debug, Args)]
pub struct BubbleArgs {
    /// Exponents, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    /// Dipole scales, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub scales: Option<Vec<f64>>,
    /// Sphere subdivision level.
    #[arg(long)]
    pub level: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MonotonicityArgs {
    /// VTK field written by `solve`.
    #[arg(long)]
    pub field: Option<PathBuf>,
    /// Center `x,y,z` (write `--center=-0.1,0,0` for a leading minus).
    #[arg(long, value_delimiter = ',')]
    pub center: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    /// Dipole scale λ.
    #[arg(long)]
    pub scale: Option<f64>,
}

fn configure_threads(threads: Option<usize>) -> LabResult<()> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(LabError::Config("--threads must be positive".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| LabError::Config(format!("thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    log::warn!("--threads {n} ignored: built without the `parallel` feature");
    Ok(())
}

pub fn run(cli: Cli) -> LabResult<()> {
    configure_threads(cli.threads)?;
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    match &cli.command {
        Command::BubbleScaling(a) => {
            if let Some(p) = &a.p {
                config.bubble.p = p.clone();
            }
            if let Some(s) = &a.scales {
                config.bubble.scales = s.clone();
            }
            if let Some(l) = a.level {
                config.bubble.level = l;
            }
        }
        Command::Monotonicity(a) => {
            if let Some(f) = &a.field {
                config.monotonicity.field = Some(f.clone());
            }
            if let Some(c) = &a.center {
                if c.len() != 3 {
                    return Err(LabError::Config(format!("--center needs 3 coordinates, got {}", c.len())));
                }
                config.monotonicity.center = [c[0], c[1], c[2]];
            }
        }
        Command::InstabilityDemo(a) => {
            if let Some(s) = a.scale {
                config.demo.scale = s;
            }
        }
        _ => {}
    }
    let ctx = Context::new(config, cli.out.clone(), cli.seed)?;
    match cli.command {
        Command::Solve => commands::solve::run(&ctx).map(drop),
        Command::Sweep => commands::sweep::run(&ctx).map(drop),
        Command::BubbleScaling(_) => commands::bubble::run(&ctx, &ctx.config.bubble).map(drop),
        Command::Monotonicity(_) => commands::monotonicity::run(&ctx).map(drop),
        Command::Degree => commands::degree::run(&ctx).map(drop),
        Command::InstabilityDemo(_) => commands::demo::run(&ctx).map(drop),
        Command::MeshInfo => commands::mesh_info::run(&ctx).map(drop),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn global_flags_parse_after_subcommand() {
        let cli = Cli::try_parse_from(["harmap", "degree", "--seed", "7", "--out", "x"]).unwrap();
        assert_eq!(cli.seed, Some(7));
        assert!(matches!(cli.command, Command::Degree));
        let cli = Cli::try_parse_from(["harmap", "monotonicity", "--center=-0.1,0,0"]).unwrap();
        match cli.command {
            Command::Monotonicity(a) => assert_eq!(a.center, Some(vec![-0.1, 0.0, 0.0])),
            _ => unreachable!(),
        }
    }
}
