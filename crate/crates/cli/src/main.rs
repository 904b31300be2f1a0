//! `layered-ac`: computes minimal heteroclinics, strip and prism minimizers
//! and the reflected entire solution, stage by stage, into an output
//! directory described by `manifest.json`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod artifacts;
mod config;
mod error;
mod manifest;
mod stages;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::stages::Pipeline;

#[derive(Parser, Debug)]
#[command(name = "layered-ac", version, about = "Layered solutions of vector Allen-Cahn systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Order of the dihedral symmetry, prism angle pi / (2j).
    #[arg(long, global = true)]
    j: Option<usize>,

    /// Strip half-widths, comma separated.
    #[arg(long = "L", global = true, value_delimiter = ',')]
    l: Vec<f64>,

    /// Height of the truncated prism.
    #[arg(long = "Z", global = true)]
    z: Option<f64>,

    /// Seed of the randomized probes.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Minimizer (ordered by energy) used by the 2D and 3D stages.
    #[arg(long, global = true)]
    q_index: Option<usize>,

    /// Points per axis of the volumetric export.
    #[arg(long, global = true)]
    resolution: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq)]
enum Command {
    /// Hypotheses on W, minimal heteroclinics and the (*) / (**) certificate.
    Check,
    /// Minimal heteroclinic connections and their diagnostics.
    Heteroclinic,
    /// Second variation at the minimizers and the certificate.
    Spectrum,
    /// Strip minimizers for the half-widths given by --L.
    Strip,
    /// The table L -> m_{2,L} and the extrapolated m2.
    #[command(name = "m2l-table")]
    M2lTable,
    /// The 2D heteroclinic between q-bar and q.
    Hetero2d,
    /// The renormalized minimizer on the truncated prism.
    Prism,
    /// The reflected solution, its checks and the volumetric export.
    Assemble,
    /// Every enabled stage in order.
    RunAll,
    /// SVG plots of whatever the output directory holds.
    Plot,
}

fn configure(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(d) = &cli.out_dir {
        cfg.out_dir = d.clone();
    }
    if let Some(j) = cli.j {
        cfg.prism.j = j;
    }
    if let Some(z) = cli.z {
        cfg.prism.z_extent = z;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(k) = cli.q_index {
        cfg.q_index = k;
    }
    if let Some(r) = cli.resolution {
        cfg.assemble.resolution = r;
    }
    // For `strip` the half-widths are a one-off request; elsewhere they
    // replace the table's list.
    if !cli.l.is_empty() && cli.command != Command::Strip {
        cfg.strip.ls = cli.l.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = configure(cli)?;
    let mut pl = Pipeline::open(cfg)?;
    match cli.command {
        Command::Check => pl.check(),
        Command::Heteroclinic => pl.heteroclinic(),
        Command::Spectrum => pl.spectrum(),
        Command::Strip => {
            let mut ls = cli.l.clone();
            if ls.iter().any(|l| !(*l > 0.0)) || ls.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(CliError::Config("--L must be positive and ascending".into()));
            }
            pl.strip_ls = std::mem::take(&mut ls);
            pl.strip()
        }
        Command::M2lTable => pl.table(),
        Command::Hetero2d => pl.hetero2d(),
        Command::Prism => pl.prism(),
        Command::Assemble => pl.assemble(),
        Command::RunAll => pl.run_all(),
        Command::Plot => pl.plot(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
