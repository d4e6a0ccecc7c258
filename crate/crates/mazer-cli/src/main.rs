//! `mazer` — cavity transit simulations from the command line.
//!
//! Subcommands map onto the library layers: `amplitudes` dumps the
//! closed-form scattering amplitudes, `phase-sweep` and `phase-function`
//! cover the Wigner phase time and the unwrapped phase, `packet` integrates
//! the transmitted wave packet against its free-space reference, and
//! `split-report` compares the excited and ground exit channels. Every run
//! writes a deterministic artifact plus a JSON sidecar of the resolved
//! parameters that `rerun` accepts back.

mod config;
mod output;
mod runner;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use config::{GridFlags, PhysicsFlags};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "mazer",
    version,
    about = "Ultra-cold atoms traversing the vacuum-induced potentials of a single-mode cavity",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct SharedArgs {
    /// Figure preset pinning the physics parameters (fig3..fig9)
    #[arg(long)]
    preset: Option<String>,
    /// Cavity length as the dimensionless product k0*L
    #[arg(long = "L", allow_negative_numbers = true)]
    length: Option<f64>,
    /// Photon number n of the initial field state
    #[arg(long)]
    n: Option<u32>,
    /// Artifact path (sidecar goes next to it as *.params.json)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Artifact format: csv or json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args, Debug, Default)]
struct KGridArgs {
    /// Lower edge of the wavenumber grid (k/k0)
    #[arg(long, allow_negative_numbers = true)]
    k_min: Option<f64>,
    /// Upper edge of the wavenumber grid (k/k0)
    #[arg(long, allow_negative_numbers = true)]
    k_max: Option<f64>,
    /// Wavenumber grid step
    #[arg(long, allow_negative_numbers = true)]
    dk: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct TGridArgs {
    /// Start of the time grid in t/t_cl
    #[arg(long, allow_negative_numbers = true)]
    t_min: Option<f64>,
    /// End of the time grid in t/t_cl
    #[arg(long, allow_negative_numbers = true)]
    t_max: Option<f64>,
    /// Number of time samples
    #[arg(long)]
    t_samples: Option<usize>,
    /// Initial Gauss-Legendre node count
    #[arg(long)]
    nodes: Option<usize>,
    /// Node-doubling ceiling
    #[arg(long)]
    max_nodes: Option<usize>,
    /// Convergence tolerance as a fraction of the density peak
    #[arg(long, allow_negative_numbers = true)]
    quad_tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Dressed wavenumbers and scattering amplitudes at one or many k
    Amplitudes {
        #[command(flatten)]
        shared: SharedArgs,
        /// Single incident wavenumber k/k0 (alternative to a k grid)
        #[arg(long, allow_negative_numbers = true)]
        k: Option<f64>,
        #[command(flatten)]
        kgrid: KGridArgs,
    },
    /// Wigner phase time and |T|^2 across a range of mean wavenumbers
    PhaseSweep {
        #[command(flatten)]
        shared: SharedArgs,
        /// Exit channel: excited or ground
        #[arg(long, value_parser = ["excited", "ground"])]
        channel: Option<String>,
        #[command(flatten)]
        kgrid: KGridArgs,
        /// Finite-difference step for the phase derivative
        #[arg(long, allow_negative_numbers = true)]
        fd_step: Option<f64>,
    },
    /// Unwrapped transmission phase and the phase function phi + k*L
    PhaseFunction {
        #[command(flatten)]
        shared: SharedArgs,
        /// Exit channel: excited or ground
        #[arg(long, value_parser = ["excited", "ground"])]
        channel: Option<String>,
        #[command(flatten)]
        kgrid: KGridArgs,
    },
    /// Transmitted wave-packet density at the cavity exit vs t/t_cl
    Packet {
        #[command(flatten)]
        shared: SharedArgs,
        /// Cavity exit channel: excited or ground
        #[arg(long, value_parser = ["excited", "ground"])]
        channel: Option<String>,
        /// Mean wavenumber k̄/k0 of the Gaussian spectrum
        #[arg(long, allow_negative_numbers = true)]
        k_bar: Option<f64>,
        /// Spectral width sigma/k0
        #[arg(long, allow_negative_numbers = true)]
        sigma: Option<f64>,
        #[command(flatten)]
        tgrid: TGridArgs,
    },
    /// Excited/ground peak times, delay, weights, and split flags
    SplitReport {
        #[command(flatten)]
        shared: SharedArgs,
        /// Mean wavenumber k̄/k0 of the Gaussian spectrum
        #[arg(long, allow_negative_numbers = true)]
        k_bar: Option<f64>,
        /// Spectral width sigma/k0
        #[arg(long, allow_negative_numbers = true)]
        sigma: Option<f64>,
        #[command(flatten)]
        tgrid: TGridArgs,
    },
    /// Re-execute a run from its JSON parameter sidecar
    Rerun {
        /// Sidecar written by a previous run
        #[arg(long)]
        config: PathBuf,
        /// Redirect the artifact (sidecar follows it)
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let resolved = match cli.command {
        Command::Amplitudes { shared, k, kgrid } => config::resolve(
            "amplitudes",
            shared.preset.as_deref(),
            PhysicsFlags {
                length_k0l: shared.length,
                photons_n: shared.n,
                k,
                ..Default::default()
            },
            GridFlags {
                k_min: kgrid.k_min,
                k_max: kgrid.k_max,
                dk: kgrid.dk,
                ..Default::default()
            },
            shared.format,
            shared.output,
        )?,
        Command::PhaseSweep { shared, channel, kgrid, fd_step } => config::resolve(
            "phase-sweep",
            shared.preset.as_deref(),
            PhysicsFlags {
                length_k0l: shared.length,
                photons_n: shared.n,
                channel,
                ..Default::default()
            },
            GridFlags {
                k_min: kgrid.k_min,
                k_max: kgrid.k_max,
                dk: kgrid.dk,
                fd_step,
                ..Default::default()
            },
            shared.format,
            shared.output,
        )?,
        Command::PhaseFunction { shared, channel, kgrid } => config::resolve(
            "phase-function",
            shared.preset.as_deref(),
            PhysicsFlags {
                length_k0l: shared.length,
                photons_n: shared.n,
                channel,
                ..Default::default()
            },
            GridFlags {
                k_min: kgrid.k_min,
                k_max: kgrid.k_max,
                dk: kgrid.dk,
                ..Default::default()
            },
            shared.format,
            shared.output,
        )?,
        Command::Packet { shared, channel, k_bar, sigma, tgrid } => config::resolve(
            "packet",
            shared.preset.as_deref(),
            PhysicsFlags {
                length_k0l: shared.length,
                photons_n: shared.n,
                channel,
                k_bar,
                sigma,
                ..Default::default()
            },
            GridFlags {
                t_min: tgrid.t_min,
                t_max: tgrid.t_max,
                t_samples: tgrid.t_samples,
                nodes: tgrid.nodes,
                max_nodes: tgrid.max_nodes,
                quad_tol: tgrid.quad_tol,
                ..Default::default()
            },
            shared.format,
            shared.output,
        )?,
        Command::SplitReport { shared, k_bar, sigma, tgrid } => config::resolve(
            "split-report",
            shared.preset.as_deref(),
            PhysicsFlags {
                length_k0l: shared.length,
                photons_n: shared.n,
                k_bar,
                sigma,
                ..Default::default()
            },
            GridFlags {
                t_min: tgrid.t_min,
                t_max: tgrid.t_max,
                t_samples: tgrid.t_samples,
                nodes: tgrid.nodes,
                max_nodes: tgrid.max_nodes,
                quad_tol: tgrid.quad_tol,
                ..Default::default()
            },
            shared.format,
            shared.output,
        )?,
        Command::Rerun { config: path, output } => {
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            let mut resolved: config::ResolvedRun =
                serde_json::from_str(&text).context("parsing sidecar")?;
            if let Some(out) = output {
                resolved.output = out;
            }
            config::validate(&resolved)?;
            resolved
        }
    };
    runner::execute(&resolved)
}
