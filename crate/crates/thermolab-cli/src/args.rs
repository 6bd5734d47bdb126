//! Command-line grammar. Subcommand flags serialize to a JSON overlay on the config file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

/// Exact diagonalization, unbiased bases and spin-network combinatorics.
#[derive(Debug, Parser)]
#[command(name = "thermolab", version, about)]
pub struct Cli {
    /// Experiment to run.
    #[command(subcommand)]
    pub command: Command,
    /// JSON configuration; flags override its fields.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory; defaults to $THERMOLAB_OUT, then ./thermolab-out.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
}

/// Subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy-basis matrix-element statistics across chain lengths.
    EthScan(EthScanFlags),
    /// Disorder-averaged dynamics of local observables and entropies.
    MblDynamics(MblFlags),
    /// Complete family of mutually unbiased bases in prime dimension.
    MubBuild(MubFlags),
    /// Unbiased observable on the Fourier basis of a chain Hamiltonian.
    HuoCheck(HuoFlags),
    /// Level-spacing statistics of disordered chains.
    Levels(LevelsFlags),
    /// Reduced state of a fixed-area intertwiner and typicality bounds.
    SpinnetSurface(SurfaceFlags),
    /// Boundary state of a flower graph.
    SpinnetBoundary(BoundaryFlags),
    /// Magnetization degeneracy scan.
    TheoremScan(TheoremFlags),
    /// Re-executes a run from its manifest and verifies checksums.
    Replay(ReplayFlags),
}

impl Command {
    /// Subcommand name as typed.
    pub fn name(&self) -> &'static str {
        match self {
            Self::EthScan(_) => "eth-scan",
            Self::MblDynamics(_) => "mbl-dynamics",
            Self::MubBuild(_) => "mub-build",
            Self::HuoCheck(_) => "huo-check",
            Self::Levels(_) => "levels",
            Self::SpinnetSurface(_) => "spinnet-surface",
            Self::SpinnetBoundary(_) => "spinnet-boundary",
            Self::TheoremScan(_) => "theorem-scan",
            Self::Replay(_) => "replay",
        }
    }

    /// Flags given on the command line, as a JSON object.
    pub fn overlay(&self) -> serde_json::Value {
        let v = match self {
            Self::EthScan(f) => serde_json::to_value(f),
            Self::MblDynamics(f) => serde_json::to_value(f),
            Self::MubBuild(f) => serde_json::to_value(f),
            Self::HuoCheck(f) => serde_json::to_value(f),
            Self::Levels(f) => serde_json::to_value(f),
            Self::SpinnetSurface(f) => serde_json::to_value(f),
            Self::SpinnetBoundary(f) => serde_json::to_value(f),
            Self::TheoremScan(f) => serde_json::to_value(f),
            Self::Replay(_) => Ok(serde_json::Value::Object(Default::default())),
        };
        v.expect("flags serialize")
    }
}

/// Chain flags shared by the exact-diagonalization subcommands.
#[derive(Debug, Args, Serialize)]
pub struct ChainFlags {
    /// Disorder strength W.
    #[arg(long = "W")]
    #[serde(rename = "W", skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    /// Anisotropy.
    #[arg(long = "Delta")]
    #[serde(rename = "Delta", skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Exchange coupling.
    #[arg(long = "J")]
    #[serde(rename = "J", skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    /// Boundary condition: open or periodic.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<String>,
}

/// Flags of `eth-scan`.
#[derive(Debug, Args, Serialize)]
pub struct EthScanFlags {
    /// Chain lengths, comma separated.
    #[arg(long = "L", value_delimiter = ',')]
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<Vec<usize>>,
    #[command(flatten)]
    #[serde(flatten)]
    pub chain: ChainFlags,
    /// Realizations per length.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ndis: Option<usize>,
    /// Observable: huo or pauli.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observable: Option<String>,
    /// Site of the Pauli observable.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub site: Option<usize>,
    /// Axis of the Pauli observable.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
    /// Central fraction of the largest sector.
    #[arg(long = "bulk-fraction")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bulk_fraction: Option<f64>,
}

/// Flags of `mbl-dynamics`.
#[derive(Debug, Args, Serialize)]
pub struct MblFlags {
    /// Chain length.
    #[arg(long = "L")]
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub chain: ChainFlags,
    /// Disorder realizations.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ndis: Option<usize>,
    /// Initial state: neel, hub or ghz.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    /// Axis of the Néel state and of the magnetization.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
    /// Basis index of the HUB initial state.
    #[arg(long = "hub-index")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hub_index: Option<usize>,
    /// First sample time.
    #[arg(long = "t-min")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_min: Option<f64>,
    /// Last sample time.
    #[arg(long = "t-max")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    /// Number of sample times.
    #[arg(long = "n-times")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_times: Option<usize>,
    /// Grid spacing: log or linear.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<String>,
    /// Floating-point precision: f64 or f32.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<String>,
}

/// Flags of `mub-build`.
#[derive(Debug, Args, Serialize)]
pub struct MubFlags {
    /// Prime dimension.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

/// Flags of `huo-check`.
#[derive(Debug, Args, Serialize)]
pub struct HuoFlags {
    /// Chain length.
    #[arg(long = "L")]
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub chain: ChainFlags,
    /// Disorder realization index.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realization: Option<u64>,
}

/// Flags of `levels`.
#[derive(Debug, Args, Serialize)]
pub struct LevelsFlags {
    /// Chain length.
    #[arg(long = "L")]
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub chain: ChainFlags,
    /// Disorder realizations.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ndis: Option<usize>,
    /// Central fraction of the spectrum.
    #[arg(long = "bulk-fraction")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bulk_fraction: Option<f64>,
}

/// Flags of `spinnet-surface`.
#[derive(Debug, Args, Serialize)]
pub struct SurfaceFlags {
    /// Leg count N.
    #[arg(long = "N")]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    /// System legs k.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    /// Total integer area J0.
    #[arg(long = "J0")]
    #[serde(rename = "J0", skip_serializing_if = "Option::is_none")]
    pub j0: Option<u64>,
    /// Representation cutoff.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jmax: Option<f64>,
    /// Accuracy of the concentration bound.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Significant digits of the weight column.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub digits: Option<usize>,
}

/// Flags of `spinnet-boundary`.
#[derive(Debug, Args, Serialize)]
pub struct BoundaryFlags {
    /// Boundary edges E.
    #[arg(long = "E")]
    #[serde(rename = "E", skip_serializing_if = "Option::is_none")]
    pub e: Option<usize>,
    /// Loops L.
    #[arg(long = "L")]
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    /// Edge spin, a multiple of 1/2.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j0: Option<f64>,
    /// Significant digits of the weight column.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub digits: Option<usize>,
    /// Also scan the bound sign over E and L.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<bool>,
}

/// Flags of `theorem-scan`.
#[derive(Debug, Args, Serialize)]
pub struct TheoremFlags {
    /// Smallest N.
    #[arg(long = "n-min")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_min: Option<usize>,
    /// Largest N.
    #[arg(long = "n-max")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
}

/// Flags of `replay`.
#[derive(Debug, Args)]
pub struct ReplayFlags {
    /// Manifest of the run to replay.
    pub manifest: PathBuf,
}
