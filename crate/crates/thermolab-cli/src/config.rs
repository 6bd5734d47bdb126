//! Per-subcommand parameter schemas and the config-file merge.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thermolab::mbl::Spacing;
use thermolab::models::{Axis, Boundary, XXZParams};
use thermolab::spinnet::COSMOLOGICAL_JMAX;

use crate::error::{CliError, CliResult};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "THERMOLAB_OUT";
/// Output directory when neither a flag nor the environment sets one.
pub const DEFAULT_OUT: &str = "thermolab-out";

/// Merged configuration of one run, as stored in the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveConfig {
    /// Subcommand.
    pub subcommand: String,
    /// Master seed.
    #[serde(default)]
    pub seed: u64,
    /// Worker threads, `None` for the pool default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Subcommand parameters.
    #[serde(default = "empty_object")]
    pub params: Value,
}

fn empty_object() -> Value {
    Value::Object(Map::new())
}

/// Overrides from the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    /// `--seed`.
    pub seed: Option<u64>,
    /// `--workers`.
    pub workers: Option<usize>,
    /// `--out`.
    pub out: Option<PathBuf>,
    /// Subcommand flags.
    pub params: Value,
}

/// Reads a config file (if any) and applies the command-line overrides.
pub fn merge(subcommand: &str, file: Option<&Path>, over: Overrides) -> CliResult<EffectiveConfig> {
    let mut base = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Schema(format!("cannot read config {}: {e}", path.display())))?;
            let mut value: Value = serde_json::from_str(&text).map_err(|e| CliError::Schema(format!("config {} is not valid JSON: {e}", path.display())))?;
            if let Value::Object(m) = &mut value {
                m.entry("subcommand").or_insert_with(|| Value::String(subcommand.into()));
            }
            parse::<EffectiveConfig>(value, "")?
        }
        None => EffectiveConfig { subcommand: subcommand.into(), seed: 0, workers: None, out: None, params: empty_object() },
    };
    if base.subcommand != subcommand {
        return Err(CliError::Schema(format!("subcommand: config is for {:?}, invoked {subcommand:?}", base.subcommand)));
    }
    if !base.params.is_object() {
        return Err(CliError::Schema("params: expected a JSON object".into()));
    }
    if let (Value::Object(dst), Value::Object(src)) = (&mut base.params, over.params) {
        for (k, v) in src {
            dst.insert(k, v);
        }
    }
    if let Some(s) = over.seed {
        base.seed = s;
    }
    if over.workers.is_some() {
        base.workers = over.workers;
    }
    if over.out.is_some() {
        base.out = over.out;
    }
    if base.workers == Some(0) {
        return Err(CliError::Schema("workers: must be at least 1".into()));
    }
    Ok(base)
}

/// Output directory: flag or config, then the environment, then the default.
pub fn resolve_out(cfg: &EffectiveConfig) -> PathBuf {
    cfg.out.clone().or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Deserializes with a field-level error path.
pub fn parse<T: DeserializeOwned>(value: Value, prefix: &str) -> CliResult<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let field = match (prefix.is_empty(), path.as_str()) {
            (true, p) => p.to_string(),
            (false, ".") => prefix.to_string(),
            (false, p) => format!("{prefix}.{p}"),
        };
        CliError::Schema(format!("{field}: {}", e.inner()))
    })
}

fn one() -> f64 {
    1.0
}

/// Observable selector for `eth-scan`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservableKind {
    /// Balanced unbiased observable.
    Huo,
    /// Single-site Pauli operator.
    Pauli,
}

/// Initial-state selector for `mbl-dynamics`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialKind {
    /// Néel state along `axis`.
    Neel,
    /// Column of the Fourier basis.
    Hub,
    /// GHZ state.
    Ghz,
}

/// Floating-point precision of a dynamics run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// Single precision.
    F32,
    /// Double precision.
    F64,
}

macro_rules! chain_params {
    ($(#[$m:meta])* $name:ident { $($(#[$fm:meta])* $field:ident : $ty:ty = $def:expr),* $(,)? }) => {
        $(#[$m])*
        #[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            /// Disorder strength.
            #[serde(rename = "W", default)]
            pub w: f64,
            /// Anisotropy.
            #[serde(rename = "Delta", default = "one")]
            pub delta: f64,
            /// Exchange coupling.
            #[serde(rename = "J", default = "one")]
            pub j: f64,
            /// Boundary condition.
            #[serde(default)]
            pub boundary: Boundary,
            $($(#[$fm])* pub $field: $ty,)*
        }

        impl $name {
            /// Chain parameters of length `l` keyed by `seed`.
            pub fn chain(&self, l: usize, seed: u64) -> XXZParams {
                XXZParams { l, j: self.j, delta: self.delta, w: self.w, boundary: self.boundary, seed }
            }
        }

        impl Default for $name {
            fn default() -> Self {
                Self { w: 0.0, delta: 1.0, j: 1.0, boundary: Boundary::Open, $($field: $def,)* }
            }
        }
    };
}

chain_params! {
    /// Parameters of `eth-scan`.
    EthScanParams {
        /// Chain lengths.
        #[serde(rename = "L", default = "default_ls")]
        l: Vec<usize> = default_ls(),
        /// Realizations per length.
        #[serde(default = "default_ndis")]
        ndis: usize = default_ndis(),
        /// Observable.
        #[serde(default = "default_obs")]
        observable: ObservableKind = default_obs(),
        /// Pauli site.
        #[serde(default)]
        site: usize = 0,
        /// Pauli axis.
        #[serde(default = "default_axis_z")]
        axis: Axis = Axis::Z,
        /// Bulk fraction.
        #[serde(default = "default_bulk")]
        bulk_fraction: f64 = default_bulk(),
    }
}

chain_params! {
    /// Parameters of `mbl-dynamics`.
    MblParams {
        /// Chain length.
        #[serde(rename = "L", default = "default_l10")]
        l: usize = 10,
        /// Realizations.
        #[serde(default = "default_ndis")]
        ndis: usize = default_ndis(),
        /// Initial state.
        #[serde(default = "default_initial")]
        initial: InitialKind = InitialKind::Neel,
        /// Néel and magnetization axis.
        #[serde(default = "default_axis_x")]
        axis: Axis = Axis::X,
        /// HUB column for `initial = hub`.
        #[serde(default)]
        hub_index: usize = 0,
        /// First sample time.
        #[serde(default = "default_t_min")]
        t_min: f64 = 0.1,
        /// Last sample time.
        #[serde(default = "default_t_max")]
        t_max: f64 = 1000.0,
        /// Number of samples.
        #[serde(default = "default_n_times")]
        n_times: usize = 200,
        /// Grid spacing.
        #[serde(default = "default_spacing")]
        spacing: Spacing = Spacing::Log,
        /// Start of the logarithmic fit window.
        #[serde(default = "one")]
        fit_t_min: f64 = 1.0,
        /// End of the logarithmic fit window.
        #[serde(default = "default_t_max")]
        fit_t_max: f64 = 1000.0,
        /// Start of the late-time average.
        #[serde(default = "default_late")]
        late_t_min: f64 = 100.0,
        /// Precision.
        #[serde(default = "default_precision")]
        precision: Precision = Precision::F64,
        /// Memory budget in bytes.
        #[serde(default = "default_budget")]
        memory_budget: usize = default_budget(),
    }
}

chain_params! {
    /// Parameters of `huo-check`.
    HuoParams {
        /// Chain length.
        #[serde(rename = "L", default = "default_l8")]
        l: usize = 8,
        /// Disorder realization index.
        #[serde(default)]
        realization: u64 = 0,
    }
}

chain_params! {
    /// Parameters of `levels`.
    LevelsParams {
        /// Chain length.
        #[serde(rename = "L", default = "default_l12")]
        l: usize = 12,
        /// Realizations.
        #[serde(default = "default_ndis")]
        ndis: usize = default_ndis(),
        /// Bulk fraction.
        #[serde(default = "default_bulk")]
        bulk_fraction: f64 = default_bulk(),
    }
}

fn default_ls() -> Vec<usize> {
    vec![6, 8, 10]
}
fn default_ndis() -> usize {
    50
}
fn default_obs() -> ObservableKind {
    ObservableKind::Huo
}
fn default_axis_z() -> Axis {
    Axis::Z
}
fn default_axis_x() -> Axis {
    Axis::X
}
fn default_bulk() -> f64 {
    0.5
}
fn default_l8() -> usize {
    8
}
fn default_l10() -> usize {
    10
}
fn default_l12() -> usize {
    12
}
fn default_initial() -> InitialKind {
    InitialKind::Neel
}
fn default_t_min() -> f64 {
    0.1
}
fn default_t_max() -> f64 {
    1000.0
}
fn default_n_times() -> usize {
    200
}
fn default_spacing() -> Spacing {
    Spacing::Log
}
fn default_late() -> f64 {
    100.0
}
fn default_precision() -> Precision {
    Precision::F64
}
fn default_budget() -> usize {
    thermolab::models::DEFAULT_MEMORY_BUDGET
}

/// Parameters of `mub-build`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MubParams {
    /// Prime dimension.
    pub dim: usize,
}

/// Parameters of `spinnet-surface`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceParams {
    /// Leg count.
    #[serde(rename = "N")]
    pub n: u64,
    /// System legs.
    pub k: u64,
    /// Total integer area.
    #[serde(rename = "J0")]
    pub j0: u64,
    /// Representation cutoff.
    #[serde(default = "default_jmax")]
    pub jmax: f64,
    /// Accuracy of the concentration bound.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Significant digits of exact weights.
    #[serde(default = "default_digits")]
    pub digits: usize,
}

fn default_jmax() -> f64 {
    COSMOLOGICAL_JMAX
}
fn default_epsilon() -> f64 {
    1e-10
}
fn default_digits() -> usize {
    17
}

/// Parameters of `spinnet-boundary`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryParams {
    /// Boundary edges.
    #[serde(rename = "E")]
    pub e: usize,
    /// Loops.
    #[serde(rename = "L")]
    pub l: usize,
    /// Edge spin.
    pub j0: f64,
    /// Significant digits of exact weights.
    #[serde(default = "default_digits")]
    pub digits: usize,
    /// Whether to scan the bound over `E, L ≤ 20` for `j0 ∈ {1/2, 1, 5}`.
    #[serde(default)]
    pub scan: bool,
}

/// Parameters of `theorem-scan`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoremParams {
    /// Smallest N.
    #[serde(default = "default_n_min")]
    pub n_min: usize,
    /// Largest N.
    #[serde(default = "default_n_max")]
    pub n_max: usize,
}

fn default_n_min() -> usize {
    14
}
fn default_n_max() -> usize {
    24
}
