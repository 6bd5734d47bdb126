//! Command-line driver: configuration merge, subcommand dispatch, manifests and replay.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod replay;

use std::path::Path;

use args::{Cli, Command};
use commands::Params;
use config::{merge, resolve_out, EffectiveConfig, Overrides};
use error::{CliError, CliResult};
use output::{OutputSet, RunManifest, CONFIG_FILE, MANIFEST_FILE};

/// Program name recorded in manifests.
pub const TOOL: &str = "thermolab";
/// Program version recorded in manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Runs a parsed command line.
pub fn run(cli: Cli) -> CliResult<()> {
    if let Command::Replay(f) = &cli.command {
        let report = replay::replay(&f.manifest, cli.seed, cli.workers, cli.out.as_deref())?;
        println!("{report}");
        return report.into_result();
    }
    let over = Overrides { seed: cli.seed, workers: cli.workers, out: cli.out.clone(), params: cli.command.overlay() };
    let cfg = merge(cli.command.name(), cli.config.as_deref(), over)?;
    let dir = resolve_out(&cfg);
    let manifest = run_config(&cfg, &dir)?;
    println!("{}: {} outputs in {}", manifest.subcommand, manifest.outputs.len(), dir.display());
    Ok(())
}

/// Validates and executes a merged configuration, writing outputs and the manifest to `dir`.
pub fn run_config(cfg: &EffectiveConfig, dir: &Path) -> CliResult<RunManifest> {
    let params = Params::parse(&cfg.subcommand, cfg.params.clone())?;
    let effective = EffectiveConfig { out: None, params: params.to_value(), ..cfg.clone() };
    let started = chrono::Utc::now().to_rfc3339();
    let mut out = OutputSet::new(dir);
    out.write_json(CONFIG_FILE, &effective)?;
    let seed = effective.seed;
    let body = |out: &mut OutputSet| params.execute(seed, out);
    match effective.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| CliError::Resource(e.to_string()))?;
            pool.install(|| body(&mut out))?
        }
        None => body(&mut out)?,
    }
    let mut entries = out.commit()?;
    let config_file = entries.remove(0);
    let manifest = RunManifest {
        tool: TOOL.into(),
        version: VERSION.into(),
        subcommand: effective.subcommand.clone(),
        seed,
        config: serde_json::to_value(&effective)?,
        started,
        finished: chrono::Utc::now().to_rfc3339(),
        config_file,
        outputs: entries,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    std::fs::write(dir.join(MANIFEST_FILE), bytes)?;
    Ok(manifest)
}
