//! Command-line front end for rhythmkit: strict TOML experiment configs,
//! named presets, parallel parameter sweeps and CSV/JSON output.

pub mod config;
pub mod output;
pub mod presets;
pub mod sweep;

use std::path::Path;

use thiserror::Error;

pub use config::{load, parse_config, ConfigError, ExperimentConfig, LoadedConfig};
pub use presets::{run_experiment, ExperimentError, ExperimentOutput};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("i/o error: {0}")]
    Io(std::io::Error),
    #[error("{failed} of {total} sweep runs failed")]
    PartialSweep { failed: usize, total: usize },
}

impl RunError {
    /// 1 for configuration problems, 2 for numerical failures, 3 for a
    /// sweep with failed children.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io(_) => 1,
            RunError::Experiment(e) if e.is_config() => 1,
            RunError::Experiment(_) => 2,
            RunError::PartialSweep { .. } => 3,
        }
    }
}

/// Loads `config_text` (may be empty) with `experiment = name` and the
/// overrides applied, runs it and writes the results to `out`.
pub fn run_preset(
    name: &str,
    config_text: &str,
    overrides: &[String],
    seed: Option<u64>,
    out: &Path,
    command: &[String],
) -> Result<(LoadedConfig, ExperimentOutput), RunError> {
    let mut all = vec![format!("experiment = \"{name}\"")];
    all.extend(overrides.iter().cloned());
    let mut loaded = load(config_text, &all)?;
    if let Some(seed) = seed {
        loaded.config.seed = seed;
        if !loaded.user_keys.iter().any(|k| k == "seed") {
            loaded.user_keys.push("seed".into());
        }
    }
    let output = run_experiment(&loaded.config)?;
    output::write_experiment(out, &loaded, &output, command).map_err(RunError::Io)?;
    Ok((loaded, output))
}
