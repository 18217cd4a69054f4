//! Command-line front end for the weak-measurement simulations.
//!
//! Each experiment reads a flat config, runs one of the computational
//! routes and writes a JSON summary (keys `experiment`, `config`,
//! `results`, `checks`) plus any CSV data next to it. `validate` runs the
//! numbered acceptance criteria.

pub mod acceptance;
pub mod config;
pub mod experiments;
pub mod grid;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{ConfigError, RawConfig};
pub use experiments::{run, Experiment, RunOutput};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] weakmeas_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("output: {0}")]
    Output(String),
}

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> Result<RawConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    Ok(RawConfig::parse(&text)?)
}

/// Writes the JSON summary and every artifact into `dir`, creating it if
/// needed. Returns the written paths in order.
pub fn write_outputs(dir: &Path, experiment: Experiment, out: &RunOutput) -> Result<Vec<PathBuf>, CliError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::new();
    for a in &out.artifacts {
        let p = dir.join(&a.name);
        fs::write(&p, &a.contents).map_err(io(&p))?;
        written.push(p);
    }
    let p = dir.join(format!("{}.json", experiment.stem()));
    fs::write(&p, out.report.to_json()).map_err(io(&p))?;
    written.push(p);
    Ok(written)
}
