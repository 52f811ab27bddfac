//! Command-line pipeline: dataset statistics, preprocessing, featurization,
//! cross-validated experiments, topic models and batch scoring.
//!
//! Exit status is 0 on success, 2 when inputs or configuration are invalid
//! and 1 when a run fails after its inputs were accepted.

pub mod args;
pub mod commands;
pub mod config;

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use misinfo_core::corpus::{load_dataset, DatasetSchema};
use misinfo_core::LabeledDataset;

pub use args::{Cli, Command};
pub use commands::dispatch;
pub use config::{Experiment, ExperimentConfig};

pub const EXIT_RUN_FAILURE: u8 = 1;
pub const EXIT_INVALID_INPUT: u8 = 2;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn input(error: impl Into<anyhow::Error>) -> Self {
        CliError {
            code: EXIT_INVALID_INPUT,
            error: error.into(),
        }
    }

    pub fn run(error: impl Into<anyhow::Error>) -> Self {
        CliError {
            code: EXIT_RUN_FAILURE,
            error: error.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

/// Tags an error with the exit code it should produce.
pub trait ExitCode<T> {
    fn or_input(self) -> CliResult<T>;
    fn or_run(self) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> ExitCode<T> for Result<T, E> {
    fn or_input(self) -> CliResult<T> {
        self.map_err(CliError::input)
    }

    fn or_run(self) -> CliResult<T> {
        self.map_err(CliError::run)
    }
}

/// Loads a labeled dataset, refusing files that hold no documents.
pub fn load_labeled(path: &Path, schema: DatasetSchema) -> CliResult<LabeledDataset> {
    let ds = load_dataset(path, schema).or_input()?;
    if ds.is_empty() {
        return Err(CliError::input(anyhow::anyhow!(
            "{} holds no documents",
            path.display()
        )));
    }
    Ok(ds)
}

/// Writes through a sibling temp file and a rename so readers never see a
/// half-written artifact.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::run(anyhow::anyhow!("creating {}: {e}", dir.display())))?;
    }
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::input(anyhow::anyhow!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", file_name.to_string_lossy(), std::process::id()));
    let result = fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(contents.as_bytes())?;
            f.sync_all()
        })
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::run(anyhow::anyhow!("writing {}: {e}", path.display())));
    }
    Ok(())
}

pub const DATASET_ENV: &str = "LUGANDA_MISINFO_DATASET";

/// Finds the labeled corpus: `$LUGANDA_MISINFO_DATASET` first, then
/// `data/luganda_misinfo.json` (canonical) and
/// `data/covid_facebook_twitter_Luganda.json` (released layout) under `root`.
pub fn locate_dataset(root: &Path) -> Option<(PathBuf, DatasetSchema)> {
    if let Some(p) = std::env::var_os(DATASET_ENV).map(PathBuf::from) {
        if p.is_file() {
            let schema = match load_dataset(&p, DatasetSchema::Canonical) {
                Ok(_) => DatasetSchema::Canonical,
                Err(_) => DatasetSchema::Released,
            };
            return Some((p, schema));
        }
    }
    [
        ("data/luganda_misinfo.json", DatasetSchema::Canonical),
        ("data/covid_facebook_twitter_Luganda.json", DatasetSchema::Released),
    ]
    .into_iter()
    .map(|(rel, schema)| (root.join(rel), schema))
    .find(|(p, _)| p.is_file())
}
