use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use amr_core::data_model::DataError;
use amr_core::evaluation::EvalError;
use amr_core::forest::ForestError;
use amr_core::model::ModelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Data { path: PathBuf, source: DataError },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{}: bundle format_version {found} is not supported (expected {expected})", path.display())]
    BundleVersion { path: PathBuf, found: u64, expected: u32 },
    #[error("{}: invalid bundle: {reason}", path.display())]
    InvalidBundle { path: PathBuf, reason: String },
    #[error("bundle contains no random-forest model")]
    NoForestInBundle,
    #[error("{}: cohort does not match the one the bundle was trained on", path.display())]
    CohortMismatch { path: PathBuf },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dataset(#[from] DataError),
}

impl From<ForestError> for CliError {
    fn from(e: ForestError) -> Self {
        CliError::Model(e.into())
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `text`, creating parent directories as needed.
pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    fs::write(path, text).map_err(io_err)
}
