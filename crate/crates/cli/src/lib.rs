//! Pipeline commands and the prediction service behind the `amr` binary.

pub mod bundle;
pub mod commands;
pub mod error;
pub mod service;

pub use bundle::{FamilyModels, MetricSummary, TrainedModelBundle, TrainingMetadata, FORMAT_VERSION};
pub use commands::{RunConfig, SynthConfig};
pub use error::CliError;
