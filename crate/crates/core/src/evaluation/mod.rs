//! Confusion metrics, rank AUC and the cross-validation harness.

mod cv;
mod metrics;
mod report;

use thiserror::Error;

use crate::data_model::DataError;
use crate::model::ModelError;

pub use cv::{cross_validate, cross_validate_as, CvOutcome, ExcludedFolds, FoldAudit, FoldMetrics, MetricSet};
pub use metrics::{auc_roc, confusion, f_beta, f_beta_counts, precision, recall, ConfusionCounts};
pub use report::{EvalReport, EvalRow, PlanDescriptor, Seeds};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("scores and labels differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("no scored rows")]
    Empty,
    #[error("undefined metric: {0}")]
    UndefinedMetric(&'static str),
    #[error("labels contain a single class")]
    SingleClassLabels,
    #[error("`{0}` is not a target of the schema")]
    UnknownFamily(String),
    #[error("fold plan covers {plan} rows but the dataset has {dataset}")]
    PlanMismatch { plan: usize, dataset: usize },
    #[error("need at least 2 labeled records of each class, have {resistant} R and {susceptible} S")]
    TooFewRecords { resistant: usize, susceptible: usize },
    #[error("every fold of `{0}` was degenerate")]
    AllFoldsDegenerate(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] DataError),
}

