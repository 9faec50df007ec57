//! Association statistics between clinical features and resistance labels.

mod contingency;
mod permutation;
mod report;
mod stats;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data_model::FeatureKind;

pub use contingency::{chi_square, cramers_v, signed_phi, ContingencyTable};
pub use permutation::{permutation_p_value, statistic};
pub use report::{association_report, AssociationCell, AssociationReport, ReportOptions};
pub use stats::{pearson, ranks, spearman, spearman_closed_form};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {need} samples, got {have}")]
    TooFewSamples { have: usize, need: usize },
    #[error("a variable has zero variance")]
    ZeroVariance,
    #[error("contingency table needs at least 2 non-empty rows and columns")]
    DegenerateTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AssociationMethod {
    Pearson,
    Spearman,
    CramersV,
}

/// Picks the statistic for a pair of variable kinds.
///
/// Categorical on either side gives Cramér's V, then ordinal gives Spearman,
/// then numeric gives Pearson; two binary variables give Cramér's V. A
/// resistance label is a binary variable.
pub fn select_method(kind_x: &FeatureKind, kind_y: &FeatureKind) -> AssociationMethod {
    use FeatureKind::*;
    match (kind_x, kind_y) {
        (Categorical(_), _) | (_, Categorical(_)) => AssociationMethod::CramersV,
        (Ordinal(_), _) | (_, Ordinal(_)) => AssociationMethod::Spearman,
        (Numeric, _) | (_, Numeric) => AssociationMethod::Pearson,
        (Binary(_), Binary(_)) => AssociationMethod::CramersV,
    }
}
