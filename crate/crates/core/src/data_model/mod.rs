//! Cohort schema, ingestion, encoding, fold planning, class balancing and
//! synthetic cohorts.

mod balance;
mod cohort_csv;
mod encode;
mod folds;
mod schema;
mod synth;

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use balance::bootstrap_balance;
pub use cohort_csv::{emit_csv, parse_csv};
pub use encode::{encode, Column, ColumnRole, EncodedMatrix, Encoder, NumericRange};
pub use folds::{plan_folds, Fold, FoldMode, FoldPlan};
pub use schema::{FeatureDef, FeatureKind, FeatureSchema};
pub use synth::{builtin_marginals, synthesize, LabelRule, Marginal, Marginals};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("row {row}, column `{column}`: `{value}` is not a finite number")]
    BadNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}, column `{column}`: unknown level `{value}`")]
    UnknownLevel {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}, column `{column}`: label must be R, S or empty, got `{value}`")]
    BadLabel {
        row: usize,
        column: String,
        value: String,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("record {0} does not match the schema: {1}")]
    InvalidRecord(usize, String),
    #[error("encoder fit set is empty")]
    EmptyFitSet,
    #[error("numeric feature `{0}` has no values in the fit set")]
    NoNumericValues(String),
    #[error("too few records: have {have}, need at least {need}")]
    TooFewRecords { have: usize, need: usize },
    #[error("invalid fold mode: {0}")]
    InvalidFoldMode(String),
    #[error("training fold contains a single class")]
    SingleClassFold,
    #[error("probabilities for `{0}` must be non-negative and sum to 1")]
    BadProbabilities(String),
    #[error("invalid marginals: {0}")]
    InvalidMarginals(String),
    #[error("invalid label rule: {0}")]
    InvalidRule(String),
}

/// Antibiotic susceptibility outcome; Resistant is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "R")]
    Resistant,
    #[serde(rename = "S")]
    Susceptible,
}

impl Label {
    pub fn is_resistant(self) -> bool {
        self == Label::Resistant
    }

    pub fn from_bool(resistant: bool) -> Self {
        if resistant {
            Label::Resistant
        } else {
            Label::Susceptible
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Label::Resistant => "R",
            Label::Susceptible => "S",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// One feature value. Levels are stored as indices into the feature's level list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Number(f64),
    Level(usize),
    Missing,
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }
}

/// A patient row aligned with a schema: `values[i]` belongs to feature `i`,
/// `labels[j]` to target `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PatientRecord {
    pub values: Vec<Cell>,
    pub labels: Vec<Option<Label>>,
}

impl PatientRecord {
    pub fn validate(&self, schema: &FeatureSchema) -> Result<(), String> {
        if self.values.len() != schema.features().len() {
            return Err(format!(
                "{} values for {} features",
                self.values.len(),
                schema.features().len()
            ));
        }
        if self.labels.len() != schema.targets().len() {
            return Err(format!(
                "{} labels for {} targets",
                self.labels.len(),
                schema.targets().len()
            ));
        }
        for (cell, def) in self.values.iter().zip(schema.features()) {
            match (cell, &def.kind) {
                (Cell::Missing, _) => {}
                (Cell::Number(v), FeatureKind::Numeric) => {
                    if !v.is_finite() {
                        return Err(format!("`{}` is not finite", def.name));
                    }
                }
                (Cell::Level(i), kind) if !matches!(kind, FeatureKind::Numeric) => {
                    if *i >= kind.levels().len() {
                        return Err(format!("`{}` level index {i} out of range", def.name));
                    }
                }
                _ => return Err(format!("`{}` has a cell of the wrong kind", def.name)),
            }
        }
        Ok(())
    }
}

/// Raw feature input before validation (CSV text, JSON values).
#[derive(Debug, Clone, PartialEq)]
pub enum RawValue {
    Number(f64),
    Text(String),
    Missing,
}

impl FeatureSchema {
    /// Validates a raw value for feature `index`. Empty text is missing.
    pub fn parse_cell(&self, index: usize, raw: &RawValue) -> Result<Cell, CellError> {
        let def = &self.features()[index];
        match (raw, &def.kind) {
            (RawValue::Missing, _) => Ok(Cell::Missing),
            (RawValue::Text(t), _) if t.is_empty() => Ok(Cell::Missing),
            (RawValue::Number(v), FeatureKind::Numeric) if v.is_finite() => Ok(Cell::Number(*v)),
            (RawValue::Number(_), FeatureKind::Numeric) => Err(CellError::BadNumeric),
            (RawValue::Text(t), FeatureKind::Numeric) => match t.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Cell::Number(v)),
                _ => Err(CellError::BadNumeric),
            },
            (RawValue::Text(t), kind) => kind
                .level_index(t)
                .map(Cell::Level)
                .ok_or(CellError::UnknownLevel),
            (RawValue::Number(_), _) => Err(CellError::UnknownLevel),
        }
    }

    /// Text form of a cell, the inverse of [`FeatureSchema::parse_cell`] on text input.
    pub fn format_cell(&self, index: usize, cell: &Cell) -> String {
        match cell {
            Cell::Missing => String::new(),
            Cell::Number(v) => format!("{v}"),
            Cell::Level(i) => self.features()[index].kind.levels()[*i].clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellError {
    BadNumeric,
    UnknownLevel,
}

/// A validated cohort.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: FeatureSchema,
    records: Vec<PatientRecord>,
}

impl Dataset {
    pub fn new(schema: FeatureSchema, records: Vec<PatientRecord>) -> Result<Self, DataError> {
        for (i, r) in records.iter().enumerate() {
            r.validate(&schema).map_err(|e| DataError::InvalidRecord(i, e))?;
        }
        Ok(Self { schema, records })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn records(&self) -> &[PatientRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Labels of one family for every record.
    pub fn labels(&self, family: usize) -> Vec<Option<Label>> {
        self.records.iter().map(|r| r.labels[family]).collect()
    }

    /// Indices of records whose label for `family` is present.
    pub fn labeled_indices(&self, family: usize) -> Vec<usize> {
        self.records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.labels[family].is_some())
            .map(|(i, _)| i)
            .collect()
    }

    /// SHA-256 of the canonical CSV rendering, hex encoded.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(emit_csv(self).as_bytes());
        hex::encode(digest)
    }
}
