use std::path::Path;

use amr_core::data_model::{Encoder, FeatureKind, FeatureSchema, PatientRecord};
use amr_core::evaluation::EvalRow;
use amr_core::model::{ModelConfig, ModelKind, ModelError, TrainedModel};
use serde::{Deserialize, Serialize};

use crate::error::{read_text, write_text, CliError};

pub const FORMAT_VERSION: u32 = 1;

/// Everything needed to serve predictions, as written by `amr train`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModelBundle {
    pub format_version: u32,
    pub schema: FeatureSchema,
    /// Fit on every cohort record.
    pub encoder: Encoder,
    pub families: Vec<FamilyModels>,
    pub metadata: TrainingMetadata,
}

/// Models refit on the whole balanced cohort for one family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyModels {
    pub family: String,
    /// Kind answering requests that do not name one: the best mean CV AUC.
    pub serving: ModelKind,
    pub models: Vec<TrainedModel<f64>>,
    /// Balanced multiset of cohort rows the models were fit on.
    pub training_rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub seed: u64,
    pub folds: String,
    pub models: Vec<ModelKind>,
    pub config: ModelConfig,
    pub cohort_fingerprint: String,
    pub n_records: usize,
    pub metrics: Vec<MetricSummary>,
}

/// Cross-validated means of one (family, model) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub family: String,
    pub model: ModelKind,
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    pub f2: Option<f64>,
    pub auc: Option<f64>,
    pub folds_used: usize,
    pub skipped_folds: usize,
}

impl From<&EvalRow> for MetricSummary {
    fn from(r: &EvalRow) -> Self {
        Self {
            family: r.family.clone(),
            model: r.model,
            recall: r.metrics.recall,
            precision: r.metrics.precision,
            f2: r.metrics.f2,
            auc: r.metrics.auc,
            folds_used: r.metrics.per_fold.len(),
            skipped_folds: r.metrics.skipped_folds,
        }
    }
}

impl FamilyModels {
    pub fn model(&self, kind: ModelKind) -> Option<&TrainedModel<f64>> {
        self.models.iter().find(|m| m.kind() == kind)
    }

    pub fn serving_model(&self) -> &TrainedModel<f64> {
        self.model(self.serving).expect("validated bundle has its serving model")
    }
}

impl TrainedModelBundle {
    pub fn family(&self, name: &str) -> Option<&FamilyModels> {
        self.families.iter().find(|f| f.family == name)
    }

    pub fn threshold(&self) -> f64 {
        self.metadata.config.threshold
    }

    pub fn has_forest(&self) -> bool {
        self.families.iter().any(|f| f.model(ModelKind::Rf).is_some())
    }

    pub fn encode(&self, record: &PatientRecord) -> Vec<f64> {
        self.encoder.encode_record(&self.schema, record)
    }

    /// Probability of resistance for one family, from `kind` or the serving model.
    pub fn predict(
        &self,
        family: &FamilyModels,
        kind: Option<ModelKind>,
        row: &[f64],
    ) -> Option<Result<(ModelKind, f64), ModelError>> {
        let model = match kind {
            Some(k) => family.model(k)?,
            None => family.serving_model(),
        };
        Some(model.predict_row(row).map(|p| (model.kind(), p)))
    }

    /// Compact JSON: indenting the nested trees would multiply the size.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("bundle serializes")
    }

    /// Parses and validates. Deep trees nest past serde_json's default
    /// recursion limit, so the limit is lifted.
    pub fn from_json(text: &str) -> Result<Self, BundleError> {
        let header: serde_json::Value = {
            let mut de = serde_json::Deserializer::from_str(text);
            de.disable_recursion_limit();
            serde::Deserialize::deserialize(&mut de).map_err(BundleError::Json)?
        };
        let version = header.get("format_version").and_then(|v| v.as_u64());
        match version {
            Some(v) if v == u64::from(FORMAT_VERSION) => {}
            Some(v) => return Err(BundleError::Version(v)),
            None => return Err(BundleError::Invalid("format_version missing".into())),
        }
        let bundle: Self = serde_json::from_value(header).map_err(BundleError::Json)?;
        bundle.validate().map_err(BundleError::Invalid)?;
        Ok(bundle)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read_text(path)?;
        Self::from_json(&text).map_err(|e| match e {
            BundleError::Json(source) => CliError::Json {
                path: path.to_path_buf(),
                source,
            },
            BundleError::Version(found) => CliError::BundleVersion {
                path: path.to_path_buf(),
                found,
                expected: FORMAT_VERSION,
            },
            BundleError::Invalid(reason) => CliError::InvalidBundle {
                path: path.to_path_buf(),
                reason,
            },
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        write_text(path, &self.to_json())
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.format_version != FORMAT_VERSION {
            return Err(format!("format_version {}", self.format_version));
        }
        let features = self.schema.features();
        if self.encoder.ranges().len() != features.len() || self.encoder.width() != self.schema.encoded_width() {
            return Err("encoder does not match the schema".into());
        }
        for (def, range) in features.iter().zip(self.encoder.ranges()) {
            let numeric = matches!(def.kind, FeatureKind::Numeric);
            match range {
                Some(r) if numeric && r.min.is_finite() && r.max.is_finite() && r.min <= r.max => {}
                None if !numeric => {}
                _ => return Err(format!("encoder range for `{}` is invalid", def.name)),
            }
        }
        let mut seen = Vec::new();
        for f in &self.families {
            if self.schema.target_index(&f.family).is_none() {
                return Err(format!("`{}` is not a schema target", f.family));
            }
            if seen.contains(&&f.family) {
                return Err(format!("`{}` appears twice", f.family));
            }
            seen.push(&f.family);
            if f.model(f.serving).is_none() {
                return Err(format!("`{}` lacks its serving model {}", f.family, f.serving));
            }
            for (i, m) in f.models.iter().enumerate() {
                if f.models[..i].iter().any(|o| o.kind() == m.kind()) {
                    return Err(format!("`{}` has two {} models", f.family, m.kind()));
                }
                if m.input_dim() != self.encoder.width() {
                    return Err(format!("`{}` {} model expects {} inputs", f.family, m.kind(), m.input_dim()));
                }
                m.validate().map_err(|e| format!("`{}` {}: {e}", f.family, m.kind()))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug)]
pub enum BundleError {
    Json(serde_json::Error),
    Version(u64),
    Invalid(String),
}
