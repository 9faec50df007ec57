use serde::{Deserialize, Serialize};

use super::MetricSet;
use crate::data_model::FoldPlan;
use crate::model::ModelKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub family: String,
    pub model: ModelKind,
    #[serde(flatten)]
    pub metrics: MetricSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDescriptor {
    pub mode: String,
    pub seed: u64,
    pub n: usize,
}

impl From<&FoldPlan> for PlanDescriptor {
    fn from(plan: &FoldPlan) -> Self {
        Self {
            mode: plan.mode.to_string(),
            seed: plan.seed,
            n: plan.n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub master: u64,
    pub fold_plan: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub plan: PlanDescriptor,
    pub seeds: Seeds,
    pub dataset_fingerprint: String,
    /// Families left out because cross-validation could not run, with the reason.
    #[serde(default)]
    pub skipped: Vec<(String, String)>,
}

impl EvalReport {
    pub fn row(&self, family: &str, model: ModelKind) -> Option<&EvalRow> {
        self.rows.iter().find(|r| r.family == family && r.model == model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One line per (family, model) in the column order Recall, Precision,
    /// F-2 Score, AUC; undefined metrics are left empty.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(["family", "model", "Recall", "Precision", "F-2 Score", "AUC"])
            .expect("in-memory write");
        let cell = |v: Option<f64>| v.map(|v| format!("{v:.4}")).unwrap_or_default();
        for r in &self.rows {
            let m = &r.metrics;
            w.write_record([
                r.family.clone(),
                r.model.label().to_string(),
                cell(m.recall),
                cell(m.precision),
                cell(m.f2),
                cell(m.auc),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}
