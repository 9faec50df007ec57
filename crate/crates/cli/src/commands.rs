use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use amr_core::correlation::{association_report, AssociationReport, ReportOptions};
use amr_core::data_model::{
    bootstrap_balance, emit_csv, parse_csv, plan_folds, builtin_marginals, synthesize, Dataset, Encoder,
    FeatureSchema, FoldMode, LabelRule, Marginals,
};
use amr_core::evaluation::{cross_validate, EvalError, EvalReport, EvalRow, PlanDescriptor, Seeds};
use amr_core::forest::{oob_importance, FeatureImportance};
use amr_core::model::{fit_model, ModelConfig, ModelKind, TrainedModel};
use amr_core::seed;
use serde::{Deserialize, Serialize};

use crate::bundle::{FamilyModels, MetricSummary, TrainedModelBundle, TrainingMetadata, FORMAT_VERSION};
use crate::error::{read_text, write_text, CliError};

/// `gpc`, `gnb`, or a path to a schema JSON file.
pub fn load_schema(arg: &str) -> Result<FeatureSchema, CliError> {
    if let Some(s) = FeatureSchema::builtin(arg) {
        return Ok(s);
    }
    let path = Path::new(arg);
    FeatureSchema::from_json(&read_text(path)?).map_err(|source| CliError::Data {
        path: path.to_path_buf(),
        source,
    })
}

/// `gpc`, `gnb`, or a path to a marginals JSON file.
pub fn load_marginals(arg: &str) -> Result<Marginals, CliError> {
    if let Some(m) = builtin_marginals(arg) {
        return Ok(m);
    }
    let path = Path::new(arg);
    serde_json::from_str(&read_text(path)?).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_cohort(path: &Path, schema: &FeatureSchema) -> Result<Dataset, CliError> {
    parse_csv(&read_text(path)?, schema).map_err(|source| CliError::Data {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses `rf,mlp,cnn`; duplicates are dropped, order is kept.
pub fn parse_models(s: &str) -> Result<Vec<ModelKind>, String> {
    let mut kinds = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let k: ModelKind = part.parse()?;
        if !kinds.contains(&k) {
            kinds.push(k);
        }
    }
    if kinds.is_empty() {
        return Err("no model kinds given".into());
    }
    Ok(kinds)
}

/// Writes `associations.{json,csv,txt}` into `out`.
pub fn analyze(dataset: &Dataset, out: &Path, options: ReportOptions) -> Result<AssociationReport, CliError> {
    let report = association_report(dataset, options);
    write_text(&out.join("associations.json"), &report.to_json())?;
    write_text(&out.join("associations.csv"), &report.to_csv())?;
    write_text(&out.join("associations.txt"), &report.render_text())?;
    Ok(report)
}

/// Inputs of `amr train`.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub folds: FoldMode,
    pub models: Vec<ModelKind>,
    pub config: ModelConfig,
    pub seed: u64,
}

/// Cross-validates every (family, kind) pair, then refits each kind on the
/// whole balanced cohort for the bundle.
///
/// The fold plan is seeded with `derive(seed, [0])`, cross-validation with
/// `derive(seed, [1])`. The refit of family `t` balances with
/// `derive(seed, [t, u64::MAX])`, shared by every kind, and trains kind `k`
/// with `derive(seed, [t, k, u64::MAX])`. Families with fewer than two labeled
/// records of either class are skipped with a warning.
pub fn train_eval(dataset: &Dataset, run: &RunConfig) -> Result<(EvalReport, TrainedModelBundle), CliError> {
    if run.models.is_empty() {
        return Err(CliError::Usage("no model kinds requested".into()));
    }
    let schema = dataset.schema();
    let plan_seed = seed::derive(run.seed, &[0]);
    let cv_seed = seed::derive(run.seed, &[1]);
    let plan = plan_folds(dataset.len(), run.folds, plan_seed)?;
    let all: Vec<usize> = (0..dataset.len()).collect();
    let encoder = Encoder::fit(dataset, &all)?;
    let provenance = encoder.provenance();

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    let mut families = Vec::new();
    for (t, family) in schema.targets().iter().enumerate() {
        let labeled = dataset.labeled_indices(t);
        let y: Vec<bool> = labeled
            .iter()
            .map(|&i| dataset.records()[i].labels[t].expect("labeled").is_resistant())
            .collect();
        let resistant = y.iter().filter(|&&v| v).count();
        let susceptible = y.len() - resistant;
        if resistant < 2 || susceptible < 2 {
            let reason = format!("{resistant} resistant and {susceptible} susceptible labeled records");
            log::warn!("skipping {family}: {reason}");
            skipped.push((family.clone(), reason));
            continue;
        }

        let mut family_rows: Vec<EvalRow> = Vec::new();
        for &kind in &run.models {
            log::info!("cross-validating {family} / {kind}");
            match cross_validate(dataset, family, kind, &plan, &run.config, cv_seed) {
                Ok(outcome) => family_rows.push(EvalRow {
                    family: family.clone(),
                    model: kind,
                    metrics: outcome.metrics,
                }),
                Err(EvalError::AllFoldsDegenerate(_)) => {
                    log::warn!("skipping {family} / {kind}: every fold was degenerate");
                    skipped.push((format!("{family}/{kind}"), "every fold was degenerate".into()));
                }
                Err(e) => return Err(e.into()),
            }
        }
        if family_rows.is_empty() {
            continue;
        }

        let balanced = bootstrap_balance(&labeled, &y, seed::derive(run.seed, &[t as u64, u64::MAX]))?;
        let x = encoder.transform(dataset, &balanced);
        let yb: Vec<bool> = balanced
            .iter()
            .map(|&i| dataset.records()[i].labels[t].expect("labeled").is_resistant())
            .collect();
        let mut models: Vec<TrainedModel<f64>> = Vec::new();
        for r in &family_rows {
            log::info!("refitting {family} / {} on {} rows", r.model, balanced.len());
            let model_seed = seed::derive(run.seed, &[t as u64, r.model.ordinal(), u64::MAX]);
            models.push(fit_model(r.model, &x, &yb, &provenance, &run.config, model_seed)?);
        }
        families.push(FamilyModels {
            family: family.clone(),
            serving: best_auc(&family_rows),
            models,
            training_rows: balanced,
        });
        rows.extend(family_rows);
    }

    let report = EvalReport {
        rows,
        plan: PlanDescriptor::from(&plan),
        seeds: Seeds {
            master: run.seed,
            fold_plan: plan_seed,
        },
        dataset_fingerprint: dataset.fingerprint(),
        skipped,
    };
    let bundle = TrainedModelBundle {
        format_version: FORMAT_VERSION,
        schema: schema.clone(),
        encoder,
        families,
        metadata: TrainingMetadata {
            seed: run.seed,
            folds: run.folds.to_string(),
            models: run.models.clone(),
            config: run.config.clone(),
            cohort_fingerprint: report.dataset_fingerprint.clone(),
            n_records: dataset.len(),
            metrics: report.rows.iter().map(MetricSummary::from).collect(),
        },
    };
    Ok((report, bundle))
}

/// Highest mean AUC wins; ties and undefined AUCs fall back to rf, mlp, cnn order.
fn best_auc(rows: &[EvalRow]) -> ModelKind {
    let mut ordered: Vec<&EvalRow> = rows.iter().collect();
    ordered.sort_by_key(|r| r.model.ordinal());
    let mut best = ordered[0];
    for r in &ordered[1..] {
        if r.metrics.auc.unwrap_or(f64::NEG_INFINITY) > best.metrics.auc.unwrap_or(f64::NEG_INFINITY) {
            best = r;
        }
    }
    best.model
}

/// Writes `eval_report.{json,csv}` and `bundle.json` into `out`.
pub fn train(dataset: &Dataset, run: &RunConfig, out: &Path) -> Result<(EvalReport, TrainedModelBundle), CliError> {
    let (report, bundle) = train_eval(dataset, run)?;
    write_text(&out.join("eval_report.json"), &report.to_json())?;
    write_text(&out.join("eval_report.csv"), &report.to_csv())?;
    bundle.save(&out.join("bundle.json"))?;
    Ok((report, bundle))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyImportance {
    pub family: String,
    pub features: Vec<FeatureImportance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub seed: u64,
    pub repeats: usize,
    pub families: Vec<FamilyImportance>,
}

/// Out-of-bag importance of every bundled forest, keeping the `top` features.
/// `cohort` must be the dataset the bundle was trained on.
pub fn importance(
    bundle: &TrainedModelBundle,
    cohort: &Dataset,
    cohort_path: &Path,
    seed: u64,
    repeats: usize,
    top: usize,
) -> Result<ImportanceReport, CliError> {
    if !bundle.has_forest() {
        return Err(CliError::NoForestInBundle);
    }
    if cohort.fingerprint() != bundle.metadata.cohort_fingerprint {
        return Err(CliError::CohortMismatch {
            path: cohort_path.to_path_buf(),
        });
    }
    let mut families = Vec::new();
    for f in &bundle.families {
        let Some(TrainedModel::Rf { forest }) = f.model(ModelKind::Rf) else {
            continue;
        };
        let t = bundle.schema.target_index(&f.family).expect("validated family");
        let x = bundle.encoder.transform(cohort, &f.training_rows);
        let y: Vec<bool> = f
            .training_rows
            .iter()
            .map(|&i| cohort.records()[i].labels[t].is_some_and(|l| l.is_resistant()))
            .collect();
        let mut features = oob_importance(forest, &x, &y, seed, repeats)?;
        features.truncate(top);
        families.push(FamilyImportance {
            family: f.family.clone(),
            features,
        });
    }
    Ok(ImportanceReport { seed, repeats, families })
}

const BAR_WIDTH: usize = 40;

impl ImportanceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One block per family with bars scaled to the normalized importance.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        for f in &self.families {
            let _ = writeln!(s, "{}", f.family);
            let width = f.features.iter().map(|i| i.feature.chars().count()).max().unwrap_or(0);
            for i in &f.features {
                let bar = (i.normalized.max(0.0) * BAR_WIDTH as f64).round() as usize;
                let _ = writeln!(
                    s,
                    "  {:<width$}  {:<BAR_WIDTH$}  {:.4} ({:.2})",
                    i.feature,
                    "#".repeat(bar),
                    i.importance,
                    i.normalized
                );
            }
            s.push('\n');
        }
        s
    }

    pub fn write(&self, out: &Path) -> Result<(), CliError> {
        write_text(&out.join("importance.json"), &self.to_json())?;
        write_text(&out.join("importance.txt"), &self.render_text())
    }
}

/// Inputs of `amr synth`.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub schema: FeatureSchema,
    pub marginals: Marginals,
    pub rule: LabelRule,
    pub n: usize,
    pub seed: u64,
    pub out: PathBuf,
}

/// Writes a synthetic cohort CSV to `config.out`.
pub fn synth(config: &SynthConfig) -> Result<Dataset, CliError> {
    let dataset = synthesize(&config.schema, &config.marginals, &config.rule, config.n, config.seed)?;
    write_text(&config.out, &emit_csv(&dataset))?;
    Ok(dataset)
}
