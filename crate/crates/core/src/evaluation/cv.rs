use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{auc_roc, confusion, f_beta_counts, precision, recall, EvalError};
use crate::data_model::{bootstrap_balance, Dataset, Encoder, FoldPlan};
use crate::model::{fit_model, ModelConfig, ModelKind};
use crate::{seed, Scalar};

/// The four metrics of one fold; `None` where a metric was undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    pub f2: Option<f64>,
    pub auc: Option<f64>,
    pub n_test: usize,
}

/// Number of folds left out of each metric's mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ExcludedFolds {
    pub recall: usize,
    pub precision: usize,
    pub f2: usize,
    pub auc: usize,
}

/// Fold means of the four metrics. A fold whose training part could not be
/// fit appears in `skipped_folds` and nowhere else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    pub f2: Option<f64>,
    pub auc: Option<f64>,
    pub per_fold: Vec<FoldMetrics>,
    pub excluded_folds: ExcludedFolds,
    pub skipped_folds: usize,
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> (Option<f64>, usize) {
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut excluded = 0usize;
    for v in values {
        match v {
            Some(v) => {
                sum += v;
                count += 1;
            }
            None => excluded += 1,
        }
    }
    ((count > 0).then(|| sum / count as f64), excluded)
}

impl MetricSet {
    pub fn from_folds(per_fold: Vec<FoldMetrics>, skipped_folds: usize) -> Self {
        let (recall, r_ex) = mean(per_fold.iter().map(|f| f.recall));
        let (precision, p_ex) = mean(per_fold.iter().map(|f| f.precision));
        let (f2, f_ex) = mean(per_fold.iter().map(|f| f.f2));
        let (auc, a_ex) = mean(per_fold.iter().map(|f| f.auc));
        Self {
            recall,
            precision,
            f2,
            auc,
            per_fold,
            excluded_folds: ExcludedFolds {
                recall: r_ex,
                precision: p_ex,
                f2: f_ex,
                auc: a_ex,
            },
            skipped_folds,
        }
    }
}

/// What one fold trained and tested on, for leakage and balance audits.
/// Row numbers index the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldAudit {
    pub fold: usize,
    /// Balanced training multiset (originals, then minority re-draws).
    pub train_rows: Vec<usize>,
    /// Labeled test rows.
    pub test_rows: Vec<usize>,
    pub train_resistant: usize,
    pub train_susceptible: usize,
    /// Encoder the fold used, fit on its labeled training rows.
    pub encoder: Option<Encoder>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub metrics: MetricSet,
    pub audits: Vec<FoldAudit>,
}

/// Cross-validates one model kind on one family, in `f64`.
pub fn cross_validate(
    dataset: &Dataset,
    family: &str,
    kind: ModelKind,
    plan: &FoldPlan,
    config: &ModelConfig,
    seed: u64,
) -> Result<CvOutcome, EvalError> {
    cross_validate_as::<f64>(dataset, family, kind, plan, config, seed)
}

/// Cross-validates with the models computing in scalar type `T`.
///
/// Each fold drops rows unlabeled for `family`, fits the encoder on its
/// training rows, bootstrap-balances them, trains, and scores the untouched
/// test rows. Fold `f` draws its randomness from
/// `derive(seed, [family index, kind, f])`.
pub fn cross_validate_as<T: Scalar>(
    dataset: &Dataset,
    family: &str,
    kind: ModelKind,
    plan: &FoldPlan,
    config: &ModelConfig,
    seed: u64,
) -> Result<CvOutcome, EvalError> {
    let schema = dataset.schema();
    let t = schema
        .target_index(family)
        .ok_or_else(|| EvalError::UnknownFamily(family.to_string()))?;
    if plan.n != dataset.len() {
        return Err(EvalError::PlanMismatch {
            plan: plan.n,
            dataset: dataset.len(),
        });
    }
    let labels = dataset.labels(t);
    let resistant = labels.iter().flatten().filter(|l| l.is_resistant()).count();
    let susceptible = labels.iter().flatten().count() - resistant;
    if resistant < 2 || susceptible < 2 {
        return Err(EvalError::TooFewRecords {
            resistant,
            susceptible,
        });
    }

    let results: Vec<Result<(Option<FoldMetrics>, FoldAudit), EvalError>> = plan
        .folds
        .par_iter()
        .enumerate()
        .map(|(f, fold)| {
            let task = seed::derive(seed, &[t as u64, kind.ordinal(), f as u64]);
            let train: Vec<usize> = fold.train.iter().copied().filter(|&i| labels[i].is_some()).collect();
            let test: Vec<usize> = fold.test.iter().copied().filter(|&i| labels[i].is_some()).collect();
            let is_r = |i: &usize| labels[*i].is_some_and(|l| l.is_resistant());
            let mut audit = FoldAudit {
                fold: f,
                train_rows: Vec::new(),
                test_rows: test.clone(),
                train_resistant: 0,
                train_susceptible: 0,
                encoder: None,
                skipped: None,
            };
            let skip = |mut audit: FoldAudit, why: String| {
                log::warn!("{family}/{kind} fold {f} skipped: {why}");
                audit.skipped = Some(why);
                Ok((None, audit))
            };
            if test.is_empty() {
                return skip(audit, "no labeled test rows".into());
            }
            let train_labels: Vec<bool> = train.iter().map(is_r).collect();
            let balanced = match bootstrap_balance(&train, &train_labels, seed::derive(task, &[0])) {
                Ok(b) => b,
                Err(e) => return skip(audit, e.to_string()),
            };
            let mut in_test = vec![false; dataset.len()];
            for &i in &test {
                in_test[i] = true;
            }
            assert!(
                balanced.iter().all(|&i| !in_test[i]),
                "test row leaked into the training multiset"
            );
            let encoder = match Encoder::fit(dataset, &train) {
                Ok(e) => e,
                Err(e) => return skip(audit, e.to_string()),
            };
            let y: Vec<bool> = balanced.iter().map(is_r).collect();
            audit.train_resistant = y.iter().filter(|&&v| v).count();
            audit.train_susceptible = y.len() - audit.train_resistant;
            audit.train_rows = balanced.clone();

            let x = encoder.transform(dataset, &balanced).cast::<T>();
            let model = fit_model(kind, &x, &y, &encoder.provenance(), config, seed::derive(task, &[1]))?;
            let x_test = encoder.transform(dataset, &test).cast::<T>();
            let y_test: Vec<bool> = test.iter().map(is_r).collect();
            let scores: Vec<f64> = model
                .predict(&x_test)?
                .into_iter()
                .map(Scalar::to_f64_lossy)
                .collect();
            audit.encoder = Some(encoder);

            let c = confusion(&scores, &y_test, config.threshold)?;
            let metrics = FoldMetrics {
                fold: f,
                recall: recall(&c).ok(),
                precision: precision(&c).ok(),
                f2: f_beta_counts(&c, 2.0).ok(),
                auc: auc_roc(&scores, &y_test).ok(),
                n_test: test.len(),
            };
            Ok((Some(metrics), audit))
        })
        .collect();

    let mut per_fold = Vec::new();
    let mut audits = Vec::new();
    for r in results {
        let (m, a) = r?;
        per_fold.extend(m);
        audits.push(a);
    }
    let skipped = audits.len() - per_fold.len();
    if per_fold.is_empty() {
        return Err(EvalError::AllFoldsDegenerate(family.to_string()));
    }
    Ok(CvOutcome {
        metrics: MetricSet::from_folds(per_fold, skipped),
        audits,
    })
}
