use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::Scalar;

/// Confusion counts with Resistant as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Tallies predictions `score >= threshold` against the labels.
pub fn confusion<T: Scalar>(scores: &[T], labels: &[bool], threshold: T) -> Result<ConfusionCounts, EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch(scores.len(), labels.len()));
    }
    if scores.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut c = ConfusionCounts::default();
    for (&s, &y) in scores.iter().zip(labels) {
        match (s >= threshold, y) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

pub fn recall(c: &ConfusionCounts) -> Result<f64, EvalError> {
    if c.tp + c.fn_ == 0 {
        return Err(EvalError::UndefinedMetric("recall"));
    }
    Ok(c.tp as f64 / (c.tp + c.fn_) as f64)
}

pub fn precision(c: &ConfusionCounts) -> Result<f64, EvalError> {
    if c.tp + c.fp == 0 {
        return Err(EvalError::UndefinedMetric("precision"));
    }
    Ok(c.tp as f64 / (c.tp + c.fp) as f64)
}

/// `(1 + β²)·P·R / (β²·P + R)`; 0 when both P and R are 0.
pub fn f_beta<T: Scalar>(precision: T, recall: T, beta: T) -> Result<T, EvalError> {
    let unit = |v: T| v >= T::zero() && v <= T::one();
    if !(unit(precision) && unit(recall)) {
        return Err(EvalError::UndefinedMetric("f_beta inputs must lie in [0, 1]"));
    }
    if !(beta > T::zero() && beta.is_finite()) {
        return Err(EvalError::UndefinedMetric("beta must be positive"));
    }
    let b2 = beta * beta;
    let den = b2 * precision + recall;
    if den == T::zero() {
        return Ok(T::zero());
    }
    Ok((T::one() + b2) * precision * recall / den)
}

/// F-β from counts; undefined whenever precision or recall is.
pub fn f_beta_counts(c: &ConfusionCounts, beta: f64) -> Result<f64, EvalError> {
    f_beta(precision(c)?, recall(c)?, beta)
}

/// Area under the ROC curve by the Mann–Whitney rank statistic: the share
/// of (resistant, susceptible) pairs ranked correctly, ties counting half.
pub fn auc_roc<T: Scalar>(scores: &[T], labels: &[bool]) -> Result<f64, EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch(scores.len(), labels.len()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(EvalError::UndefinedMetric("scores contain NaN"));
    }
    let n_pos = labels.iter().filter(|&&l| l).count() as u64;
    let n_neg = labels.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::SingleClassLabels);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("no NaN"));
    // twice the midrank, so every quantity stays an exact integer
    let mut twice_rank_sum = 0u64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let twice_mid = (i + 1 + j + 1) as u64;
        let pos_in_group = order[i..=j].iter().filter(|&&k| labels[k]).count() as u64;
        twice_rank_sum += twice_mid * pos_in_group;
        i = j + 1;
    }
    let twice_u = twice_rank_sum - n_pos * (n_pos + 1);
    Ok(twice_u as f64 / (2 * n_pos * n_neg) as f64)
}
