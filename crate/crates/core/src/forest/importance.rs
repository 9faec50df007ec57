use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Forest, ForestError};
use crate::matrix::Matrix;
use crate::{seed, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: String,
    pub importance: f64,
    /// `importance / max importance`, or 0 when no feature has positive importance.
    pub normalized: f64,
}

/// Out-of-bag permutation importance per source feature.
///
/// For each tree with out-of-bag rows, all encoded columns of a feature are
/// permuted jointly among those rows and the drop in the tree's out-of-bag
/// accuracy is recorded. The importance is the mean drop over trees and
/// `n_repeats` permutations. `x` and `y` must be the training data the forest
/// was fit on. The result is sorted by decreasing importance.
pub fn oob_importance<T: Scalar>(
    forest: &Forest<T>,
    x: &Matrix<T>,
    y: &[bool],
    seed: u64,
    n_repeats: usize,
) -> Result<Vec<FeatureImportance>, ForestError> {
    if x.cols() != forest.n_cols {
        return Err(ForestError::WidthMismatch {
            expected: forest.n_cols,
            got: x.cols(),
        });
    }
    let mut features: Vec<String> = Vec::new();
    for f in &forest.provenance {
        if !features.contains(f) {
            features.push(f.clone());
        }
    }
    let groups: Vec<Vec<usize>> = features
        .iter()
        .map(|f| {
            forest
                .provenance
                .iter()
                .enumerate()
                .filter(|(_, p)| *p == f)
                .map(|(c, _)| c)
                .collect()
        })
        .collect();

    let mut ever_oob = vec![false; x.rows()];
    for oob in &forest.oob {
        for &i in oob {
            ever_oob[i] = true;
        }
    }
    let never = ever_oob.iter().filter(|&&b| !b).count();
    if never > 0 {
        log::warn!("{never} training rows are in every bag and never scored out-of-bag");
    }

    let repeats = n_repeats.max(1);
    let mut totals = vec![0.0f64; features.len()];
    let mut scored_trees = 0usize;
    let mut row = vec![T::zero(); x.cols()];
    for (t, tree) in forest.trees.iter().enumerate() {
        let oob = &forest.oob[t];
        let Some(base) = forest.oob_accuracy(t, x, y) else {
            continue;
        };
        scored_trees += 1;
        for (g, cols) in groups.iter().enumerate() {
            let mut drop = 0.0;
            for r in 0..repeats {
                let mut rng = seed::rng(seed::derive(seed, &[t as u64, g as u64, r as u64]));
                let mut donors = oob.clone();
                donors.shuffle(&mut rng);
                let mut correct = 0usize;
                for (&i, &d) in oob.iter().zip(&donors) {
                    row.copy_from_slice(x.row(i));
                    for &c in cols {
                        row[c] = x.get(d, c);
                    }
                    if tree.vote(&row) == y[i] {
                        correct += 1;
                    }
                }
                let permuted = correct as f64 / oob.len() as f64;
                drop += base.to_f64_lossy() - permuted;
            }
            totals[g] += drop / repeats as f64;
        }
    }
    if scored_trees == 0 {
        return Err(ForestError::NoOobSamples);
    }

    let mut out: Vec<FeatureImportance> = features
        .into_iter()
        .zip(totals)
        .map(|(feature, total)| FeatureImportance {
            feature,
            importance: total / scored_trees as f64,
            normalized: 0.0,
        })
        .collect();
    let max = out.iter().map(|f| f.importance).fold(f64::NEG_INFINITY, f64::max);
    if max > 0.0 {
        for f in &mut out {
            f.normalized = f.importance / max;
        }
    }
    out.sort_by(|a, b| b.importance.total_cmp(&a.importance));
    Ok(out)
}
