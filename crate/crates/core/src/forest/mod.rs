//! Random forest of bootstrapped Gini trees with majority voting and
//! out-of-bag permutation importance.

mod importance;
mod tree;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::{seed, Scalar};

pub use importance::{oob_importance, FeatureImportance};
pub use tree::{best_split, grow, TreeNode, TreeParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForestError {
    #[error("training labels contain a single class")]
    SingleClassInput,
    #[error("need at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("row has {got} columns, forest expects {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("invalid forest parameters: {0}")]
    InvalidParams(String),
    #[error("no tree has out-of-bag samples")]
    NoOobSamples,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Columns tried per split; `None` means `ceil(sqrt(p))`.
    pub mtry: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            mtry: None,
            max_depth: None,
            min_samples_split: 2,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn resolved_mtry(&self, p: usize) -> usize {
        self.mtry
            .unwrap_or_else(|| (p as f64).sqrt().ceil() as usize)
            .clamp(1, p.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct Forest<T> {
    pub trees: Vec<TreeNode<T>>,
    /// Bootstrap bag of each tree (sorted, with repeats), as training row indices.
    pub bags: Vec<Vec<usize>>,
    /// Training rows absent from each bag.
    pub oob: Vec<Vec<usize>>,
    pub params: ForestParams,
    /// Source feature of every encoded column.
    pub provenance: Vec<String>,
    pub n_cols: usize,
}

/// Trains a forest; tree `t` uses the sub-seed `derive(params.seed, [t])`.
pub fn train_forest<T: Scalar>(
    x: &Matrix<T>,
    y: &[bool],
    provenance: &[String],
    params: &ForestParams,
) -> Result<Forest<T>, ForestError> {
    let n = x.rows();
    assert_eq!(y.len(), n, "one label per row");
    if n < 2 {
        return Err(ForestError::TooFewRows(n));
    }
    if !(y.iter().any(|&v| v) && y.iter().any(|&v| !v)) {
        return Err(ForestError::SingleClassInput);
    }
    if params.n_trees == 0 {
        return Err(ForestError::InvalidParams("n_trees must be at least 1".into()));
    }
    if params.mtry.is_some_and(|m| m == 0 || m > x.cols()) {
        return Err(ForestError::InvalidParams(format!(
            "mtry must lie in 1..={}",
            x.cols()
        )));
    }
    if provenance.len() != x.cols() {
        return Err(ForestError::WidthMismatch {
            expected: x.cols(),
            got: provenance.len(),
        });
    }
    let tree_params = TreeParams {
        mtry: params.resolved_mtry(x.cols()),
        max_depth: params.max_depth,
        min_samples_split: params.min_samples_split,
    };
    let grown: Vec<(TreeNode<T>, Vec<usize>, Vec<usize>)> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng(seed::derive(params.seed, &[t as u64]));
            let mut bag: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            bag.sort_unstable();
            let mut in_bag = vec![false; n];
            for &i in &bag {
                in_bag[i] = true;
            }
            let oob = (0..n).filter(|&i| !in_bag[i]).collect();
            let tree = grow(x, y, &bag, &tree_params, &mut rng);
            (tree, bag, oob)
        })
        .collect();
    let mut forest = Forest {
        trees: Vec::with_capacity(grown.len()),
        bags: Vec::with_capacity(grown.len()),
        oob: Vec::with_capacity(grown.len()),
        params: params.clone(),
        provenance: provenance.to_vec(),
        n_cols: x.cols(),
    };
    for (tree, bag, oob) in grown {
        forest.trees.push(tree);
        forest.bags.push(bag);
        forest.oob.push(oob);
    }
    Ok(forest)
}

impl<T: Scalar> Forest<T> {
    /// Fraction of trees voting resistant.
    pub fn predict(&self, row: &[T]) -> Result<T, ForestError> {
        if row.len() != self.n_cols {
            return Err(ForestError::WidthMismatch {
                expected: self.n_cols,
                got: row.len(),
            });
        }
        let votes = self.trees.iter().filter(|t| t.vote(row)).count();
        Ok(T::of_usize(votes) / T::of_usize(self.trees.len()))
    }

    pub fn classify(&self, row: &[T]) -> Result<bool, ForestError> {
        Ok(self.predict(row)? >= T::of(0.5))
    }

    /// Accuracy of tree `t` on its own out-of-bag rows.
    pub fn oob_accuracy(&self, t: usize, x: &Matrix<T>, y: &[bool]) -> Option<T> {
        let oob = &self.oob[t];
        if oob.is_empty() {
            return None;
        }
        let correct = oob
            .iter()
            .filter(|&&i| self.trees[t].vote(x.row(i)) == y[i])
            .count();
        Some(T::of_usize(correct) / T::of_usize(oob.len()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov(p: usize) -> Vec<String> {
        (0..p).map(|i| format!("f{i}")).collect()
    }

    fn leaf(p: f64) -> TreeNode<f64> {
        TreeNode::Leaf { p, n: 1 }
    }

    #[test]
    fn majority_vote_fraction() {
        let forest = Forest {
            trees: vec![leaf(1.0), leaf(0.8), leaf(0.2)],
            bags: vec![vec![]; 3],
            oob: vec![vec![]; 3],
            params: ForestParams::default(),
            provenance: prov(1),
            n_cols: 1,
        };
        let p = forest.predict(&[0.0]).unwrap();
        assert!((p - 2.0 / 3.0).abs() < 1e-15);
        assert!(forest.classify(&[0.0]).unwrap());
        let none = Forest {
            trees: vec![leaf(0.0), leaf(0.5)],
            ..forest.clone()
        };
        assert_eq!(none.predict(&[0.0]).unwrap(), 0.0);
        assert_eq!(
            forest.predict(&[0.0, 1.0]),
            Err(ForestError::WidthMismatch { expected: 1, got: 2 })
        );
    }

    #[test]
    fn single_class_input_rejected() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]);
        assert_eq!(
            train_forest(&x, &[true, true], &prov(1), &ForestParams::default()),
            Err(ForestError::SingleClassInput)
        );
    }

    #[test]
    fn separable_data_is_fit() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i % 7) as f64 / 7.0, if i % 2 == 0 { 1.0 } else { 0.0 }])
            .collect();
        let y: Vec<bool> = (0..40).map(|i| i % 2 == 0).collect();
        let x = Matrix::from_rows(&rows);
        let params = ForestParams {
            n_trees: 25,
            seed: 3,
            ..Default::default()
        };
        let forest = train_forest(&x, &y, &prov(2), &params).unwrap();
        for i in 0..40 {
            assert_eq!(forest.classify(x.row(i)).unwrap(), y[i]);
        }
        let again = train_forest(&x, &y, &prov(2), &params).unwrap();
        assert_eq!(forest, again);
        for t in 0..forest.trees.len() {
            assert_eq!(forest.bags[t].len(), 40);
            let mut union: Vec<usize> = forest.bags[t].clone();
            union.extend(&forest.oob[t]);
            union.sort_unstable();
            union.dedup();
            assert_eq!(union, (0..40).collect::<Vec<_>>());
        }
    }

    #[test]
    fn single_tree_mtry_p_splits_on_separating_column() {
        let x = Matrix::from_rows(&[vec![0.0, 0.2], vec![0.0, 0.7], vec![1.0, 0.4], vec![1.0, 0.9], vec![1.0, 0.1]]);
        let y = [false, false, true, true, true];
        let params = ForestParams {
            n_trees: 1,
            mtry: Some(2),
            seed: 0,
            ..Default::default()
        };
        let forest = train_forest(&x, &y, &prov(2), &params).unwrap();
        match &forest.trees[0] {
            TreeNode::Split { col, l, r, .. } => {
                assert_eq!(*col, 0);
                assert!(matches!(**l, TreeNode::Leaf { p, .. } if p == 0.0));
                assert!(matches!(**r, TreeNode::Leaf { p, .. } if p == 1.0));
            }
            t => panic!("expected split, got {t:?}"),
        }
    }

    #[test]
    fn invalid_params() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]);
        let y = [true, false];
        let zero = ForestParams { n_trees: 0, ..Default::default() };
        assert!(matches!(train_forest(&x, &y, &prov(1), &zero), Err(ForestError::InvalidParams(_))));
        let wide = ForestParams { mtry: Some(2), ..Default::default() };
        assert!(matches!(train_forest(&x, &y, &prov(1), &wide), Err(ForestError::InvalidParams(_))));
    }
}
