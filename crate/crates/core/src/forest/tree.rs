use std::cmp::Ordering;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::seed::Rng;
use crate::Scalar;

/// Binary decision tree node. Rows with `x[col] <= thr` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[serde(bound(deserialize = "T: Scalar"))]
pub enum TreeNode<T> {
    Leaf {
        /// Fraction of resistant samples reaching the leaf.
        p: T,
        n: usize,
    },
    Split {
        col: usize,
        thr: T,
        l: Box<TreeNode<T>>,
        r: Box<TreeNode<T>>,
    },
}

impl<T: Scalar> TreeNode<T> {
    /// Positive fraction of the leaf `row` lands in.
    pub fn leaf_value(&self, row: &[T]) -> T {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { p, .. } => return *p,
                TreeNode::Split { col, thr, l, r } => {
                    node = if row[*col] <= *thr { l } else { r };
                }
            }
        }
    }

    /// Class vote: resistant when the leaf fraction exceeds one half.
    pub fn vote(&self, row: &[T]) -> bool {
        self.leaf_value(row) > T::of(0.5)
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { l, r, .. } => 1 + l.depth().max(r.depth()),
        }
    }

    pub fn uses_column(&self, c: usize) -> bool {
        match self {
            TreeNode::Leaf { .. } => false,
            TreeNode::Split { col, l, r, .. } => *col == c || l.uses_column(c) || r.uses_column(c),
        }
    }

    /// Every column index used by a split.
    pub fn split_columns(&self, out: &mut Vec<usize>) {
        if let TreeNode::Split { col, l, r, .. } = self {
            out.push(*col);
            l.split_columns(out);
            r.split_columns(out);
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    pub mtry: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

/// Split quality as the exact fraction `num / den` of
/// `(aL² + bL²)/nL + (aR² + bR²)/nR`, with a/b the class counts on each side.
/// Larger means lower weighted Gini impurity.
#[derive(Clone, Copy)]
struct Score {
    num: u128,
    den: u128,
}

impl Score {
    fn new(left: (u64, u64), right: (u64, u64)) -> Self {
        let sq = |(a, b): (u64, u64)| (a as u128) * (a as u128) + (b as u128) * (b as u128);
        let nl = (left.0 + left.1) as u128;
        let nr = (right.0 + right.1) as u128;
        Self {
            num: sq(left) * nr + sq(right) * nl,
            den: nl * nr,
        }
    }

    fn cmp(&self, other: &Self) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

pub(crate) struct Split<T> {
    pub col: usize,
    pub thr: T,
    score: Score,
}

/// Best threshold on one column, or `None` if the column is constant on `samples`.
pub(crate) fn best_split_on_column<T: Scalar>(
    x: &Matrix<T>,
    y: &[bool],
    samples: &[usize],
    col: usize,
) -> Option<Split<T>> {
    let mut pairs: Vec<(T, bool)> = samples.iter().map(|&i| (x.get(i, col), y[i])).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let total_pos = pairs.iter().filter(|p| p.1).count() as u64;
    let total_neg = pairs.len() as u64 - total_pos;
    let (mut pos, mut neg) = (0u64, 0u64);
    let mut best: Option<Split<T>> = None;
    for w in 0..pairs.len() - 1 {
        if pairs[w].1 {
            pos += 1;
        } else {
            neg += 1;
        }
        let (lo, hi) = (pairs[w].0, pairs[w + 1].0);
        if lo == hi {
            continue;
        }
        let score = Score::new((pos, neg), (total_pos - pos, total_neg - neg));
        if best
            .as_ref()
            .is_none_or(|b| score.cmp(&b.score) == Ordering::Greater)
        {
            let mut thr = (lo + hi) / T::of(2.0);
            if thr >= hi {
                thr = lo;
            }
            best = Some(Split { col, thr, score });
        }
    }
    best
}

/// Grows a tree on `samples` (row indices into `x`, repeats allowed).
///
/// At each node `mtry` columns are drawn without replacement; if none of them
/// admits a split, further columns are drawn one at a time until one does or
/// all are exhausted. Among candidates the best weighted Gini wins, ties going
/// to the lowest column and then the lowest threshold.
pub fn grow<T: Scalar>(
    x: &Matrix<T>,
    y: &[bool],
    samples: &[usize],
    params: &TreeParams,
    rng: &mut Rng,
) -> TreeNode<T> {
    grow_node(x, y, samples.to_vec(), 0, params, rng)
}

fn grow_node<T: Scalar>(
    x: &Matrix<T>,
    y: &[bool],
    samples: Vec<usize>,
    depth: usize,
    params: &TreeParams,
    rng: &mut Rng,
) -> TreeNode<T> {
    let n = samples.len();
    let pos = samples.iter().filter(|&&i| y[i]).count();
    let leaf = TreeNode::Leaf {
        p: T::of_usize(pos) / T::of_usize(n),
        n,
    };
    if pos == 0
        || pos == n
        || n < params.min_samples_split.max(2)
        || params.max_depth.is_some_and(|d| depth >= d)
    {
        return leaf;
    }

    let mut order: Vec<usize> = (0..x.cols()).collect();
    order.shuffle(rng);
    let mut best = find_best(x, y, &samples, &order[..params.mtry.min(order.len())]);
    let mut next = params.mtry;
    while best.is_none() && next < order.len() {
        best = find_best(x, y, &samples, &order[next..next + 1]);
        next += 1;
    }
    let Some(split) = best else { return leaf };

    let (left, right): (Vec<usize>, Vec<usize>) = samples
        .into_iter()
        .partition(|&i| x.get(i, split.col) <= split.thr);
    TreeNode::Split {
        col: split.col,
        thr: split.thr,
        l: Box::new(grow_node(x, y, left, depth + 1, params, rng)),
        r: Box::new(grow_node(x, y, right, depth + 1, params, rng)),
    }
}

fn find_best<T: Scalar>(x: &Matrix<T>, y: &[bool], samples: &[usize], cols: &[usize]) -> Option<Split<T>> {
    let mut cols = cols.to_vec();
    cols.sort_unstable();
    let mut best: Option<Split<T>> = None;
    for c in cols {
        if let Some(s) = best_split_on_column(x, y, samples, c) {
            if best
                .as_ref()
                .is_none_or(|b| s.score.cmp(&b.score) == Ordering::Greater)
            {
                best = Some(s);
            }
        }
    }
    best
}

/// Best split over the given columns; exposed for oracle comparisons.
pub fn best_split<T: Scalar>(x: &Matrix<T>, y: &[bool], samples: &[usize], cols: &[usize]) -> Option<(usize, T)> {
    find_best(x, y, samples, cols).map(|s| (s.col, s.thr))
}
