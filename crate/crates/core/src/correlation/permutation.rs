use std::cmp::Ordering;

use rand::seq::SliceRandom;

use super::{cramers_v, pearson, spearman, AssociationMethod, ContingencyTable, StatsError};
use crate::{seed, Scalar};

fn codes<T: Scalar>(v: &[T]) -> (Vec<usize>, usize) {
    let mut distinct = v.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    distinct.dedup();
    let codes = v
        .iter()
        .map(|a| {
            distinct
                .binary_search_by(|d| d.partial_cmp(a).unwrap_or(Ordering::Equal))
                .expect("value present")
        })
        .collect();
    (codes, distinct.len())
}

/// Evaluates `method` on a pair. For Cramér's V each distinct value is a category.
pub fn statistic<T: Scalar>(method: AssociationMethod, x: &[T], y: &[T]) -> Result<T, StatsError> {
    match method {
        AssociationMethod::Pearson => pearson(x, y),
        AssociationMethod::Spearman => spearman(x, y),
        AssociationMethod::CramersV => {
            if x.len() != y.len() {
                return Err(StatsError::LengthMismatch(x.len(), y.len()));
            }
            let (cx, kx) = codes(x);
            let (cy, ky) = codes(y);
            Ok(cramers_v(&ContingencyTable::from_codes(&cx, &cy, kx, ky)?))
        }
    }
}

/// Permutation p-value `(1 + #{|stat(x, π y)| ≥ |stat(x, y)|}) / (1 + n_perm)`.
///
/// Two-sided for Pearson and Spearman; right-tailed for Cramér's V. The
/// permutations come from a single seeded stream that reshuffles `y` in place.
/// Ties with the observed statistic (up to a few ulps) count as extreme.
pub fn permutation_p_value<T: Scalar>(
    method: AssociationMethod,
    x: &[T],
    y: &[T],
    n_perm: usize,
    seed: u64,
) -> Result<T, StatsError> {
    let size = |s: T| match method {
        AssociationMethod::CramersV => s,
        _ => s.abs(),
    };
    let observed = size(statistic(method, x, y)?);
    let tolerance = T::epsilon() * T::of(64.0) * observed.abs().max(T::one());
    let mut rng = seed::rng(seed);
    let mut shuffled = y.to_vec();
    let mut extreme = 0usize;
    for _ in 0..n_perm {
        shuffled.shuffle(&mut rng);
        if size(statistic(method, x, &shuffled)?) >= observed - tolerance {
            extreme += 1;
        }
    }
    Ok(T::of_usize(1 + extreme) / T::of_usize(1 + n_perm))
}
