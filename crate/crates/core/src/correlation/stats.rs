use std::cmp::Ordering;

use super::StatsError;
use crate::Scalar;

fn check_pair<T>(x: &[T], y: &[T]) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(StatsError::TooFewSamples {
            have: x.len(),
            need: 3,
        });
    }
    Ok(())
}

fn is_constant<T: Scalar>(v: &[T]) -> bool {
    v.iter().all(|&a| a == v[0])
}

/// Pearson product-moment correlation, from the raw-sum formula
/// `(nΣxy − ΣxΣy) / √((nΣx² − (Σx)²)(nΣy² − (Σy)²))`, clamped to [−1, 1].
pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Result<T, StatsError> {
    check_pair(x, y)?;
    if is_constant(x) || is_constant(y) {
        return Err(StatsError::ZeroVariance);
    }
    let n = T::of_usize(x.len());
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) =
        (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        sx = sx + a;
        sy = sy + b;
        sxx = sxx + a * a;
        syy = syy + b * b;
        sxy = sxy + a * b;
    }
    let vx = n * sxx - sx * sx;
    let vy = n * syy - sy * sy;
    if vx <= T::zero() || vy <= T::zero() {
        return Err(StatsError::ZeroVariance);
    }
    let r = (n * sxy - sx * sy) / (vx * vy).sqrt();
    Ok(r.max(-T::one()).min(T::one()))
}

/// 1-based ranks, tied values sharing the mean of their positions.
pub fn ranks<T: Scalar>(v: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap_or(Ordering::Equal));
    let mut out = vec![T::zero(); v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && v[order[j]] == v[order[i]] {
            j += 1;
        }
        // positions i+1 ..= j share rank (i + 1 + j) / 2
        let rank = T::of_usize(i + 1 + j) / T::of(2.0);
        for &k in &order[i..j] {
            out[k] = rank;
        }
        i = j;
    }
    out
}

fn has_ties<T: Scalar>(v: &[T]) -> bool {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    s.windows(2).any(|w| w[0] == w[1])
}

/// `1 − 6Σd²/(n(n²−1))`; valid only when neither input has ties.
pub fn spearman_closed_form<T: Scalar>(x: &[T], y: &[T]) -> Result<T, StatsError> {
    check_pair(x, y)?;
    let (rx, ry) = (ranks(x), ranks(y));
    let d2: T = rx.iter().zip(&ry).map(|(&a, &b)| (a - b) * (a - b)).sum();
    let n = T::of_usize(x.len());
    Ok(T::one() - T::of(6.0) * d2 / (n * (n * n - T::one())))
}

/// Spearman rank correlation. Uses the closed form when there are no ties
/// and Pearson on midranks otherwise.
pub fn spearman<T: Scalar>(x: &[T], y: &[T]) -> Result<T, StatsError> {
    check_pair(x, y)?;
    if is_constant(x) || is_constant(y) {
        return Err(StatsError::ZeroVariance);
    }
    if has_ties(x) || has_ties(y) {
        pearson(&ranks(x), &ranks(y))
    } else {
        spearman_closed_form(x, y)
    }
}
