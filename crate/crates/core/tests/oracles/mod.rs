//! Brute-force reference implementations, written independently of the
//! library code they check. Shared by the integration and acceptance tests.
#![allow(dead_code)]

use amr_core::matrix::Matrix;
use amr_core::neuralnet::Network;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// Pearson r from pairwise differences,
/// `Σ_{i<j} ΔxΔy / √(Σ_{i<j} Δx² · Σ_{i<j} Δy²)`; no means are formed.
pub fn pearson_pairwise(x: &[f64], y: &[f64]) -> f64 {
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let (dx, dy) = (x[i] - x[j], y[i] - y[j]);
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
    }
    sxy / (sxx * syy).sqrt()
}

/// Midrank of every element by counting: `1 + #less + (#equal − 1)/2`.
pub fn midranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&a| {
            let less = v.iter().filter(|&&b| b < a).count() as f64;
            let equal = v.iter().filter(|&&b| b == a).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

pub fn spearman_brute(x: &[f64], y: &[f64]) -> f64 {
    pearson_pairwise(&midranks(x), &midranks(y))
}

fn big(v: u64) -> BigInt {
    BigInt::from(v)
}

/// Pearson χ² in exact rational arithmetic,
/// `Σ (N·O − R·C)² / (N·R·C)` over cells with non-zero margins.
pub fn chi_square_exact(counts: &[Vec<u64>]) -> f64 {
    let rows: Vec<u64> = counts.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<u64> = (0..counts[0].len()).map(|j| counts.iter().map(|r| r[j]).sum()).collect();
    let n: u64 = rows.iter().sum();
    let mut chi = BigRational::zero();
    for (i, row) in counts.iter().enumerate() {
        for (j, &o) in row.iter().enumerate() {
            if rows[i] == 0 || cols[j] == 0 {
                continue;
            }
            let rc = big(rows[i]) * big(cols[j]);
            let d = big(n) * big(o) - rc.clone();
            chi += BigRational::new(d.clone() * d, big(n) * rc);
        }
    }
    chi.to_f64().unwrap()
}

/// Cramér's V from the exact χ², with `k` counted over non-empty rows and columns.
pub fn cramers_v_exact(counts: &[Vec<u64>]) -> f64 {
    let r = counts.iter().filter(|r| r.iter().any(|&c| c > 0)).count();
    let c = (0..counts[0].len()).filter(|&j| counts.iter().any(|r| r[j] > 0)).count();
    let n: u64 = counts.iter().flatten().sum();
    let k = r.min(c) as f64;
    (chi_square_exact(counts) / (n as f64 * (k - 1.0))).sqrt().min(1.0)
}

/// Area under the empirical ROC curve by an explicit threshold sweep from
/// the highest score down, integrating with the trapezoid rule.
pub fn auc_trapezoid(scores: &[f64], labels: &[bool]) -> f64 {
    let p = labels.iter().filter(|&&l| l).count() as f64;
    let n = labels.len() as f64 - p;
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();
    let (mut prev_tpr, mut prev_fpr, mut area) = (0.0, 0.0, 0.0);
    for t in thresholds {
        let tp = scores.iter().zip(labels).filter(|(&s, &l)| l && s >= t).count() as f64;
        let fp = scores.iter().zip(labels).filter(|(&s, &l)| !l && s >= t).count() as f64;
        let (tpr, fpr) = (tp / p, fp / n);
        area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        prev_tpr = tpr;
        prev_fpr = fpr;
    }
    area
}

/// Sign pattern of every hidden pre-activation over a batch.
/// Mean cross-entropy and hidden ReLU pattern, both read off one trace per row.
pub fn loss_and_pattern(net: &Network<f64>, x: &Matrix<f64>, y: &[bool]) -> (f64, Vec<bool>) {
    let mut pattern = Vec::new();
    let mut total = 0.0;
    for (r, &t) in x.iter_rows().zip(y) {
        let trace = net.trace(r).unwrap();
        let (logit, hidden) = trace.pre.split_last().unwrap();
        for layer in hidden {
            pattern.extend(layer.iter().map(|&z| z > 0.0));
        }
        let z = logit[0];
        // log(1 + e^z) − t·z, written to stay finite for large |z|
        total += z.max(0.0) - if t { z } else { 0.0 } + (-z.abs()).exp().ln_1p();
    }
    (total / y.len() as f64, pattern)
}

/// Central difference of the mean loss in parameter `k`. `None` when the
/// step changes the ReLU pattern `base` of the unperturbed network, where the
/// loss is not differentiable along the probe.
pub fn central_difference(net: &Network<f64>, x: &Matrix<f64>, y: &[bool], base: &[bool], k: usize, h: f64) -> Option<f64> {
    let theta = net.param(k);
    let mut probe = net.clone();
    probe.set_param(k, theta + h);
    let (up, up_pattern) = loss_and_pattern(&probe, x, y);
    probe.set_param(k, theta - h);
    let (down, down_pattern) = loss_and_pattern(&probe, x, y);
    (up_pattern == base && down_pattern == base).then(|| (up - down) / (2.0 * h))
}

/// `|a − b| / max(|a|, |b|)`, 0 when both vanish below `floor`.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < floor {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
