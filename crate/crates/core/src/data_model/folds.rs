use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::DataError;
use crate::seed;

/// Cross-validation split strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldMode {
    KFold { k: usize },
    /// Repeated independent shuffles, each split `train_fraction` / rest.
    MonteCarlo { iterations: usize, train_fraction: f64 },
}

impl Default for FoldMode {
    fn default() -> Self {
        FoldMode::MonteCarlo {
            iterations: 10,
            train_fraction: 0.8,
        }
    }
}

impl fmt::Display for FoldMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FoldMode::KFold { k } => write!(f, "kfold:{k}"),
            FoldMode::MonteCarlo {
                iterations,
                train_fraction,
            } => write!(f, "mc:{iterations}:{train_fraction}"),
        }
    }
}

impl FromStr for FoldMode {
    type Err = DataError;

    /// Accepts `kfold:K` and `mc:ITERATIONS:FRACTION`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DataError::InvalidFoldMode(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["kfold", k] => {
                let k = k.parse().map_err(|_| bad())?;
                if k < 2 {
                    return Err(bad());
                }
                Ok(FoldMode::KFold { k })
            }
            ["mc", it, frac] => {
                let iterations = it.parse().map_err(|_| bad())?;
                let train_fraction: f64 = frac.parse().map_err(|_| bad())?;
                if iterations == 0 || !(train_fraction > 0.0 && train_fraction < 1.0) {
                    return Err(bad());
                }
                Ok(FoldMode::MonteCarlo {
                    iterations,
                    train_fraction,
                })
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub mode: FoldMode,
    pub seed: u64,
    pub n: usize,
    pub folds: Vec<Fold>,
}

/// Plans train/test splits over `0..n`. Deterministic in `(n, mode, seed)`.
///
/// K-fold shuffles once and cuts `k` test blocks whose sizes differ by at
/// most one; Monte-Carlo reshuffles per iteration and takes
/// `floor(n * train_fraction)` training indices. Index lists are sorted.
pub fn plan_folds(n: usize, mode: FoldMode, seed: u64) -> Result<FoldPlan, DataError> {
    let folds = match mode {
        FoldMode::KFold { k } => {
            if k < 2 {
                return Err(DataError::InvalidFoldMode(mode.to_string()));
            }
            if n < k {
                return Err(DataError::TooFewRecords { have: n, need: k });
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut seed::rng(seed::derive(seed, &[0])));
            let (base, extra) = (n / k, n % k);
            let mut start = 0;
            (0..k)
                .map(|f| {
                    let len = base + usize::from(f < extra);
                    let mut test = order[start..start + len].to_vec();
                    let mut train: Vec<usize> = order[..start]
                        .iter()
                        .chain(&order[start + len..])
                        .copied()
                        .collect();
                    start += len;
                    test.sort_unstable();
                    train.sort_unstable();
                    Fold { train, test }
                })
                .collect()
        }
        FoldMode::MonteCarlo {
            iterations,
            train_fraction,
        } => {
            if iterations == 0 || !(train_fraction > 0.0 && train_fraction < 1.0) {
                return Err(DataError::InvalidFoldMode(mode.to_string()));
            }
            // small epsilon so that e.g. 10 * 0.8 floors to 8 despite rounding
            let n_train = (n as f64 * train_fraction + 1e-9).floor() as usize;
            if n_train == 0 || n_train >= n {
                return Err(DataError::TooFewRecords {
                    have: n,
                    need: (1.0 / train_fraction.min(1.0 - train_fraction)).ceil() as usize,
                });
            }
            (0..iterations)
                .map(|it| {
                    let mut order: Vec<usize> = (0..n).collect();
                    order.shuffle(&mut seed::rng(seed::derive(seed, &[it as u64])));
                    let mut train = order[..n_train].to_vec();
                    let mut test = order[n_train..].to_vec();
                    train.sort_unstable();
                    test.sort_unstable();
                    Fold { train, test }
                })
                .collect()
        }
    };
    Ok(FoldPlan {
        mode,
        seed,
        n,
        folds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kfold_partitions_indices() {
        let plan = plan_folds(100, FoldMode::KFold { k: 10 }, 3).unwrap();
        assert_eq!(plan.folds.len(), 10);
        let mut all: Vec<usize> = plan.folds.iter().flat_map(|f| f.test.clone()).collect();
        assert!(plan.folds.iter().all(|f| f.test.len() == 10 && f.train.len() == 90));
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn monte_carlo_split_sizes() {
        let mode = FoldMode::MonteCarlo {
            iterations: 10,
            train_fraction: 0.8,
        };
        let plan = plan_folds(10, mode, 1).unwrap();
        assert_eq!(plan.folds.len(), 10);
        assert!(plan.folds.iter().all(|f| f.train.len() == 8 && f.test.len() == 2));
    }

    #[test]
    fn deterministic_per_seed() {
        let mode = FoldMode::default();
        assert_eq!(plan_folds(57, mode, 9).unwrap(), plan_folds(57, mode, 9).unwrap());
        assert_ne!(plan_folds(57, mode, 9).unwrap(), plan_folds(57, mode, 10).unwrap());
    }

    #[test]
    fn too_few_records() {
        assert!(matches!(
            plan_folds(9, FoldMode::KFold { k: 10 }, 0),
            Err(DataError::TooFewRecords { .. })
        ));
        let mode = FoldMode::MonteCarlo {
            iterations: 3,
            train_fraction: 0.8,
        };
        assert!(plan_folds(1, mode, 0).is_err());
    }

    #[test]
    fn parses_cli_syntax() {
        assert_eq!("kfold:10".parse::<FoldMode>().unwrap(), FoldMode::KFold { k: 10 });
        assert_eq!("mc:10:0.8".parse::<FoldMode>().unwrap(), FoldMode::default());
        assert!("mc:10:1.5".parse::<FoldMode>().is_err());
        assert!("loo".parse::<FoldMode>().is_err());
        let m = FoldMode::default();
        assert_eq!(m.to_string().parse::<FoldMode>().unwrap(), m);
    }

    proptest! {
        #[test]
        fn kfold_tests_are_disjoint_and_cover(n in 2usize..200, k in 2usize..12, seed in any::<u64>()) {
            prop_assume!(n >= k);
            let plan = plan_folds(n, FoldMode::KFold { k }, seed).unwrap();
            let mut seen = vec![0u32; n];
            for f in &plan.folds {
                for &i in &f.test { seen[i] += 1; }
                prop_assert!(f.train.iter().all(|i| f.test.binary_search(i).is_err()));
                prop_assert_eq!(f.train.len() + f.test.len(), n);
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
        }
    }
}
