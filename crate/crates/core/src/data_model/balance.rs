use rand::Rng;

use super::DataError;
use crate::seed;

/// Bootstrap up-sampling of the minority class.
///
/// `labels[i]` is the class of `train_indices[i]` (`true` = resistant). The
/// result holds every training index once, followed by minority indices drawn
/// uniformly with replacement until both classes have the same count. Only
/// indices from `train_indices` are ever emitted.
pub fn bootstrap_balance(
    train_indices: &[usize],
    labels: &[bool],
    seed: u64,
) -> Result<Vec<usize>, DataError> {
    assert_eq!(train_indices.len(), labels.len(), "one label per index");
    let positives: Vec<usize> = train_indices
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l)
        .map(|(&i, _)| i)
        .collect();
    let negatives: Vec<usize> = train_indices
        .iter()
        .zip(labels)
        .filter(|(_, &l)| !l)
        .map(|(&i, _)| i)
        .collect();
    if positives.is_empty() || negatives.is_empty() {
        return Err(DataError::SingleClassFold);
    }
    let (minority, deficit) = if positives.len() < negatives.len() {
        (&positives, negatives.len() - positives.len())
    } else {
        (&negatives, positives.len() - negatives.len())
    };
    let mut rng = seed::rng(seed);
    let mut out = train_indices.to_vec();
    out.reserve(deficit);
    out.extend((0..deficit).map(|_| minority[rng.random_range(0..minority.len())]));
    Ok(out)
}
