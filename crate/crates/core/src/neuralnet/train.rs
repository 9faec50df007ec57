use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{LayerSpec, NetError, Network};
use crate::matrix::Matrix;
use crate::{seed, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    /// Clamped to the number of training rows.
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            momentum: 0.9,
            epochs: 300,
            batch_size: 16,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NetError> {
        // A zero learning rate is accepted: it leaves the initialization untouched.
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(NetError::InvalidConfig("learning_rate must be finite and >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(NetError::InvalidConfig("momentum must lie in [0, 1)".into()));
        }
        if self.epochs == 0 {
            return Err(NetError::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(NetError::InvalidConfig("batch_size must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome<T> {
    pub network: Network<T>,
    /// Mean mini-batch loss of every epoch, measured before each update.
    pub losses: Vec<f64>,
}

/// Mini-batch SGD with classical momentum on the mean binary cross-entropy.
///
/// Initial weights come from `derive(seed, [0])` and the per-epoch batch
/// shuffles from one stream seeded with `derive(seed, [1])`. Updates are
/// sequential, so the result is bit-reproducible.
pub fn train<T: Scalar>(
    spec: &[LayerSpec],
    x: &Matrix<T>,
    y: &[bool],
    config: &TrainConfig,
) -> Result<TrainOutcome<T>, NetError> {
    config.validate()?;
    assert_eq!(x.rows(), y.len(), "one label per row");
    if !(y.iter().any(|&v| v) && y.iter().any(|&v| !v)) {
        return Err(NetError::SingleClassInput);
    }
    if x.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(NetError::InvalidConfig("training matrix has non-finite entries".into()));
    }
    let n = x.rows();
    let batch = config.batch_size.min(n);
    if batch < config.batch_size {
        log::debug!("batch size {} clamped to {n} rows", config.batch_size);
    }

    let init = Network::glorot(x.cols(), spec, &mut seed::rng(seed::derive(config.seed, &[0])))?;
    let mut net = init.compile();
    let mut shuffle_rng = seed::rng(seed::derive(config.seed, &[1]));
    let mut ws = net.workspace();
    let mut grads = net.zero_gradients();
    let mut velocity = net.zero_gradients();
    let lr = T::of(config.learning_rate);
    let mu = T::of(config.momentum);
    let mut order: Vec<usize> = (0..n).collect();
    let mut losses = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        for rows in order.chunks(batch) {
            let loss = net.accumulate(x, y, rows, &mut ws, &mut grads)?;
            total += loss.to_f64_lossy() * rows.len() as f64;
            let params = net.layers.iter_mut().flat_map(|l| [&mut l.w, &mut l.b]);
            let vs = velocity.w.iter_mut().zip(velocity.b.iter_mut()).flat_map(|(w, b)| [w, b]);
            let gs = grads.w.iter().zip(&grads.b).flat_map(|(w, b)| [w, b]);
            for ((p, v), g) in params.zip(vs).zip(gs) {
                for ((p, v), g) in p.iter_mut().zip(v.iter_mut()).zip(g) {
                    *v = mu * *v - lr * *g;
                    *p = *p + *v;
                }
            }
        }
        let mean = total / n as f64;
        if !mean.is_finite() {
            return Err(NetError::Diverged(epoch));
        }
        log::trace!("epoch {epoch}: loss {mean:.6}");
        losses.push(mean);
    }
    let net = net.to_network();
    if net.validate().is_err() {
        return Err(NetError::Diverged(config.epochs));
    }
    Ok(TrainOutcome { network: net, losses })
}
