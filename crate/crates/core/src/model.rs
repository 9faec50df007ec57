//! The three classifier kinds behind one fit/predict interface.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forest::{train_forest, Forest, ForestError, ForestParams};
use crate::matrix::Matrix;
use crate::neuralnet::{cnn_spec, mlp_spec, train, NetError, Network, TrainConfig};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Rf,
    Mlp,
    Cnn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Rf, ModelKind::Mlp, ModelKind::Cnn];

    pub fn ordinal(self) -> u64 {
        self as u64
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Rf => "rf",
            ModelKind::Mlp => "mlp",
            ModelKind::Cnn => "cnn",
        }
    }

    /// Table-style label: RF, MLP, CNN.
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Rf => "RF",
            ModelKind::Mlp => "MLP",
            ModelKind::Cnn => "CNN",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rf" => Ok(ModelKind::Rf),
            "mlp" => Ok(ModelKind::Mlp),
            "cnn" => Ok(ModelKind::Cnn),
            other => Err(format!("unknown model kind `{other}` (expected rf, mlp or cnn)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Hyper-parameters for every kind. The seeds inside are overwritten by
/// [`fit_model`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub forest: ForestParams,
    pub network: TrainConfig,
    /// Scores at or above this are classed resistant when computing
    /// confusion metrics.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_threshold() -> f64 {
    0.5
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            forest: ForestParams::default(),
            network: TrainConfig::default(),
            threshold: default_threshold(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
#[serde(bound(deserialize = "T: Scalar"))]
pub enum TrainedModel<T> {
    Rf { forest: Forest<T> },
    Mlp { network: Network<T>, config: TrainConfig },
    Cnn { network: Network<T>, config: TrainConfig },
}

impl<T: Scalar> TrainedModel<T> {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Rf { .. } => ModelKind::Rf,
            TrainedModel::Mlp { .. } => ModelKind::Mlp,
            TrainedModel::Cnn { .. } => ModelKind::Cnn,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            TrainedModel::Rf { forest } => forest.n_cols,
            TrainedModel::Mlp { network, .. } | TrainedModel::Cnn { network, .. } => network.input_dim(),
        }
    }

    /// Probability of resistance for one encoded row. For the forest this is
    /// the fraction of trees voting resistant.
    pub fn predict_row(&self, row: &[T]) -> Result<T, ModelError> {
        Ok(match self {
            TrainedModel::Rf { forest } => forest.predict(row)?,
            TrainedModel::Mlp { network, .. } | TrainedModel::Cnn { network, .. } => network.forward(row)?,
        })
    }

    pub fn predict(&self, x: &Matrix<T>) -> Result<Vec<T>, ModelError> {
        match self {
            TrainedModel::Rf { forest } => x.iter_rows().map(|r| Ok(forest.predict(r)?)).collect(),
            TrainedModel::Mlp { network, .. } | TrainedModel::Cnn { network, .. } => Ok(network.predict(x)?),
        }
    }

    /// Structural checks after deserialization.
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            TrainedModel::Rf { forest } => {
                if forest.trees.is_empty() || forest.provenance.len() != forest.n_cols {
                    return Err(ForestError::InvalidParams("empty forest or bad provenance".into()).into());
                }
                Ok(())
            }
            TrainedModel::Mlp { network, .. } | TrainedModel::Cnn { network, .. } => Ok(network.validate()?),
        }
    }
}

/// Trains one model of `kind` with every random choice driven by `seed`.
pub fn fit_model<T: Scalar>(
    kind: ModelKind,
    x: &Matrix<T>,
    y: &[bool],
    provenance: &[String],
    config: &ModelConfig,
    seed: u64,
) -> Result<TrainedModel<T>, ModelError> {
    Ok(match kind {
        ModelKind::Rf => {
            let params = ForestParams {
                seed,
                ..config.forest.clone()
            };
            TrainedModel::Rf {
                forest: train_forest(x, y, provenance, &params)?,
            }
        }
        ModelKind::Mlp | ModelKind::Cnn => {
            let train_config = TrainConfig {
                seed,
                ..config.network.clone()
            };
            let spec = if kind == ModelKind::Mlp {
                mlp_spec(x.cols())?
            } else {
                cnn_spec(x.cols())?
            };
            let network = train(&spec, x, y, &train_config)?.network;
            if kind == ModelKind::Mlp {
                TrainedModel::Mlp {
                    network,
                    config: train_config,
                }
            } else {
                TrainedModel::Cnn {
                    network,
                    config: train_config,
                }
            }
        }
    })
}
