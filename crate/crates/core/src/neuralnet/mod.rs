//! Dense and 1-D convolutional binary classifiers trained by backpropagation
//! of the mean binary cross-entropy.

mod network;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use network::{Gradients, Layer, Network, Tensor, Trace};
pub use train::{train, TrainConfig, TrainOutcome};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("input of width {got} does not match network input {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("convolution needs at least {need} inputs, got {have}")]
    InputTooShort { have: usize, need: usize },
    #[error("invalid layer stack: {0}")]
    InvalidSpec(String),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("training labels contain a single class")]
    SingleClassInput,
    #[error("training diverged at epoch {0} (non-finite loss)")]
    Diverged(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LayerSpec {
    Dense {
        units: usize,
        activation: Activation,
    },
    /// Valid (unpadded) stride-1 convolution over a single input channel;
    /// output is laid out filter-major.
    Conv1d {
        filters: usize,
        kernel: usize,
        activation: Activation,
    },
    Flatten,
}

/// Two-layer perceptron: 16 ReLU hidden units and one sigmoid output.
pub fn mlp_spec(input_dim: usize) -> Result<Vec<LayerSpec>, NetError> {
    if input_dim == 0 {
        return Err(NetError::InvalidSpec("input dimension must be positive".into()));
    }
    Ok(vec![
        LayerSpec::Dense {
            units: 16,
            activation: Activation::Relu,
        },
        LayerSpec::Dense {
            units: 1,
            activation: Activation::Sigmoid,
        },
    ])
}

/// One convolution (64 filters of width 3) followed by dense layers of
/// 64, 32, 16 and 1 units.
pub fn cnn_spec(input_dim: usize) -> Result<Vec<LayerSpec>, NetError> {
    if input_dim < 3 {
        return Err(NetError::InputTooShort {
            have: input_dim,
            need: 3,
        });
    }
    let dense = |units, activation| LayerSpec::Dense { units, activation };
    Ok(vec![
        LayerSpec::Conv1d {
            filters: 64,
            kernel: 3,
            activation: Activation::Relu,
        },
        LayerSpec::Flatten,
        dense(64, Activation::Relu),
        dense(32, Activation::Relu),
        dense(16, Activation::Relu),
        dense(1, Activation::Sigmoid),
    ])
}

/// Output width of every layer, after validating the stack.
pub fn layer_widths(input_dim: usize, spec: &[LayerSpec]) -> Result<Vec<usize>, NetError> {
    match spec.last() {
        Some(LayerSpec::Dense {
            units: 1,
            activation: Activation::Sigmoid,
        }) => {}
        _ => {
            return Err(NetError::InvalidSpec(
                "the last layer must be Dense(1, sigmoid)".into(),
            ))
        }
    }
    let mut widths = Vec::with_capacity(spec.len());
    let mut width = input_dim;
    for (i, layer) in spec.iter().enumerate() {
        let last = i + 1 == spec.len();
        width = match *layer {
            LayerSpec::Dense { units, activation } => {
                if units == 0 {
                    return Err(NetError::InvalidSpec("dense layer with no units".into()));
                }
                if (activation == Activation::Sigmoid) != last {
                    return Err(NetError::InvalidSpec(
                        "sigmoid is only allowed on the output layer".into(),
                    ));
                }
                units
            }
            LayerSpec::Conv1d {
                filters,
                kernel,
                activation,
            } => {
                if i != 0 {
                    return Err(NetError::InvalidSpec("convolution must be the first layer".into()));
                }
                if activation == Activation::Sigmoid {
                    return Err(NetError::InvalidSpec("sigmoid is only allowed on the output layer".into()));
                }
                if filters == 0 || kernel == 0 {
                    return Err(NetError::InvalidSpec("empty convolution".into()));
                }
                if width < kernel {
                    return Err(NetError::InputTooShort {
                        have: width,
                        need: kernel,
                    });
                }
                filters * (width - kernel + 1)
            }
            LayerSpec::Flatten => width,
        };
        widths.push(width);
    }
    Ok(widths)
}
