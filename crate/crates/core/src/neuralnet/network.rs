use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{layer_widths, Activation, LayerSpec, NetError};
use crate::matrix::Matrix;
use crate::seed::Rng;
use crate::Scalar;

/// Flat row-major array tagged with its shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct Tensor<T> {
    pub shape: Vec<usize>,
    pub data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Self {
            shape,
            data: vec![T::zero(); len],
        }
    }

    fn empty() -> Self {
        Self {
            shape: vec![0],
            data: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct Layer<T> {
    pub spec: LayerSpec,
    /// Dense: `units × input width`; Conv1d: `filters × kernel`; Flatten: empty.
    pub weights: Tensor<T>,
    pub bias: Tensor<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct Network<T> {
    input_dim: usize,
    layers: Vec<Layer<T>>,
}

/// Gradient of the mean loss, shaped like the network's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub weights: Vec<Tensor<T>>,
    pub bias: Vec<Tensor<T>>,
}

/// Pre-activation values of every layer for one input row.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace<T> {
    pub pre: Vec<Vec<T>>,
    pub output: T,
}

fn param_shapes(spec: &LayerSpec, in_width: usize) -> (Vec<usize>, Vec<usize>) {
    match *spec {
        LayerSpec::Dense { units, .. } => (vec![units, in_width], vec![units]),
        LayerSpec::Conv1d { filters, kernel, .. } => (vec![filters, kernel], vec![filters]),
        LayerSpec::Flatten => (vec![0], vec![0]),
    }
}

/// Logistic function, kept strictly inside (0, 1).
pub(crate) fn sigmoid<T: Scalar>(z: T) -> T {
    let limit = T::of(500.0);
    let z = z.max(-limit).min(limit);
    let s = if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    };
    s.max(T::min_positive_value()).min(T::one() - T::epsilon())
}

/// Binary cross-entropy of `sigmoid(z)` against `y`, evaluated as
/// `max(z, 0) - z·y + ln(1 + e^-|z|)` so it never takes `log(0)`.
pub(crate) fn bce_from_logit<T: Scalar>(z: T, y: bool) -> T {
    let yz = if y { z } else { T::zero() };
    z.max(T::zero()) - yz + (-z.abs()).exp().ln_1p()
}

/// Dot product with eight independent accumulators so the compiler can
/// vectorize it.
#[inline]
fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [T::zero(); 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] = acc[k] + x[k] * y[k];
        }
    }
    let mut tail = T::zero();
    for (x, y) in ra.iter().zip(rb) {
        tail = tail + *x * *y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

#[inline]
fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (y, x) in y.iter_mut().zip(x) {
        *y = *y + alpha * *x;
    }
}

/// Per-row buffers reused across a batch.
pub(crate) struct Workspace<T> {
    /// `pre[l]`: pre-activation output of layer `l`.
    pre: Vec<Vec<T>>,
    /// `act[0]` is the input, `act[l + 1]` the activated output of layer `l`.
    act: Vec<Vec<T>>,
    /// Gradient with respect to one layer's pre-activation.
    delta: Vec<Vec<T>>,
}

impl<T: Scalar> Network<T> {
    /// Network with every weight and bias zero.
    pub fn zeros(input_dim: usize, spec: &[LayerSpec]) -> Result<Self, NetError> {
        layer_widths(input_dim, spec)?;
        let mut width = input_dim;
        let mut layers = Vec::with_capacity(spec.len());
        for (s, w) in spec.iter().zip(layer_widths(input_dim, spec)?) {
            let layer = match s {
                LayerSpec::Flatten => Layer {
                    spec: *s,
                    weights: Tensor::empty(),
                    bias: Tensor::empty(),
                },
                _ => {
                    let (ws, bs) = param_shapes(s, width);
                    Layer {
                        spec: *s,
                        weights: Tensor::zeros(ws),
                        bias: Tensor::zeros(bs),
                    }
                }
            };
            layers.push(layer);
            width = w;
        }
        Ok(Self { input_dim, layers })
    }

    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))` and zero
    /// biases. For the convolution `fan_in = kernel` and
    /// `fan_out = kernel · filters`.
    pub fn glorot(input_dim: usize, spec: &[LayerSpec], rng: &mut Rng) -> Result<Self, NetError> {
        let mut net = Self::zeros(input_dim, spec)?;
        for layer in &mut net.layers {
            let (fan_in, fan_out) = match layer.spec {
                LayerSpec::Dense { units, .. } => (layer.weights.shape[1], units),
                LayerSpec::Conv1d { filters, kernel, .. } => (kernel, kernel * filters),
                LayerSpec::Flatten => continue,
            };
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for w in &mut layer.weights.data {
                *w = T::of(rng.random_range(-limit..=limit));
            }
        }
        Ok(net)
    }

    /// Rebuilds a network from deserialized layers, checking every shape.
    pub fn from_layers(input_dim: usize, layers: Vec<Layer<T>>) -> Result<Self, NetError> {
        let net = Self { input_dim, layers };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<(), NetError> {
        let spec = self.spec();
        let template = Self::zeros(self.input_dim, &spec)?;
        for (have, want) in self.layers.iter().zip(&template.layers) {
            for (t, w) in [(&have.weights, &want.weights), (&have.bias, &want.bias)] {
                if t.shape != w.shape || t.data.len() != w.data.len() {
                    return Err(NetError::InvalidSpec(format!(
                        "tensor shape {:?} (len {}) where {:?} was expected",
                        t.shape,
                        t.data.len(),
                        w.shape
                    )));
                }
                if t.data.iter().any(|v| !v.is_finite()) {
                    return Err(NetError::InvalidSpec("non-finite parameter".into()));
                }
            }
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn spec(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(|l| l.spec).collect()
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.data.len() + l.bias.data.len())
            .sum()
    }

    fn locate(&self, mut k: usize) -> (usize, bool, usize) {
        for (i, l) in self.layers.iter().enumerate() {
            if k < l.weights.data.len() {
                return (i, false, k);
            }
            k -= l.weights.data.len();
            if k < l.bias.data.len() {
                return (i, true, k);
            }
            k -= l.bias.data.len();
        }
        panic!("parameter index out of range");
    }

    /// Parameter `k` in layer order, weights before biases within a layer.
    pub fn param(&self, k: usize) -> T {
        let (l, bias, i) = self.locate(k);
        let layer = &self.layers[l];
        if bias { layer.bias.data[i] } else { layer.weights.data[i] }
    }

    pub fn set_param(&mut self, k: usize, v: T) {
        let (l, bias, i) = self.locate(k);
        let layer = &mut self.layers[l];
        if bias {
            layer.bias.data[i] = v;
        } else {
            layer.weights.data[i] = v;
        }
    }

    /// Flat index of the first weight and first bias of every layer.
    pub fn tensor_offsets(&self) -> Vec<(usize, usize, usize, usize)> {
        let mut k = 0;
        self.layers
            .iter()
            .map(|l| {
                let w = (k, l.weights.data.len());
                k += l.weights.data.len();
                let b = (k, l.bias.data.len());
                k += l.bias.data.len();
                (w.0, w.1, b.0, b.1)
            })
            .collect()
    }

    fn check_width(&self, got: usize) -> Result<(), NetError> {
        if got != self.input_dim {
            return Err(NetError::ShapeMismatch {
                expected: self.input_dim,
                got,
            });
        }
        Ok(())
    }

    pub(crate) fn compile(&self) -> Compiled<T> {
        let mut seen_params = false;
        let mut width = self.input_dim;
        let layers = self
            .layers
            .iter()
            .map(|l| {
                let (n_in, n_out) = match l.spec {
                    LayerSpec::Dense { units, .. } => (width, units),
                    _ => (width, 0),
                };
                let w = match l.spec {
                    LayerSpec::Dense { .. } => transpose(&l.weights.data, n_out, n_in),
                    _ => l.weights.data.clone(),
                };
                let layer = CompiledLayer {
                    spec: l.spec,
                    n_in,
                    n_out,
                    w,
                    b: l.bias.data.clone(),
                    upstream: seen_params,
                };
                seen_params |= !matches!(l.spec, LayerSpec::Flatten);
                width = match l.spec {
                    LayerSpec::Dense { units, .. } => units,
                    LayerSpec::Conv1d { filters, kernel, .. } => filters * (width - kernel + 1),
                    LayerSpec::Flatten => width,
                };
                layer
            })
            .collect();
        Compiled {
            input_dim: self.input_dim,
            layers,
        }
    }

    /// Probability of resistance for one encoded row.
    pub fn forward(&self, x: &[T]) -> Result<T, NetError> {
        self.check_width(x.len())?;
        let c = self.compile();
        let mut ws = c.workspace();
        Ok(sigmoid(c.run(x, &mut ws)))
    }

    pub fn predict(&self, x: &Matrix<T>) -> Result<Vec<T>, NetError> {
        self.check_width(x.cols())?;
        let c = self.compile();
        let mut ws = c.workspace();
        Ok(x.iter_rows().map(|r| sigmoid(c.run(r, &mut ws))).collect())
    }

    /// Pre-activations of every layer, for inspecting ReLU patterns.
    pub fn trace(&self, x: &[T]) -> Result<Trace<T>, NetError> {
        self.check_width(x.len())?;
        let c = self.compile();
        let mut ws = c.workspace();
        let z = c.run(x, &mut ws);
        Ok(Trace {
            pre: ws.pre,
            output: sigmoid(z),
        })
    }

    /// Mean binary cross-entropy over the rows of `x`.
    pub fn loss(&self, x: &Matrix<T>, y: &[bool]) -> Result<T, NetError> {
        self.check_width(x.cols())?;
        assert_eq!(x.rows(), y.len(), "one label per row");
        let c = self.compile();
        let mut ws = c.workspace();
        let total: T = x
            .iter_rows()
            .zip(y)
            .map(|(r, &t)| bce_from_logit(c.run(r, &mut ws), t))
            .sum();
        Ok(total / T::of_usize(y.len()))
    }

    /// Mean loss and its gradient over the rows of `x`.
    pub fn backprop(&self, x: &Matrix<T>, y: &[bool]) -> Result<(T, Gradients<T>), NetError> {
        self.check_width(x.cols())?;
        assert_eq!(x.rows(), y.len(), "one label per row");
        let c = self.compile();
        let rows: Vec<usize> = (0..x.rows()).collect();
        let mut grads = c.zero_gradients();
        let mut ws = c.workspace();
        let loss = c.accumulate(x, y, &rows, &mut ws, &mut grads)?;
        let mut out = Gradients {
            weights: Vec::with_capacity(self.layers.len()),
            bias: Vec::with_capacity(self.layers.len()),
        };
        for ((layer, cl), (gw, gb)) in self.layers.iter().zip(&c.layers).zip(grads.w.into_iter().zip(grads.b)) {
            let data = match layer.spec {
                LayerSpec::Dense { .. } => transpose(&gw, cl.n_in, cl.n_out),
                _ => gw,
            };
            out.weights.push(Tensor {
                shape: layer.weights.shape.clone(),
                data,
            });
            out.bias.push(Tensor {
                shape: layer.bias.shape.clone(),
                data: gb,
            });
        }
        Ok((loss, out))
    }
}

/// Row-major `rows × cols` to row-major `cols × rows`.
fn transpose<T: Scalar>(m: &[T], rows: usize, cols: usize) -> Vec<T> {
    let mut out = vec![T::zero(); m.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = m[r * cols + c];
        }
    }
    out
}

/// Parameters in the layout the arithmetic runs on. Dense weights are held
/// input-major (`in × out`) so that zero inputs, which are common after
/// ReLU and one-hot encoding, cost nothing in either direction.
pub(crate) struct Compiled<T> {
    input_dim: usize,
    pub(crate) layers: Vec<CompiledLayer<T>>,
}

pub(crate) struct CompiledLayer<T> {
    spec: LayerSpec,
    n_in: usize,
    n_out: usize,
    pub(crate) w: Vec<T>,
    pub(crate) b: Vec<T>,
    /// Whether a layer with parameters precedes this one, so the gradient
    /// must flow further back.
    upstream: bool,
}

/// Gradients in [`Compiled`] layout.
pub(crate) struct CompiledGradients<T> {
    pub(crate) w: Vec<Vec<T>>,
    pub(crate) b: Vec<Vec<T>>,
}

impl<T: Scalar> Compiled<T> {
    pub(crate) fn to_network(&self) -> Network<T> {
        let layers = self
            .layers
            .iter()
            .map(|l| {
                let (wshape, data) = match l.spec {
                    LayerSpec::Dense { units, .. } => (vec![units, l.n_in], transpose(&l.w, l.n_in, l.n_out)),
                    LayerSpec::Conv1d { filters, kernel, .. } => (vec![filters, kernel], l.w.clone()),
                    LayerSpec::Flatten => (vec![0], Vec::new()),
                };
                let bshape = match l.spec {
                    LayerSpec::Flatten => vec![0],
                    _ => vec![l.b.len()],
                };
                Layer {
                    spec: l.spec,
                    weights: Tensor { shape: wshape, data },
                    bias: Tensor {
                        shape: bshape,
                        data: l.b.clone(),
                    },
                }
            })
            .collect();
        Network {
            input_dim: self.input_dim,
            layers,
        }
    }

    pub(crate) fn workspace(&self) -> Workspace<T> {
        let spec: Vec<LayerSpec> = self.layers.iter().map(|l| l.spec).collect();
        let widths = layer_widths(self.input_dim, &spec).expect("validated on construction");
        let mut act = vec![vec![T::zero(); self.input_dim]];
        act.extend(widths.iter().map(|&w| vec![T::zero(); w]));
        Workspace {
            pre: widths.iter().map(|&w| vec![T::zero(); w]).collect(),
            delta: widths.iter().map(|&w| vec![T::zero(); w]).collect(),
            act,
        }
    }

    pub(crate) fn zero_gradients(&self) -> CompiledGradients<T> {
        CompiledGradients {
            w: self.layers.iter().map(|l| vec![T::zero(); l.w.len()]).collect(),
            b: self.layers.iter().map(|l| vec![T::zero(); l.b.len()]).collect(),
        }
    }

    /// Fills the workspace for one row and returns the output logit.
    fn run(&self, x: &[T], ws: &mut Workspace<T>) -> T {
        ws.act[0].copy_from_slice(x);
        for (l, layer) in self.layers.iter().enumerate() {
            let (head, tail) = ws.act.split_at_mut(l + 1);
            let input = &head[l];
            let pre = &mut ws.pre[l];
            let activation = match layer.spec {
                LayerSpec::Dense { activation, .. } => {
                    let n_out = layer.n_out;
                    pre.copy_from_slice(&layer.b);
                    for (i, &a) in input.iter().enumerate() {
                        if a != T::zero() {
                            axpy(a, &layer.w[i * n_out..(i + 1) * n_out], pre);
                        }
                    }
                    Some(activation)
                }
                LayerSpec::Conv1d {
                    filters,
                    kernel,
                    activation,
                } => {
                    let len = input.len() - kernel + 1;
                    for f in 0..filters {
                        let w = &layer.w[f * kernel..(f + 1) * kernel];
                        let b = layer.b[f];
                        for (p, z) in pre[f * len..(f + 1) * len].iter_mut().enumerate() {
                            *z = b + dot(w, &input[p..p + kernel]);
                        }
                    }
                    Some(activation)
                }
                LayerSpec::Flatten => {
                    pre.copy_from_slice(input);
                    None
                }
            };
            let out = &mut tail[0];
            match activation {
                Some(Activation::Relu) => {
                    for (a, z) in out.iter_mut().zip(pre.iter()) {
                        *a = z.max(T::zero());
                    }
                }
                Some(Activation::Sigmoid) => {
                    for (a, z) in out.iter_mut().zip(pre.iter()) {
                        *a = sigmoid(*z);
                    }
                }
                None => out.copy_from_slice(pre),
            }
        }
        ws.pre.last().expect("at least one layer")[0]
    }

    /// Overwrites `grads` with the mean gradient over `rows` and returns the
    /// mean loss.
    pub(crate) fn accumulate(
        &self,
        x: &Matrix<T>,
        y: &[bool],
        rows: &[usize],
        ws: &mut Workspace<T>,
        grads: &mut CompiledGradients<T>,
    ) -> Result<T, NetError> {
        if x.cols() != self.input_dim {
            return Err(NetError::ShapeMismatch {
                expected: self.input_dim,
                got: x.cols(),
            });
        }
        if rows.is_empty() {
            return Err(NetError::InvalidConfig("empty batch".into()));
        }
        for g in grads.w.iter_mut().chain(grads.b.iter_mut()) {
            g.iter_mut().for_each(|v| *v = T::zero());
        }
        let scale = T::one() / T::of_usize(rows.len());
        let mut loss = T::zero();
        let last = self.layers.len() - 1;
        for &r in rows {
            let z = self.run(x.row(r), ws);
            loss = loss + bce_from_logit(z, y[r]);
            let target = if y[r] { T::one() } else { T::zero() };
            ws.delta[last][0] = (sigmoid(z) - target) * scale;

            for l in (0..=last).rev() {
                let layer = &self.layers[l];
                let (before, from) = ws.delta.split_at_mut(l);
                let delta = &from[0];
                let input = &ws.act[l];
                let gw = &mut grads.w[l];
                let gb = &mut grads.b[l];
                match layer.spec {
                    LayerSpec::Dense { .. } => {
                        let n_out = layer.n_out;
                        axpy(T::one(), delta, gb);
                        for (i, &a) in input.iter().enumerate() {
                            if a != T::zero() {
                                axpy(a, delta, &mut gw[i * n_out..(i + 1) * n_out]);
                            }
                        }
                        if layer.upstream {
                            // Every hidden activation is ReLU, so the input is
                            // positive exactly where the previous pre-activation
                            // was, and the ReLU derivative is applied here.
                            let up = &mut before[l - 1];
                            for (i, (u, &a)) in up.iter_mut().zip(input.iter()).enumerate() {
                                *u = if a > T::zero() {
                                    dot(&layer.w[i * n_out..(i + 1) * n_out], delta)
                                } else {
                                    T::zero()
                                };
                            }
                        }
                    }
                    LayerSpec::Conv1d { filters, kernel, .. } => {
                        let len = input.len() - kernel + 1;
                        for f in 0..filters {
                            let d = &delta[f * len..(f + 1) * len];
                            gb[f] = gb[f] + d.iter().copied().sum();
                            for j in 0..kernel {
                                gw[f * kernel + j] = gw[f * kernel + j] + dot(d, &input[j..j + len]);
                            }
                        }
                    }
                    LayerSpec::Flatten => {
                        if layer.upstream {
                            before[l - 1].copy_from_slice(delta);
                        }
                    }
                }
            }
        }
        Ok(loss * scale)
    }
}

impl<T: Scalar> Gradients<T> {
    pub fn num_params(&self) -> usize {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| w.data.len() + b.data.len())
            .sum()
    }

    /// Flat view in the same order as [`Network::param`].
    pub fn flat(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.num_params());
        for (w, b) in self.weights.iter().zip(&self.bias) {
            out.extend_from_slice(&w.data);
            out.extend_from_slice(&b.data);
        }
        out
    }
}
