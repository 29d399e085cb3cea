//! The training engine: layer specs, built layers, and the model that
//! chains them.
//!
//! A [`ModelSpec`] is a plain description (serializable, shape-checkable);
//! [`Model::build`] validates shapes, initializes parameters from a seeded
//! RNG, and produces the runnable [`Model`]. Forward in train mode caches
//! whatever backward needs; backward accumulates gradients into each
//! parameter's `grad` buffer and returns the input gradient.

pub mod act_layer;
pub mod batchnorm;
pub mod conv;
pub mod dense;
pub mod init;
pub mod linalg;
pub mod loss;
pub mod pool;

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::activations::ActivationKind;
use crate::element::Element;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub use act_layer::ActivationLayer;
pub use batchnorm::BatchNorm;
pub use conv::Conv2d;
pub use dense::Dense;
pub use loss::{softmax_cross_entropy, LossOutput};
pub use pool::{GlobalAvgPool, MaxPool};

/// What a parameter tensor is, for optimizer policy: activation parameters
/// get their own weight decay and learning-rate scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamClass {
    Weight,
    Bias,
    Norm,
    Activation,
}

/// One learnable tensor with its gradient accumulator.
#[derive(Debug, Clone)]
pub struct Param<E: Element> {
    pub value: Vec<E>,
    pub grad: Vec<E>,
    pub class: ParamClass,
}

impl<E: Element> Param<E> {
    pub fn new(value: Vec<E>, class: ParamClass) -> Self {
        let grad = vec![E::zero(); value.len()];
        Param { value, grad, class }
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(E::zero());
    }
}

/// Whether learnable activation parameters are shared across the whole
/// layer, per channel, or per individual pre-activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Granularity {
    Global,
    PerChannel,
    PerNeuron,
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::Global => "global",
            Granularity::PerChannel => "per-channel",
            Granularity::PerNeuron => "per-neuron",
        })
    }
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(Granularity::Global),
            "per-channel" => Ok(Granularity::PerChannel),
            "per-neuron" => Ok(Granularity::PerNeuron),
            other => Err(Error::Config(format!(
                "unknown granularity {other:?}; expected global, per-channel or per-neuron"
            ))),
        }
    }
}

/// Forward-pass mode. Train caches for backward and uses batch statistics
/// in batchnorm; eval caches nothing and uses running statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Declarative layer description. Shapes are per-sample; the batch axis is
/// implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LayerSpec {
    /// Fully connected. Flattens any input shape to a feature vector.
    Dense { out_features: usize, bias: bool },
    /// 2-D cross-correlation over [C, H, W].
    Conv2d { out_channels: usize, kernel: usize, stride: usize, pad: usize, bias: bool },
    /// Per-channel batch normalization.
    BatchNorm,
    /// Max pooling, no padding.
    MaxPool { kernel: usize, stride: usize },
    /// Mean over the spatial axes: [C, H, W] → [C].
    GlobalAvgPool,
    /// Elementwise activation from the zoo.
    Activation { kind: ActivationKind, granularity: Granularity },
    /// Residual block: output = block(x) + shortcut(x). The shortcut is the
    /// identity when shapes match and a 1x1 projection convolution
    /// otherwise.
    Residual { block: Vec<LayerSpec> },
}

impl LayerSpec {
    /// Per-sample output shape for the given input shape. This is the
    /// single shape-rule implementation; both validation and building go
    /// through it.
    pub fn out_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        match self {
            LayerSpec::Dense { out_features, .. } => {
                if *out_features == 0 {
                    return Err(Error::Shape("dense layer with 0 output features".into()));
                }
                if input.iter().product::<usize>() == 0 {
                    return Err(Error::Shape(format!("dense layer fed empty shape {input:?}")));
                }
                Ok(vec![*out_features])
            }
            LayerSpec::Conv2d { out_channels, kernel, stride, pad, .. } => {
                let [c, h, w] = expect_chw(input, "conv2d")?;
                let _ = c;
                if *kernel == 0 || *stride == 0 || *out_channels == 0 {
                    return Err(Error::Shape(
                        "conv2d kernel, stride and out_channels must be positive".into(),
                    ));
                }
                let oh = conv_extent(h, *kernel, *stride, *pad, "conv2d height")?;
                let ow = conv_extent(w, *kernel, *stride, *pad, "conv2d width")?;
                Ok(vec![*out_channels, oh, ow])
            }
            LayerSpec::BatchNorm => match input.len() {
                1 | 3 => Ok(input.to_vec()),
                _ => Err(Error::Shape(format!(
                    "batchnorm wants [features] or [C, H, W], got {input:?}"
                ))),
            },
            LayerSpec::MaxPool { kernel, stride } => {
                let [c, h, w] = expect_chw(input, "maxpool")?;
                if *kernel == 0 || *stride == 0 {
                    return Err(Error::Shape("maxpool kernel and stride must be positive".into()));
                }
                let oh = conv_extent(h, *kernel, *stride, 0, "maxpool height")?;
                let ow = conv_extent(w, *kernel, *stride, 0, "maxpool width")?;
                Ok(vec![c, oh, ow])
            }
            LayerSpec::GlobalAvgPool => {
                let [c, _, _] = expect_chw(input, "global average pool")?;
                Ok(vec![c])
            }
            LayerSpec::Activation { .. } => Ok(input.to_vec()),
            LayerSpec::Residual { block } => {
                let mut shape = input.to_vec();
                for spec in block {
                    shape = spec.out_shape(&shape)?;
                }
                // The shortcut must be able to match the block: same rank,
                // and for [C, H, W] the spatial reduction must be an
                // integer stride a 1x1 projection can reproduce.
                if shape.len() != input.len() {
                    return Err(Error::Shape(format!(
                        "residual block changes rank: {input:?} -> {shape:?}"
                    )));
                }
                if let ([_, h, w], [_, oh, ow]) = (input, shape.as_slice()) {
                    if h % oh != 0 || w % ow != 0 || h / oh != w / ow {
                        return Err(Error::Shape(format!(
                            "residual block spatial change {h}x{w} -> {oh}x{ow} \
                             is not a uniform stride"
                        )));
                    }
                }
                Ok(shape)
            }
        }
    }
}

fn expect_chw(shape: &[usize], who: &str) -> Result<[usize; 3]> {
    match shape {
        [c, h, w] if *c > 0 && *h > 0 && *w > 0 => Ok([*c, *h, *w]),
        _ => Err(Error::Shape(format!("{who} wants [C, H, W] with positive dims, got {shape:?}"))),
    }
}

/// Output extent of a strided window: (extent + 2·pad - kernel)/stride + 1,
/// which must divide evenly and be positive.
fn conv_extent(extent: usize, kernel: usize, stride: usize, pad: usize, who: &str) -> Result<usize> {
    let padded = extent + 2 * pad;
    if padded < kernel {
        return Err(Error::Shape(format!(
            "{who}: kernel {kernel} larger than padded extent {padded}"
        )));
    }
    let span = padded - kernel;
    if !span.is_multiple_of(stride) {
        return Err(Error::Shape(format!(
            "{who}: window does not tile: ({extent} + 2*{pad} - {kernel}) % {stride} != 0"
        )));
    }
    Ok(span / stride + 1)
}

/// A full model description: per-sample input shape, layers, and the class
/// count its logits must match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub input_shape: Vec<usize>,
    pub layers: Vec<LayerSpec>,
    pub class_count: usize,
}

impl ModelSpec {
    /// Walk all shapes; Err on the first layer that does not compose or if
    /// the final shape is not [class_count].
    pub fn validate(&self) -> Result<Vec<usize>> {
        let mut shape = self.input_shape.clone();
        for (i, spec) in self.layers.iter().enumerate() {
            shape = spec
                .out_shape(&shape)
                .map_err(|e| Error::Shape(format!("layer {i}: {e}")))?;
        }
        if shape != [self.class_count] {
            return Err(Error::Shape(format!(
                "model ends with shape {shape:?}, want [{}] logits",
                self.class_count
            )));
        }
        Ok(shape)
    }
}

/// A built layer. Enum rather than trait objects so layers can expose
/// typed internals (running stats, caches) without downcasts.
#[derive(Debug)]
pub enum Layer<E: Element> {
    Dense(Dense<E>),
    Conv2d(Conv2d<E>),
    BatchNorm(BatchNorm<E>),
    MaxPool(MaxPool<E>),
    GlobalAvgPool(GlobalAvgPool),
    Activation(ActivationLayer<E>),
    Residual(Residual<E>),
}

impl<E: Element> Layer<E> {
    fn build(spec: &LayerSpec, in_shape: &[usize], rng: &mut ChaCha8Rng) -> Result<Self> {
        Ok(match spec {
            LayerSpec::Dense { out_features, bias } => {
                let in_features = in_shape.iter().product();
                Layer::Dense(Dense::new(in_features, *out_features, *bias, rng))
            }
            LayerSpec::Conv2d { out_channels, kernel, stride, pad, bias } => {
                let [c, _, _] = expect_chw(in_shape, "conv2d")?;
                Layer::Conv2d(Conv2d::new(c, *out_channels, *kernel, *stride, *pad, *bias, rng))
            }
            LayerSpec::BatchNorm => {
                let channels = in_shape[0];
                Layer::BatchNorm(BatchNorm::new(channels))
            }
            LayerSpec::MaxPool { kernel, stride } => {
                Layer::MaxPool(MaxPool::new(*kernel, *stride))
            }
            LayerSpec::GlobalAvgPool => Layer::GlobalAvgPool(GlobalAvgPool::default()),
            LayerSpec::Activation { kind, granularity } => {
                Layer::Activation(ActivationLayer::new(*kind, *granularity, in_shape)?)
            }
            LayerSpec::Residual { block } => {
                let mut shape = in_shape.to_vec();
                let mut layers = Vec::with_capacity(block.len());
                for spec in block {
                    let next = spec.out_shape(&shape)?;
                    layers.push(Layer::build(spec, &shape, rng)?);
                    shape = next;
                }
                let projection = if shape == in_shape {
                    None
                } else {
                    let [ic, ih, _] = expect_chw(in_shape, "residual shortcut")?;
                    let [oc, oh, _] = expect_chw(&shape, "residual shortcut")?;
                    let stride = ih / oh;
                    Some(Conv2d::new(ic, oc, 1, stride.max(1), 0, false, rng))
                };
                Layer::Residual(Residual { block: layers, projection })
            }
        })
    }

    fn forward(&mut self, x: &Tensor<E>, mode: Mode) -> Result<Tensor<E>> {
        match self {
            Layer::Dense(l) => l.forward(x, mode),
            Layer::Conv2d(l) => l.forward(x, mode),
            Layer::BatchNorm(l) => l.forward(x, mode),
            Layer::MaxPool(l) => l.forward(x, mode),
            Layer::GlobalAvgPool(l) => l.forward(x, mode),
            Layer::Activation(l) => l.forward(x, mode),
            Layer::Residual(l) => l.forward(x, mode),
        }
    }

    fn backward(&mut self, upstream: &Tensor<E>) -> Result<Tensor<E>> {
        match self {
            Layer::Dense(l) => l.backward(upstream),
            Layer::Conv2d(l) => l.backward(upstream),
            Layer::BatchNorm(l) => l.backward(upstream),
            Layer::MaxPool(l) => l.backward(upstream),
            Layer::GlobalAvgPool(l) => l.backward(upstream),
            Layer::Activation(l) => l.backward(upstream),
            Layer::Residual(l) => l.backward(upstream),
        }
    }

    fn collect_params<'a>(&'a mut self, out: &mut Vec<&'a mut Param<E>>) {
        match self {
            Layer::Dense(l) => l.collect_params(out),
            Layer::Conv2d(l) => l.collect_params(out),
            Layer::BatchNorm(l) => l.collect_params(out),
            Layer::MaxPool(_) | Layer::GlobalAvgPool(_) => {}
            Layer::Activation(l) => l.collect_params(out),
            Layer::Residual(l) => {
                for layer in &mut l.block {
                    layer.collect_params(out);
                }
                if let Some(p) = &mut l.projection {
                    p.collect_params(out);
                }
            }
        }
    }

    fn visit_activations(&mut self, f: &mut impl FnMut(&mut ActivationLayer<E>)) {
        match self {
            Layer::Activation(l) => f(l),
            Layer::Residual(l) => {
                for layer in &mut l.block {
                    layer.visit_activations(f);
                }
            }
            _ => {}
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Layer::Dense(_) => "dense",
            Layer::Conv2d(_) => "conv2d",
            Layer::BatchNorm(_) => "batchnorm",
            Layer::MaxPool(_) => "maxpool",
            Layer::GlobalAvgPool(_) => "global_avg_pool",
            Layer::Activation(_) => "activation",
            Layer::Residual(_) => "residual",
        }
    }
}

/// Residual block with an optional 1x1 projection shortcut.
#[derive(Debug)]
pub struct Residual<E: Element> {
    block: Vec<Layer<E>>,
    projection: Option<Conv2d<E>>,
}

impl<E: Element> Residual<E> {
    fn forward(&mut self, x: &Tensor<E>, mode: Mode) -> Result<Tensor<E>> {
        let mut y = x.clone();
        for layer in &mut self.block {
            y = layer.forward(&y, mode)?;
        }
        let shortcut = match &mut self.projection {
            Some(conv) => conv.forward(x, mode)?,
            None => x.clone(),
        };
        if shortcut.shape() != y.shape() {
            return Err(Error::Shape(format!(
                "residual shortcut {:?} vs block {:?}",
                shortcut.shape(),
                y.shape()
            )));
        }
        for (yi, si) in y.data_mut().iter_mut().zip(shortcut.data()) {
            *yi += *si;
        }
        Ok(y)
    }

    fn backward(&mut self, upstream: &Tensor<E>) -> Result<Tensor<E>> {
        let mut d = upstream.clone();
        for layer in self.block.iter_mut().rev() {
            d = layer.backward(&d)?;
        }
        let d_shortcut = match &mut self.projection {
            Some(conv) => conv.backward(upstream)?,
            None => upstream.clone(),
        };
        if d.shape() != d_shortcut.shape() {
            return Err(Error::Shape(format!(
                "residual gradient shapes diverge: {:?} vs {:?}",
                d.shape(),
                d_shortcut.shape()
            )));
        }
        for (di, si) in d.data_mut().iter_mut().zip(d_shortcut.data()) {
            *di += *si;
        }
        Ok(d)
    }
}

/// Parameter totals, split by class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamCounts {
    pub total: usize,
    pub weights: usize,
    pub biases: usize,
    pub norm: usize,
    pub activation: usize,
}

/// A built, runnable model.
#[derive(Debug)]
pub struct Model<E: Element> {
    layers: Vec<Layer<E>>,
    input_shape: Vec<usize>,
    class_count: usize,
}

impl<E: Element> Model<E> {
    /// Validate the spec, then construct layers with parameters drawn from
    /// `rng` (Kaiming-uniform weights, zero biases) in declaration order,
    /// so a seed pins the full initial state.
    pub fn build(spec: &ModelSpec, rng: &mut ChaCha8Rng) -> Result<Self> {
        spec.validate()?;
        let mut layers = Vec::with_capacity(spec.layers.len());
        let mut shape = spec.input_shape.clone();
        for layer_spec in &spec.layers {
            let next = layer_spec.out_shape(&shape)?;
            layers.push(Layer::build(layer_spec, &shape, rng)?);
            shape = next;
        }
        Ok(Model { layers, input_shape: spec.input_shape.clone(), class_count: spec.class_count })
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Run the net on a batch whose shape must be [N, ...input_shape].
    /// In debug builds every layer output is checked finite.
    pub fn forward(&mut self, x: &Tensor<E>, mode: Mode) -> Result<Tensor<E>> {
        if x.rank() != self.input_shape.len() + 1 || x.shape()[1..] != *self.input_shape {
            return Err(Error::Shape(format!(
                "model wants [N, {:?}] inputs, got {:?}",
                self.input_shape,
                x.shape()
            )));
        }
        if x.dim(0) == 0 {
            return Err(Error::Shape("empty batch".into()));
        }
        let mut y = x.clone();
        for layer in &mut self.layers {
            y = layer.forward(&y, mode)?;
            #[cfg(debug_assertions)]
            y.ensure_finite(layer.name())?;
        }
        Ok(y)
    }

    /// Backpropagate from the logits gradient; parameter gradients
    /// accumulate, the input gradient is returned.
    pub fn backward(&mut self, d_logits: &Tensor<E>) -> Result<Tensor<E>> {
        let mut d = d_logits.clone();
        for layer in self.layers.iter_mut().rev() {
            d = layer.backward(&d)?;
            #[cfg(debug_assertions)]
            d.ensure_finite(layer.name())?;
        }
        Ok(d)
    }

    pub fn zero_grads(&mut self) {
        for p in self.params_mut() {
            p.zero_grad();
        }
    }

    /// All parameters in a fixed traversal order (layer order; block before
    /// projection inside residuals). Optimizer state is keyed by position
    /// in this sequence.
    pub fn params_mut(&mut self) -> Vec<&mut Param<E>> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            layer.collect_params(&mut out);
        }
        out
    }

    /// Clamp every activation layer's parameters into their valid domain.
    pub fn project_activation_params(&mut self) {
        for layer in &mut self.layers {
            layer.visit_activations(&mut |act| act.project());
        }
    }

    /// Visit every activation layer (for reporting).
    pub fn visit_activation_layers(&mut self, mut f: impl FnMut(&mut ActivationLayer<E>)) {
        for layer in &mut self.layers {
            layer.visit_activations(&mut f);
        }
    }

    /// Total activation sites (channels, neurons, or 1 per layer depending
    /// on granularity) across the whole model.
    pub fn activation_sites(&mut self) -> usize {
        let mut n = 0;
        self.visit_activation_layers(|layer| n += layer.sites());
        n
    }

    pub fn parameter_counts(&mut self) -> ParamCounts {
        let mut counts = ParamCounts { total: 0, weights: 0, biases: 0, norm: 0, activation: 0 };
        for p in self.params_mut() {
            counts.total += p.len();
            match p.class {
                ParamClass::Weight => counts.weights += p.len(),
                ParamClass::Bias => counts.biases += p.len(),
                ParamClass::Norm => counts.norm += p.len(),
                ParamClass::Activation => counts.activation += p.len(),
            }
        }
        counts
    }
}
