//! Feed-forward network representation and evaluation.
//!
//! A [`Network`] is an immutable value: forward and backward passes are
//! pure functions, and anything that "changes" a network builds a new
//! parameter set. Weight matrices are stored flat and row-major with shape
//! `(N^l, N^{l-1})`.

mod backward;
mod reference;
mod serialize;

pub use backward::{backward, finite_diff_grad};
pub use reference::reference_network;
pub use serialize::NetworkDocument;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Elementwise activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationKind {
    Relu,
    Selu,
    Identity,
}

/// Fixed SELU scale constant.
pub const SELU_LAMBDA: f64 = 1.0507009873554805;
/// Fixed SELU alpha constant.
pub const SELU_ALPHA: f64 = 1.6732632423543772;

impl ActivationKind {
    #[inline]
    pub fn apply(self, h: f64) -> f64 {
        match self {
            ActivationKind::Relu => {
                if h > 0.0 {
                    h
                } else {
                    0.0
                }
            }
            ActivationKind::Selu => {
                if h > 0.0 {
                    SELU_LAMBDA * h
                } else {
                    SELU_LAMBDA * SELU_ALPHA * (h.exp() - 1.0)
                }
            }
            ActivationKind::Identity => h,
        }
    }

    /// Derivative with respect to the preactivation. The ReLU subgradient
    /// at exactly 0 is 0, which keeps dead units exactly dead.
    #[inline]
    pub fn derivative(self, h: f64) -> f64 {
        match self {
            ActivationKind::Relu => {
                if h > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::Selu => {
                if h > 0.0 {
                    SELU_LAMBDA
                } else {
                    SELU_LAMBDA * SELU_ALPHA * h.exp()
                }
            }
            ActivationKind::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Relu => "relu",
            ActivationKind::Selu => "selu",
            ActivationKind::Identity => "identity",
        }
    }
}

/// Layer sizes and structural flags of a feed-forward network.
///
/// `widths[l-1]` is the number of units in layer `l` (1-indexed); the last
/// entry is the output dimension. When `last_layer_relu` is false the final
/// layer is a plain affine map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub d_in: usize,
    pub widths: Vec<usize>,
    pub last_layer_relu: bool,
    pub bias_free: bool,
}

impl Architecture {
    pub fn new(d_in: usize, widths: Vec<usize>, last_layer_relu: bool, bias_free: bool) -> Result<Self> {
        if d_in == 0 {
            return Err(Error::arg("d_in must be >= 1"));
        }
        if widths.is_empty() || widths.contains(&0) {
            return Err(Error::arg("widths must be non-empty with every entry >= 1"));
        }
        Ok(Architecture {
            d_in,
            widths,
            last_layer_relu,
            bias_free,
        })
    }

    /// A depth-long chain of constant width; the shape used throughout the
    /// initialization-probability experiments.
    pub fn chain(d_in: usize, width: usize, depth: usize, last_layer_relu: bool, bias_free: bool) -> Result<Self> {
        if depth == 0 {
            return Err(Error::arg("depth must be >= 1"));
        }
        Architecture::new(d_in, vec![width; depth], last_layer_relu, bias_free)
    }

    /// Number of weight layers L.
    #[inline]
    pub fn depth(&self) -> usize {
        self.widths.len()
    }

    #[inline]
    pub fn d_out(&self) -> usize {
        *self.widths.last().unwrap()
    }

    /// Input dimension of layer `l` (1-indexed).
    #[inline]
    pub fn fan_in(&self, layer: usize) -> usize {
        if layer == 1 {
            self.d_in
        } else {
            self.widths[layer - 2]
        }
    }

    /// Output dimension of layer `l` (1-indexed).
    #[inline]
    pub fn fan_out(&self, layer: usize) -> usize {
        self.widths[layer - 1]
    }

    /// Whether layer `l` (1-indexed) applies the activation.
    #[inline]
    pub fn layer_has_activation(&self, layer: usize) -> bool {
        layer < self.depth() || self.last_layer_relu
    }

    pub fn total_parameters(&self) -> usize {
        (1..=self.depth())
            .map(|l| self.fan_out(l) * (self.fan_in(l) + 1))
            .sum()
    }
}

/// One layer's parameters; weights are flat row-major `(fan_out, fan_in)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// All weight matrices and bias vectors of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameters {
    pub layers: Vec<LayerParams>,
}

impl Parameters {
    pub fn zeros(arch: &Architecture) -> Self {
        let layers = (1..=arch.depth())
            .map(|l| LayerParams {
                weights: vec![0.0; arch.fan_out(l) * arch.fan_in(l)],
                bias: vec![0.0; arch.fan_out(l)],
            })
            .collect();
        Parameters { layers }
    }

    pub fn check_shapes(&self, arch: &Architecture) -> Result<()> {
        if self.layers.len() != arch.depth() {
            return Err(Error::shape(format!(
                "expected {} layers, got {}",
                arch.depth(),
                self.layers.len()
            )));
        }
        for l in 1..=arch.depth() {
            let lp = &self.layers[l - 1];
            if lp.weights.len() != arch.fan_out(l) * arch.fan_in(l) {
                return Err(Error::shape(format!(
                    "layer {l}: weight matrix must be {}x{}",
                    arch.fan_out(l),
                    arch.fan_in(l)
                )));
            }
            if lp.bias.len() != arch.fan_out(l) {
                return Err(Error::shape(format!(
                    "layer {l}: bias must have length {}",
                    arch.fan_out(l)
                )));
            }
            if arch.bias_free && lp.bias.iter().any(|&b| b != 0.0) {
                return Err(Error::shape(format!(
                    "layer {l}: bias-free architecture with nonzero bias"
                )));
            }
        }
        Ok(())
    }
}

/// Everything produced by a forward pass: per-layer preactivations `h^l`
/// and activities `x^l`. The last activity is the network output.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub preactivations: Vec<Vec<f64>>,
    pub activations: Vec<Vec<f64>>,
}

impl ForwardTrace {
    #[inline]
    pub fn output(&self) -> &[f64] {
        self.activations.last().unwrap()
    }
}

/// Per-layer loss gradients, shaped exactly like [`Parameters`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub d_weights: Vec<Vec<f64>>,
    pub d_biases: Vec<Vec<f64>>,
}

impl GradientSet {
    pub fn zeros(arch: &Architecture) -> Self {
        GradientSet {
            d_weights: (1..=arch.depth())
                .map(|l| vec![0.0; arch.fan_out(l) * arch.fan_in(l)])
                .collect(),
            d_biases: (1..=arch.depth()).map(|l| vec![0.0; arch.fan_out(l)]).collect(),
        }
    }

    /// Largest absolute entry in layer `l` (1-indexed).
    pub fn layer_max_abs(&self, layer: usize) -> f64 {
        let w = self.d_weights[layer - 1].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let b = self.d_biases[layer - 1].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        w.max(b)
    }
}

/// An immutable feed-forward network.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    arch: Architecture,
    params: Parameters,
    activation: ActivationKind,
}

impl Network {
    pub fn new(arch: Architecture, params: Parameters, activation: ActivationKind) -> Result<Self> {
        params.check_shapes(&arch)?;
        Ok(Network {
            arch,
            params,
            activation,
        })
    }

    #[inline]
    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    #[inline]
    pub fn params(&self) -> &Parameters {
        &self.params
    }

    #[inline]
    pub fn activation(&self) -> ActivationKind {
        self.activation
    }

    /// Builds the same network with a new parameter set.
    pub fn with_params(&self, params: Parameters) -> Result<Network> {
        Network::new(self.arch.clone(), params, self.activation)
    }

    pub(crate) fn params_mut(&mut self) -> &mut Parameters {
        &mut self.params
    }

    /// Full forward pass recording every preactivation and activity.
    pub fn forward(&self, input: &[f64]) -> Result<ForwardTrace> {
        if input.len() != self.arch.d_in {
            return Err(Error::shape(format!(
                "input length {} != d_in {}",
                input.len(),
                self.arch.d_in
            )));
        }
        let depth = self.arch.depth();
        let mut preactivations = Vec::with_capacity(depth);
        let mut activations = Vec::with_capacity(depth);
        let mut x: &[f64] = input;
        for l in 1..=depth {
            let lp = &self.params.layers[l - 1];
            let fan_in = self.arch.fan_in(l);
            let fan_out = self.arch.fan_out(l);
            let mut h = vec![0.0; fan_out];
            for (o, hv) in h.iter_mut().enumerate() {
                let row = &lp.weights[o * fan_in..(o + 1) * fan_in];
                let mut acc = lp.bias[o];
                for (w, xv) in row.iter().zip(x.iter()) {
                    acc += w * xv;
                }
                *hv = acc;
            }
            let a = if self.arch.layer_has_activation(l) {
                h.iter().map(|&v| self.activation.apply(v)).collect()
            } else {
                h.clone()
            };
            preactivations.push(h);
            activations.push(a);
            x = activations.last().unwrap();
        }
        Ok(ForwardTrace {
            preactivations,
            activations,
        })
    }

    /// Forward pass returning only the output vector.
    pub fn output(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(input)?.activations.pop_last())
    }

    /// Allocation-light forward into caller buffers; `scratch` must hold
    /// `max(widths)` slots and `out` must hold `d_out`.
    pub(crate) fn output_into(&self, input: &[f64], scratch: &mut [f64], out: &mut [f64]) {
        debug_assert_eq!(input.len(), self.arch.d_in);
        let depth = self.arch.depth();
        let mut cur_len = input.len();
        // Ping-pong between two halves of scratch.
        let (mut a, mut b) = scratch.split_at_mut(scratch.len() / 2);
        a[..cur_len].copy_from_slice(input);
        for l in 1..=depth {
            let lp = &self.params.layers[l - 1];
            let fan_in = self.arch.fan_in(l);
            let fan_out = self.arch.fan_out(l);
            debug_assert_eq!(fan_in, cur_len);
            let act = self.arch.layer_has_activation(l);
            for (o, slot) in b[..fan_out].iter_mut().enumerate() {
                let row = &lp.weights[o * fan_in..(o + 1) * fan_in];
                let mut acc = lp.bias[o];
                for (w, xv) in row.iter().zip(a[..fan_in].iter()) {
                    acc += w * xv;
                }
                *slot = if act { self.activation.apply(acc) } else { acc };
            }
            cur_len = fan_out;
            std::mem::swap(&mut a, &mut b);
        }
        out.copy_from_slice(&a[..cur_len]);
    }

    /// Scratch size for [`Network::output_into`].
    pub(crate) fn scratch_len(&self) -> usize {
        let widest = self
            .arch
            .widths
            .iter()
            .copied()
            .max()
            .unwrap()
            .max(self.arch.d_in);
        2 * widest
    }
}

trait PopLast {
    fn pop_last(self) -> Vec<f64>;
}

impl PopLast for Vec<Vec<f64>> {
    fn pop_last(mut self) -> Vec<f64> {
        self.pop().unwrap()
    }
}
