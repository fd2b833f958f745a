//! Trainable model: a network plus an optional normalization variant.
//!
//! The four variants share one batch-major forward/backward engine:
//!
//! - `none`: plain affine + activation layers
//! - `batchnorm`: per-unit normalization of preactivations with learned
//!   scale/shift; batch statistics while training, running statistics for
//!   evaluation
//! - `weightnorm`: each weight row reparameterized as `g * v / |v|`
//! - `dropout`: inverted dropout masks on hidden activations
//!
//! `selu` is the plain engine with the SELU activation. Trainable values
//! are exposed as ordered flat blocks so any optimizer can drive any
//! variant. Evaluation always goes through [`Model::to_eval_network`],
//! which folds normalization into effective weights and biases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{ActivationKind, Architecture, Network, Parameters};
use crate::rng::DrawStream;
use crate::train::LossKind;

pub const BN_EPS: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.9;

/// Normalization variant applied to a network for training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    None,
    Batchnorm,
    Weightnorm,
    Selu,
    Dropout { rate: f64 },
}

impl Normalization {
    pub fn name(self) -> &'static str {
        match self {
            Normalization::None => "none",
            Normalization::Batchnorm => "batchnorm",
            Normalization::Weightnorm => "weightnorm",
            Normalization::Selu => "selu",
            Normalization::Dropout { .. } => "dropout",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("dropout:") {
            let rate: f64 = rest
                .parse()
                .map_err(|_| Error::arg(format!("bad dropout rate `{rest}`")))?;
            return Ok(Normalization::Dropout { rate });
        }
        match s {
            "none" => Ok(Normalization::None),
            "batchnorm" | "bn" => Ok(Normalization::Batchnorm),
            "weightnorm" | "wn" => Ok(Normalization::Weightnorm),
            "selu" => Ok(Normalization::Selu),
            "dropout" => Ok(Normalization::Dropout { rate: 0.5 }),
            other => Err(Error::Unsupported(format!("unknown normalization `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
struct BnLayer {
    gamma: Vec<f64>,
    beta: Vec<f64>,
    running_mean: Vec<f64>,
    running_var: Vec<f64>,
}

#[derive(Debug, Clone)]
enum ModelKind {
    Plain,
    BatchNorm { bn: Vec<Option<BnLayer>> },
    WeightNorm { gains: Vec<Vec<f64>> },
    Dropout { rate: f64 },
}

/// A network prepared for training under a normalization mode.
#[derive(Debug, Clone)]
pub struct Model {
    arch: Architecture,
    activation: ActivationKind,
    /// Plain weights, or weight-norm directions `v` when reparameterized.
    params: Parameters,
    kind: ModelKind,
}

/// Everything the backward pass needs from a training-mode forward pass.
pub struct BatchCache {
    n: usize,
    /// x^0 .. x^L, batch-major flat.
    activities: Vec<Vec<f64>>,
    /// h^1 .. h^L before normalization.
    pre_norm: Vec<Vec<f64>>,
    /// Preactivations after normalization (aliases pre_norm values when no
    /// normalization applies to the layer).
    post_norm: Vec<Vec<f64>>,
    /// Batch mean/var per normalized layer.
    bn_mean: Vec<Vec<f64>>,
    bn_var: Vec<Vec<f64>>,
    /// Dropout masks (scaled by 1/(1-rate)); empty when unused.
    masks: Vec<f64>,
}

impl Model {
    /// Wraps a network in a normalization mode; `selu` swaps the
    /// activation, the others keep it.
    pub fn new(net: Network, norm: Normalization) -> Result<Model> {
        let arch = net.arch().clone();
        let activation = match norm {
            Normalization::Selu => ActivationKind::Selu,
            _ => net.activation(),
        };
        let params = net.params().clone();
        let kind = match norm {
            Normalization::None | Normalization::Selu => ModelKind::Plain,
            Normalization::Batchnorm => {
                let bn = (1..=arch.depth())
                    .map(|l| {
                        if arch.layer_has_activation(l) {
                            let w = arch.fan_out(l);
                            Some(BnLayer {
                                gamma: vec![1.0; w],
                                beta: vec![0.0; w],
                                running_mean: vec![0.0; w],
                                running_var: vec![1.0; w],
                            })
                        } else {
                            None
                        }
                    })
                    .collect();
                ModelKind::BatchNorm { bn }
            }
            Normalization::Weightnorm => {
                // g starts at |v| so the reparameterized map is the original.
                let gains = (1..=arch.depth())
                    .map(|l| {
                        let fan_in = arch.fan_in(l);
                        let w = &params.layers[l - 1].weights;
                        (0..arch.fan_out(l))
                            .map(|o| {
                                w[o * fan_in..(o + 1) * fan_in]
                                    .iter()
                                    .map(|v| v * v)
                                    .sum::<f64>()
                                    .sqrt()
                            })
                            .collect()
                    })
                    .collect();
                ModelKind::WeightNorm { gains }
            }
            Normalization::Dropout { rate } => {
                if !(0.0..1.0).contains(&rate) {
                    return Err(Error::arg(format!("dropout rate {rate} outside [0, 1)")));
                }
                ModelKind::Dropout { rate }
            }
        };
        Ok(Model {
            arch,
            activation,
            params,
            kind,
        })
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn normalization_name(&self) -> &'static str {
        match &self.kind {
            ModelKind::Plain if self.activation == ActivationKind::Selu => "selu",
            ModelKind::Plain => "none",
            ModelKind::BatchNorm { .. } => "batchnorm",
            ModelKind::WeightNorm { .. } => "weightnorm",
            ModelKind::Dropout { .. } => "dropout",
        }
    }

    /// Effective weight matrix of layer `l` (1-indexed) in evaluation form.
    fn effective_layer(&self, l: usize) -> (Vec<f64>, Vec<f64>) {
        let fan_in = self.arch.fan_in(l);
        let fan_out = self.arch.fan_out(l);
        let lp = &self.params.layers[l - 1];
        match &self.kind {
            ModelKind::WeightNorm { gains } => {
                let mut w = vec![0.0; fan_out * fan_in];
                for o in 0..fan_out {
                    let row = &lp.weights[o * fan_in..(o + 1) * fan_in];
                    let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let scale = if norm == 0.0 { 0.0 } else { gains[l - 1][o] / norm };
                    for (dst, src) in w[o * fan_in..(o + 1) * fan_in].iter_mut().zip(row) {
                        *dst = scale * src;
                    }
                }
                (w, lp.bias.clone())
            }
            ModelKind::BatchNorm { bn } => {
                if let Some(layer) = &bn[l - 1] {
                    // Fold eval-mode normalization into the affine map.
                    let mut w = lp.weights.clone();
                    let mut b = lp.bias.clone();
                    for o in 0..fan_out {
                        let a = layer.gamma[o] / (layer.running_var[o] + BN_EPS).sqrt();
                        for v in w[o * fan_in..(o + 1) * fan_in].iter_mut() {
                            *v *= a;
                        }
                        b[o] = a * (b[o] - layer.running_mean[o]) + layer.beta[o];
                    }
                    (w, b)
                } else {
                    (lp.weights.clone(), lp.bias.clone())
                }
            }
            _ => (lp.weights.clone(), lp.bias.clone()),
        }
    }

    /// Evaluation-mode network: normalization folded into plain weights.
    pub fn to_eval_network(&self) -> Network {
        let mut params = Parameters::zeros(&self.arch);
        for l in 1..=self.arch.depth() {
            let (w, b) = self.effective_layer(l);
            params.layers[l - 1].weights = w;
            params.layers[l - 1].bias = b;
        }
        let mut arch = self.arch.clone();
        if params
            .layers
            .iter()
            .any(|lp| lp.bias.iter().any(|&b| b != 0.0))
        {
            arch.bias_free = false;
        }
        Network::new(arch, params, self.activation).expect("eval network shapes")
    }

    /// Draws this step's dropout masks, or `None` for other modes.
    pub fn make_masks(&self, n: usize, stream: &mut DrawStream) -> Option<Vec<Vec<f64>>> {
        let ModelKind::Dropout { rate } = self.kind else {
            return None;
        };
        let keep = 1.0 / (1.0 - rate);
        let depth = self.arch.depth();
        Some(
            (1..depth)
                .map(|l| {
                    (0..n * self.arch.fan_out(l))
                        .map(|_| if stream.uniform01() < rate { 0.0 } else { keep })
                        .collect()
                })
                .collect(),
        )
    }

    /// Training-mode batch forward. `inputs` is flat `n x d_in`; `masks`
    /// must come from [`Model::make_masks`] for dropout models.
    pub fn forward_train(&self, inputs: &[f64], n: usize, masks: Option<&[Vec<f64>]>) -> BatchCache {
        assert_eq!(inputs.len(), n * self.arch.d_in);
        let depth = self.arch.depth();
        let mut activities = Vec::with_capacity(depth + 1);
        activities.push(inputs.to_vec());
        let mut pre_norm = Vec::with_capacity(depth);
        let mut post_norm = Vec::with_capacity(depth);
        let mut bn_mean = vec![Vec::new(); depth];
        let mut bn_var = vec![Vec::new(); depth];

        for l in 1..=depth {
            let fan_in = self.arch.fan_in(l);
            let fan_out = self.arch.fan_out(l);
            let (w, b) = match &self.kind {
                ModelKind::WeightNorm { .. } => self.effective_layer(l),
                _ => (
                    self.params.layers[l - 1].weights.clone(),
                    self.params.layers[l - 1].bias.clone(),
                ),
            };
            let x_prev = &activities[l - 1];
            let mut h = vec![0.0; n * fan_out];
            for s in 0..n {
                let xs = &x_prev[s * fan_in..(s + 1) * fan_in];
                let hs = &mut h[s * fan_out..(s + 1) * fan_out];
                for o in 0..fan_out {
                    let row = &w[o * fan_in..(o + 1) * fan_in];
                    let mut acc = b[o];
                    for (wv, xv) in row.iter().zip(xs.iter()) {
                        acc += wv * xv;
                    }
                    hs[o] = acc;
                }
            }

            let normalized = if let ModelKind::BatchNorm { bn } = &self.kind {
                if let Some(layer) = &bn[l - 1] {
                    let mut mean = vec![0.0; fan_out];
                    let mut var = vec![0.0; fan_out];
                    for s in 0..n {
                        for o in 0..fan_out {
                            mean[o] += h[s * fan_out + o];
                        }
                    }
                    for m in mean.iter_mut() {
                        *m /= n as f64;
                    }
                    for s in 0..n {
                        for o in 0..fan_out {
                            let d = h[s * fan_out + o] - mean[o];
                            var[o] += d * d;
                        }
                    }
                    for v in var.iter_mut() {
                        *v /= n as f64;
                    }
                    let mut hn = vec![0.0; n * fan_out];
                    for s in 0..n {
                        for o in 0..fan_out {
                            let xhat = (h[s * fan_out + o] - mean[o]) / (var[o] + BN_EPS).sqrt();
                            hn[s * fan_out + o] = layer.gamma[o] * xhat + layer.beta[o];
                        }
                    }
                    bn_mean[l - 1] = mean;
                    bn_var[l - 1] = var;
                    Some(hn)
                } else {
                    None
                }
            } else {
                None
            };
            let hh = normalized.unwrap_or_else(|| h.clone());

            let mut x = if self.arch.layer_has_activation(l) {
                hh.iter().map(|&v| self.activation.apply(v)).collect::<Vec<f64>>()
            } else {
                hh.clone()
            };
            if l < depth {
                if let Some(masks) = masks {
                    for (xv, mv) in x.iter_mut().zip(masks[l - 1].iter()) {
                        *xv *= mv;
                    }
                }
            }
            pre_norm.push(h);
            post_norm.push(hh);
            activities.push(x);
        }

        BatchCache {
            n,
            activities,
            pre_norm,
            post_norm,
            bn_mean,
            bn_var,
            masks: masks.map(|m| m.concat()).unwrap_or_default(),
        }
    }

    /// Network outputs of a training-mode forward pass.
    pub fn outputs<'c>(&self, cache: &'c BatchCache) -> &'c [f64] {
        cache.activities.last().unwrap()
    }

    /// Gradients of the mean batch loss for every trainable block, in
    /// [`Model::block_lens`] order.
    pub fn backward_batch(&self, cache: &BatchCache, labels: &[f64], loss: LossKind) -> Vec<Vec<f64>> {
        let n = cache.n;
        let depth = self.arch.depth();
        let d_out = self.arch.d_out();
        assert_eq!(labels.len(), n * d_out);
        let scale = 1.0 / (n as f64 * d_out as f64);

        let mut grads = self.zero_blocks();

        // dL/d(x^L).
        let outputs = self.outputs(cache);
        let mut delta_x: Vec<f64> = outputs
            .iter()
            .zip(labels.iter())
            .map(|(p, y)| loss.grad(*p, *y) * scale)
            .collect();

        let mut mask_offset = cache.masks.len();
        for l in (1..=depth).rev() {
            let fan_in = self.arch.fan_in(l);
            let fan_out = self.arch.fan_out(l);

            // Dropout backward (hidden layers only).
            if l < depth && !cache.masks.is_empty() {
                let len = n * fan_out;
                mask_offset -= len;
                let m = &cache.masks[mask_offset..mask_offset + len];
                for (dv, mv) in delta_x.iter_mut().zip(m.iter()) {
                    *dv *= mv;
                }
            }

            // Activation backward.
            let mut delta_post: Vec<f64> = if self.arch.layer_has_activation(l) {
                delta_x
                    .iter()
                    .zip(cache.post_norm[l - 1].iter())
                    .map(|(d, h)| d * self.activation.derivative(*h))
                    .collect()
            } else {
                std::mem::take(&mut delta_x)
            };

            // Normalization backward.
            let delta_h: Vec<f64> = if let ModelKind::BatchNorm { bn } = &self.kind {
                if let Some(layer) = &bn[l - 1] {
                    let mean = &cache.bn_mean[l - 1];
                    let var = &cache.bn_var[l - 1];
                    let h = &cache.pre_norm[l - 1];
                    let (dgamma, dbeta) = {
                        let gi = self.block_index_bn(l);
                        let (a, b) = grads.split_at_mut(gi + 1);
                        (&mut a[gi], &mut b[0])
                    };
                    let mut dxhat_sum = vec![0.0; fan_out];
                    let mut dxhat_dot = vec![0.0; fan_out];
                    let mut dxhat = vec![0.0; n * fan_out];
                    for s in 0..n {
                        for o in 0..fan_out {
                            let idx = s * fan_out + o;
                            let xhat = (h[idx] - mean[o]) / (var[o] + BN_EPS).sqrt();
                            dgamma[o] += delta_post[idx] * xhat;
                            dbeta[o] += delta_post[idx];
                            let dxh = delta_post[idx] * layer.gamma[o];
                            dxhat[idx] = dxh;
                            dxhat_sum[o] += dxh;
                            dxhat_dot[o] += dxh * xhat;
                        }
                    }
                    let mut dh = vec![0.0; n * fan_out];
                    let nf = n as f64;
                    for s in 0..n {
                        for o in 0..fan_out {
                            let idx = s * fan_out + o;
                            let xhat = (h[idx] - mean[o]) / (var[o] + BN_EPS).sqrt();
                            dh[idx] = (dxhat[idx] - dxhat_sum[o] / nf - xhat * dxhat_dot[o] / nf)
                                / (var[o] + BN_EPS).sqrt();
                        }
                    }
                    dh
                } else {
                    delta_post.clone()
                }
            } else {
                std::mem::take(&mut delta_post)
            };

            // Affine backward: weight/bias gradients and upstream delta.
            let x_prev = &cache.activities[l - 1];
            let (dw_idx, db_idx) = self.block_index_wb(l);
            {
                let dw_eff = {
                    // For weight norm the gradient first lands on the
                    // effective matrix, then maps onto (v, g).
                    let mut dw = vec![0.0; fan_out * fan_in];
                    for s in 0..n {
                        let xs = &x_prev[s * fan_in..(s + 1) * fan_in];
                        for o in 0..fan_out {
                            let d = delta_h[s * fan_out + o];
                            if d == 0.0 {
                                continue;
                            }
                            let row = &mut dw[o * fan_in..(o + 1) * fan_in];
                            for (rv, xv) in row.iter_mut().zip(xs.iter()) {
                                *rv += d * xv;
                            }
                        }
                    }
                    dw
                };
                for s in 0..n {
                    for o in 0..fan_out {
                        grads[db_idx][o] += delta_h[s * fan_out + o];
                    }
                }
                match &self.kind {
                    ModelKind::WeightNorm { gains } => {
                        let v = &self.params.layers[l - 1].weights;
                        let dg_idx = self.block_index_gain(l);
                        for o in 0..fan_out {
                            let row = &v[o * fan_in..(o + 1) * fan_in];
                            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
                            if norm == 0.0 {
                                continue;
                            }
                            let dwo = &dw_eff[o * fan_in..(o + 1) * fan_in];
                            let dot: f64 = dwo.iter().zip(row.iter()).map(|(a, b)| a * b).sum::<f64>() / norm;
                            grads[dg_idx][o] = dot;
                            let g = gains[l - 1][o];
                            let dv = &mut grads[dw_idx][o * fan_in..(o + 1) * fan_in];
                            for i in 0..fan_in {
                                dv[i] = g / norm * (dwo[i] - dot * row[i] / norm);
                            }
                        }
                    }
                    _ => grads[dw_idx].copy_from_slice(&dw_eff),
                }
            }

            if l > 1 {
                let (w_eff, _) = match &self.kind {
                    ModelKind::WeightNorm { .. } => self.effective_layer(l),
                    _ => (
                        self.params.layers[l - 1].weights.clone(),
                        Vec::new(),
                    ),
                };
                let mut up = vec![0.0; n * fan_in];
                for s in 0..n {
                    let dst = &mut up[s * fan_in..(s + 1) * fan_in];
                    for o in 0..fan_out {
                        let d = delta_h[s * fan_out + o];
                        if d == 0.0 {
                            continue;
                        }
                        let row = &w_eff[o * fan_in..(o + 1) * fan_in];
                        for (uv, wv) in dst.iter_mut().zip(row.iter()) {
                            *uv += wv * d;
                        }
                    }
                }
                delta_x = up;
            }
        }
        grads
    }

    /// Folds this batch's statistics into the running estimates.
    pub fn update_running_stats(&mut self, cache: &BatchCache) {
        if let ModelKind::BatchNorm { bn } = &mut self.kind {
            for (layer, (mean, var)) in bn
                .iter_mut()
                .zip(cache.bn_mean.iter().zip(cache.bn_var.iter()))
            {
                if let Some(layer) = layer {
                    for (r, m) in layer.running_mean.iter_mut().zip(mean.iter()) {
                        *r = BN_MOMENTUM * *r + (1.0 - BN_MOMENTUM) * m;
                    }
                    for (r, v) in layer.running_var.iter_mut().zip(var.iter()) {
                        *r = BN_MOMENTUM * *r + (1.0 - BN_MOMENTUM) * v;
                    }
                }
            }
        }
    }

    // Block layout. Per layer: weights, bias, then (gamma, beta) for
    // batch-normalized layers or (gain,) for weight norm.
    fn layer_block_count(&self, l: usize) -> usize {
        match &self.kind {
            ModelKind::BatchNorm { bn } if bn[l - 1].is_some() => 4,
            ModelKind::WeightNorm { .. } => 3,
            _ => 2,
        }
    }

    fn block_index_wb(&self, l: usize) -> (usize, usize) {
        let base: usize = (1..l).map(|k| self.layer_block_count(k)).sum();
        (base, base + 1)
    }

    fn block_index_bn(&self, l: usize) -> usize {
        self.block_index_wb(l).0 + 2
    }

    fn block_index_gain(&self, l: usize) -> usize {
        self.block_index_wb(l).0 + 2
    }

    pub fn block_lens(&self) -> Vec<usize> {
        let mut lens = Vec::new();
        for l in 1..=self.arch.depth() {
            let fan_in = self.arch.fan_in(l);
            let fan_out = self.arch.fan_out(l);
            lens.push(fan_in * fan_out);
            lens.push(fan_out);
            match &self.kind {
                ModelKind::BatchNorm { bn } if bn[l - 1].is_some() => {
                    lens.push(fan_out);
                    lens.push(fan_out);
                }
                ModelKind::WeightNorm { .. } => lens.push(fan_out),
                _ => {}
            }
        }
        lens
    }

    fn zero_blocks(&self) -> Vec<Vec<f64>> {
        self.block_lens().into_iter().map(|n| vec![0.0; n]).collect()
    }

    /// Mutable views of every trainable block, in [`Model::block_lens`] order.
    pub fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let Model { params, kind, .. } = self;
        let mut bn_layers: Vec<Option<(&mut [f64], &mut [f64])>> = Vec::new();
        let mut gain_layers: Vec<&mut [f64]> = Vec::new();
        match kind {
            ModelKind::BatchNorm { bn } => {
                for layer in bn.iter_mut() {
                    bn_layers.push(
                        layer
                            .as_mut()
                            .map(|b| (b.gamma.as_mut_slice(), b.beta.as_mut_slice())),
                    );
                }
            }
            ModelKind::WeightNorm { gains } => {
                for g in gains.iter_mut() {
                    gain_layers.push(g.as_mut_slice());
                }
            }
            _ => {}
        }
        let mut out: Vec<&mut [f64]> = Vec::new();
        let mut bn_iter = bn_layers.into_iter();
        let mut gain_iter = gain_layers.into_iter();
        for lp in params.layers.iter_mut() {
            out.push(lp.weights.as_mut_slice());
            out.push(lp.bias.as_mut_slice());
            if let Some(Some((gamma, beta))) = bn_iter.next() {
                out.push(gamma);
                out.push(beta);
            }
            if let Some(g) = gain_iter.next() {
                out.push(g);
            }
        }
        out
    }

    /// Read-only copies of every trainable block (test support).
    pub fn blocks(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for l in 1..=self.arch.depth() {
            let lp = &self.params.layers[l - 1];
            out.push(lp.weights.clone());
            out.push(lp.bias.clone());
            match &self.kind {
                ModelKind::BatchNorm { bn } => {
                    if let Some(b) = &bn[l - 1] {
                        out.push(b.gamma.clone());
                        out.push(b.beta.clone());
                    }
                }
                ModelKind::WeightNorm { gains } => out.push(gains[l - 1].clone()),
                _ => {}
            }
        }
        out
    }

    /// Overwrites every trainable block (test support; the finite-difference
    /// probe drives parameters through this).
    pub fn set_blocks(&mut self, blocks: &[Vec<f64>]) {
        let mut views = self.blocks_mut();
        assert_eq!(views.len(), blocks.len());
        for (dst, src) in views.iter_mut().zip(blocks.iter()) {
            dst.copy_from_slice(src);
        }
    }

    /// Mean batch loss of a training-mode pass (no state updates).
    pub fn train_loss(&self, inputs: &[f64], labels: &[f64], n: usize, masks: Option<&[Vec<f64>]>, loss: LossKind) -> f64 {
        let cache = self.forward_train(inputs, n, masks);
        let outputs = self.outputs(&cache);
        crate::train::loss_value(loss, outputs, labels).expect("shapes")
    }
}

/// Spec-level entry point: wraps a network for training under `mode`.
pub fn apply_normalization(net: Network, mode: Normalization) -> Result<Model> {
    Model::new(net, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init::{init_parameters, BiasMode, InitializerSpec, Scheme};
    use crate::net::{backward, ActivationKind, Architecture, Network};
    use crate::targets::{sample_dataset, Dataset, TargetId};

    fn random_net(seed: u64, widths: Vec<usize>, d_in: usize) -> Network {
        let arch = Architecture::new(d_in, widths, false, false).unwrap();
        let spec = InitializerSpec {
            scheme: Scheme::HeNormal,
            bias_mode: BiasMode::Symmetric,
            seed,
        };
        Network::new(arch.clone(), init_parameters(&arch, &spec), ActivationKind::Relu).unwrap()
    }

    fn batch(target: TargetId, n: usize, seed: u64) -> Dataset {
        sample_dataset(target, n, seed).unwrap()
    }

    /// Central-difference gradient over every model block.
    fn fd_grads(model: &Model, inputs: &[f64], labels: &[f64], n: usize, masks: Option<&[Vec<f64>]>, loss: LossKind) -> Vec<Vec<f64>> {
        let eps = 1e-6;
        let mut probe = model.clone();
        let base = probe.blocks();
        let mut out = Vec::new();
        for (bi, blk) in base.iter().enumerate() {
            let mut g = vec![0.0; blk.len()];
            for i in 0..blk.len() {
                let mut plus = base.clone();
                plus[bi][i] += eps;
                probe.set_blocks(&plus);
                let lp = probe.train_loss(inputs, labels, n, masks, loss);
                let mut minus = base.clone();
                minus[bi][i] -= eps;
                probe.set_blocks(&minus);
                let lm = probe.train_loss(inputs, labels, n, masks, loss);
                g[i] = (lp - lm) / (2.0 * eps);
            }
            out.push(g);
        }
        probe.set_blocks(&base);
        out
    }

    fn assert_grads_close(analytic: &[Vec<f64>], numeric: &[Vec<f64>], tol: f64) {
        assert_eq!(analytic.len(), numeric.len());
        for (a, b) in analytic.iter().zip(numeric.iter()) {
            for (x, y) in a.iter().zip(b.iter()) {
                let gap = (x - y).abs() / x.abs().max(y.abs()).max(1.0);
                assert!(gap < tol, "grad mismatch: {x} vs {y}");
            }
        }
    }

    #[test]
    fn plain_model_matches_network_backward() {
        let net = random_net(3, vec![4, 3, 1], 1);
        let model = Model::new(net.clone(), Normalization::None).unwrap();
        let ds = batch(TargetId::Abs1d, 16, 5);
        let cache = model.forward_train(ds.inputs_flat(), ds.n, None);
        let grads = model.backward_batch(&cache, ds.labels_flat(), LossKind::Mse);
        let reference = backward(&net, &ds, LossKind::Mse).unwrap();
        for l in 0..3 {
            for (a, b) in grads[2 * l].iter().zip(reference.d_weights[l].iter()) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
            for (a, b) in grads[2 * l + 1].iter().zip(reference.d_biases[l].iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn batchnorm_gradients_match_finite_differences() {
        let net = random_net(7, vec![4, 4, 1], 1);
        let model = Model::new(net, Normalization::Batchnorm).unwrap();
        let ds = batch(TargetId::Abs1d, 12, 9);
        let cache = model.forward_train(ds.inputs_flat(), ds.n, None);
        let grads = model.backward_batch(&cache, ds.labels_flat(), LossKind::Mse);
        let fd = fd_grads(&model, ds.inputs_flat(), ds.labels_flat(), ds.n, None, LossKind::Mse);
        assert_grads_close(&grads, &fd, 1e-4);
    }

    #[test]
    fn weightnorm_gradients_match_finite_differences() {
        let net = random_net(11, vec![3, 3, 1], 1);
        let model = Model::new(net, Normalization::Weightnorm).unwrap();
        let ds = batch(TargetId::Abs1d, 10, 13);
        let cache = model.forward_train(ds.inputs_flat(), ds.n, None);
        let grads = model.backward_batch(&cache, ds.labels_flat(), LossKind::Mse);
        let fd = fd_grads(&model, ds.inputs_flat(), ds.labels_flat(), ds.n, None, LossKind::Mse);
        assert_grads_close(&grads, &fd, 1e-4);
    }

    #[test]
    fn dropout_gradients_match_finite_differences_with_fixed_mask() {
        let net = random_net(17, vec![4, 4, 1], 1);
        let model = Model::new(net, Normalization::Dropout { rate: 0.4 }).unwrap();
        let ds = batch(TargetId::Abs1d, 8, 19);
        let mut stream = crate::rng::DrawStream::new(23);
        let masks = model.make_masks(ds.n, &mut stream).unwrap();
        let cache = model.forward_train(ds.inputs_flat(), ds.n, Some(&masks));
        let grads = model.backward_batch(&cache, ds.labels_flat(), LossKind::Mse);
        let fd = fd_grads(&model, ds.inputs_flat(), ds.labels_flat(), ds.n, Some(&masks), LossKind::Mse);
        assert_grads_close(&grads, &fd, 1e-4);
    }

    #[test]
    fn selu_gradients_match_finite_differences() {
        let net = random_net(29, vec![4, 4, 1], 1);
        let model = Model::new(net, Normalization::Selu).unwrap();
        let ds = batch(TargetId::Abs1d, 12, 31);
        let cache = model.forward_train(ds.inputs_flat(), ds.n, None);
        let grads = model.backward_batch(&cache, ds.labels_flat(), LossKind::Mse);
        let fd = fd_grads(&model, ds.inputs_flat(), ds.labels_flat(), ds.n, None, LossKind::Mse);
        assert_grads_close(&grads, &fd, 1e-4);
    }

    #[test]
    fn weightnorm_reparameterization_is_exact_at_setup() {
        let net = random_net(37, vec![5, 3, 2], 2);
        let model = Model::new(net.clone(), Normalization::Weightnorm).unwrap();
        let eval = model.to_eval_network();
        let ds = batch(TargetId::Abs2d, 32, 41);
        for i in 0..ds.n {
            let a = net.output(ds.input(i)).unwrap();
            let b = eval.output(ds.input(i)).unwrap();
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).abs() < 1e-12, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn batchnorm_on_constant_zero_batch_outputs_beta() {
        // All-zero weights: h == 0 on the whole batch; the variance guard
        // makes the normalized value 0 so the output is beta (= 0 at init,
        // then whatever beta trains to).
        let arch = Architecture::new(1, vec![2, 1], false, false).unwrap();
        let params = crate::net::Parameters::zeros(&arch);
        let net = Network::new(arch, params, ActivationKind::Relu).unwrap();
        let mut model = Model::new(net, Normalization::Batchnorm).unwrap();
        // Nudge beta to a recognizable value.
        {
            let mut blocks = model.blocks();
            blocks[3] = vec![0.25, -0.5]; // beta of layer 1
            model.set_blocks(&blocks);
        }
        let inputs = vec![0.4, -1.0, 0.9];
        let cache = model.forward_train(&inputs, 3, None);
        for s in 0..3 {
            assert_eq!(cache.post_norm[0][s * 2], 0.25);
            assert_eq!(cache.post_norm[0][s * 2 + 1], -0.5);
        }
    }

    #[test]
    fn dropout_rate_zero_is_identity() {
        let net = random_net(43, vec![4, 2], 1);
        let plain = Model::new(net.clone(), Normalization::None).unwrap();
        let dropout = Model::new(net, Normalization::Dropout { rate: 0.0 }).unwrap();
        let ds = batch(TargetId::Abs1d, 16, 47);
        let mut stream = crate::rng::DrawStream::new(1);
        let masks = dropout.make_masks(ds.n, &mut stream).unwrap();
        let a = plain.forward_train(ds.inputs_flat(), ds.n, None);
        let b = dropout.forward_train(ds.inputs_flat(), ds.n, Some(&masks));
        assert_eq!(plain.outputs(&a), dropout.outputs(&b));
    }

    #[test]
    fn batchnorm_running_stats_fold_into_eval_network() {
        let net = random_net(53, vec![4, 1], 1);
        let mut model = Model::new(net, Normalization::Batchnorm).unwrap();
        let ds = batch(TargetId::Abs1d, 64, 59);
        for _ in 0..200 {
            let cache = model.forward_train(ds.inputs_flat(), ds.n, None);
            model.update_running_stats(&cache);
        }
        // After many identical batches the running stats match the batch
        // stats, so eval-mode output equals train-mode output.
        let cache = model.forward_train(ds.inputs_flat(), ds.n, None);
        let eval = model.to_eval_network();
        for i in 0..ds.n {
            let train_out = model.outputs(&cache)[i];
            let eval_out = eval.output(ds.input(i)).unwrap()[0];
            assert!((train_out - eval_out).abs() < 1e-6, "{train_out} vs {eval_out}");
        }
    }
}
