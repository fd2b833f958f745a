//! Reverse-mode gradients and the finite-difference oracle.

use crate::error::{Error, Result};
use crate::targets::Dataset;
use crate::train::LossKind;

use super::{GradientSet, Network};

/// Gradients of the mean batch loss with respect to every weight and bias.
///
/// The ReLU subgradient at exactly 0 is taken as 0, so a layer whose
/// activity is identically zero on the batch produces exactly zero
/// gradients for itself and every earlier layer.
pub fn backward(net: &Network, batch: &Dataset, loss: LossKind) -> Result<GradientSet> {
    if batch.n == 0 {
        return Err(Error::arg("batch must be non-empty"));
    }
    if batch.d_in != net.arch().d_in || batch.d_out != net.arch().d_out() {
        return Err(Error::shape(format!(
            "batch is {}->{}, network is {}->{}",
            batch.d_in,
            batch.d_out,
            net.arch().d_in,
            net.arch().d_out()
        )));
    }
    let arch = net.arch();
    let depth = arch.depth();
    let mut grads = GradientSet::zeros(arch);
    // Mean over batch entries and output components.
    let scale = 1.0 / (batch.n as f64 * batch.d_out as f64);

    for s in 0..batch.n {
        let input = batch.input(s);
        let target = batch.label(s);
        let trace = net.forward(input)?;

        // delta holds dL/dh^l while walking backwards.
        let mut delta: Vec<f64> = trace
            .output()
            .iter()
            .zip(target.iter())
            .map(|(p, y)| loss.grad(*p, *y) * scale)
            .collect();
        if arch.last_layer_relu {
            for (d, h) in delta.iter_mut().zip(trace.preactivations[depth - 1].iter()) {
                *d *= net.activation().derivative(*h);
            }
        }

        for l in (1..=depth).rev() {
            let fan_in = arch.fan_in(l);
            let fan_out = arch.fan_out(l);
            let x_prev: &[f64] = if l == 1 {
                input
            } else {
                &trace.activations[l - 2]
            };
            let dw = &mut grads.d_weights[l - 1];
            let db = &mut grads.d_biases[l - 1];
            for o in 0..fan_out {
                let d = delta[o];
                db[o] += d;
                let row = &mut dw[o * fan_in..(o + 1) * fan_in];
                for (slot, xv) in row.iter_mut().zip(x_prev.iter()) {
                    *slot += d * xv;
                }
            }
            if l > 1 {
                let weights = &net.params().layers[l - 1].weights;
                let mut next = vec![0.0; fan_in];
                for o in 0..fan_out {
                    let d = delta[o];
                    let row = &weights[o * fan_in..(o + 1) * fan_in];
                    for (nv, w) in next.iter_mut().zip(row.iter()) {
                        *nv += w * d;
                    }
                }
                let h_prev = &trace.preactivations[l - 2];
                for (nv, h) in next.iter_mut().zip(h_prev.iter()) {
                    *nv *= net.activation().derivative(*h);
                }
                delta = next;
            }
        }
    }
    Ok(grads)
}

/// Mean batch loss of a network; shared by the finite-difference oracle
/// and the training diagnostics.
pub(crate) fn batch_loss(net: &Network, batch: &Dataset, loss: LossKind) -> Result<f64> {
    let mut acc = 0.0;
    for s in 0..batch.n {
        let out = net.forward(batch.input(s))?;
        for (p, y) in out.output().iter().zip(batch.label(s).iter()) {
            acc += loss.pointwise(*p, *y);
        }
    }
    Ok(acc / (batch.n as f64 * batch.d_out as f64))
}

/// Central-difference estimate of every parameter gradient.
pub fn finite_diff_grad(net: &Network, batch: &Dataset, loss: LossKind, eps: f64) -> Result<GradientSet> {
    if eps <= 0.0 {
        return Err(Error::arg("eps must be > 0"));
    }
    if batch.n == 0 {
        return Err(Error::arg("batch must be non-empty"));
    }
    let mut probe = net.clone();
    let mut grads = GradientSet::zeros(net.arch());
    for l in 0..net.arch().depth() {
        for i in 0..net.params().layers[l].weights.len() {
            let orig = probe.params().layers[l].weights[i];
            probe.params_mut().layers[l].weights[i] = orig + eps;
            let plus = batch_loss(&probe, batch, loss)?;
            probe.params_mut().layers[l].weights[i] = orig - eps;
            let minus = batch_loss(&probe, batch, loss)?;
            probe.params_mut().layers[l].weights[i] = orig;
            grads.d_weights[l][i] = (plus - minus) / (2.0 * eps);
        }
        for i in 0..net.params().layers[l].bias.len() {
            let orig = probe.params().layers[l].bias[i];
            probe.params_mut().layers[l].bias[i] = orig + eps;
            let plus = batch_loss(&probe, batch, loss)?;
            probe.params_mut().layers[l].bias[i] = orig - eps;
            let minus = batch_loss(&probe, batch, loss)?;
            probe.params_mut().layers[l].bias[i] = orig;
            grads.d_biases[l][i] = (plus - minus) / (2.0 * eps);
        }
    }
    Ok(grads)
}
