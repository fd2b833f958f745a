//! Layer-sequential unit-variance rescaling.

use crate::net::Network;

/// Outcome of [`lsuv_rescale`].
#[derive(Debug, Clone)]
pub struct LsuvReport {
    /// Cumulative weight scale applied per layer (1.0 when untouched).
    pub scales: Vec<f64>,
    /// Rescale iterations used per layer.
    pub iterations: Vec<usize>,
    /// Layers whose preactivations had zero variance on the probe batch;
    /// rescaling cannot change a dead layer, so they are left as-is.
    pub dead_layers: Vec<usize>,
}

const STD_LO: f64 = 0.95;
const STD_HI: f64 = 1.05;
const MAX_ITERS: usize = 10;

/// Rescales each layer's weights so the preactivation standard deviation
/// on the probe batch lands in [0.95, 1.05], walking layers front to back.
///
/// Scaling is strictly positive, so no preactivation changes sign; a layer
/// with zero output variance (everything dead) is flagged and skipped.
/// Biases are untouched; the procedure expects the zero biases of an
/// orthogonal initialization.
pub fn lsuv_rescale(net: &Network, probe_inputs: &[Vec<f64>]) -> (Network, LsuvReport) {
    assert!(!probe_inputs.is_empty(), "probe batch must be non-empty");
    let depth = net.arch().depth();
    let mut out = net.clone();
    let mut report = LsuvReport {
        scales: vec![1.0; depth],
        iterations: vec![0; depth],
        dead_layers: Vec::new(),
    };
    for l in 1..=depth {
        for _ in 0..MAX_ITERS {
            let std = layer_preactivation_std(&out, probe_inputs, l);
            if std == 0.0 {
                report.dead_layers.push(l);
                break;
            }
            if (STD_LO..=STD_HI).contains(&std) {
                break;
            }
            let factor = 1.0 / std;
            for w in out.params_mut().layers[l - 1].weights.iter_mut() {
                *w *= factor;
            }
            report.scales[l - 1] *= factor;
            report.iterations[l - 1] += 1;
        }
    }
    (out, report)
}

/// Population standard deviation of all layer-`l` preactivation entries
/// over the probe batch.
fn layer_preactivation_std(net: &Network, probe_inputs: &[Vec<f64>], layer: usize) -> f64 {
    let mut acc = 0.0f64;
    let mut acc2 = 0.0f64;
    let mut count = 0usize;
    for x in probe_inputs {
        let trace = net.forward(x).expect("probe input shape");
        for &h in &trace.preactivations[layer - 1] {
            acc += h;
            acc2 += h * h;
            count += 1;
        }
    }
    let n = count as f64;
    let mean = acc / n;
    let var = (acc2 / n - mean * mean).max(0.0);
    var.sqrt()
}
