//! Monte Carlo estimation of collapse probabilities at initialization.
//!
//! Zero tests compare against 0.0 exactly: with zero biases a ReLU unit
//! outputs the literal float 0.0 whenever its preactivation is
//! nonpositive, so no tolerance is involved. Samples are independent;
//! sample `i` of a run draws from seed `split2(seed, SAMPLE, i)`, which
//! fixes the estimate regardless of how the samples are partitioned.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::init::{init_parameters, lsuv_rescale, BiasMode, InitializerSpec, Scheme};
use crate::net::{ActivationKind, Architecture, Network};
use crate::rng::{split, split2, DrawStream};

/// 95% two-sided normal quantile.
const Z95: f64 = 1.959963984540054;

const SAMPLE_TAG: u64 = 0x5a;
const CELL_TAG: u64 = 0x5b;
/// Fixed internal seed for the d_in >= 2 direction set and LSUV probes.
const FIXED_PROBE_SEED: u64 = 0x636f6c6c61707365;

/// A binomial estimate with its 95% Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub p_hat: f64,
    pub n: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    assert!(n > 0 && successes <= n);
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    // The score interval endpoints are exactly 0 / 1 at the boundary
    // counts; keep them free of rounding residue.
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

fn make_estimate(hits: u64, n: u64, seed: u64) -> MCEstimate {
    let (ci_low, ci_high) = wilson_interval(hits, n);
    MCEstimate {
        p_hat: hits as f64 / n as f64,
        n,
        ci_low,
        ci_high,
        seed,
    }
}

/// Draws one network for sample `i` of a run, applying the LSUV rescale
/// when the scheme asks for it.
fn sample_network(arch: &Architecture, spec: &InitializerSpec, run_seed: u64, i: u64) -> Network {
    let sample_spec = InitializerSpec {
        seed: split2(run_seed, SAMPLE_TAG, i),
        ..*spec
    };
    let net = Network::new(
        arch.clone(),
        init_parameters(arch, &sample_spec),
        ActivationKind::Relu,
    )
    .expect("initializer shapes");
    if spec.scheme == Scheme::Lsuv {
        let probe = lsuv_probe(arch.d_in);
        let (rescaled, _) = lsuv_rescale(&net, &probe);
        rescaled
    } else {
        net
    }
}

fn lsuv_probe(d_in: usize) -> Vec<Vec<f64>> {
    let mut s = DrawStream::new(split(FIXED_PROBE_SEED, 1));
    (0..32)
        .map(|_| (0..d_in).map(|_| s.normal()).collect())
        .collect()
}

/// Fraction of initializations mapping `input` to the exact zero vector.
pub fn estimate_zero_at_point(
    arch: &Architecture,
    spec: &InitializerSpec,
    input: &[f64],
    n: u64,
    seed: u64,
) -> Result<MCEstimate> {
    if n == 0 {
        return Err(Error::arg("sample count must be >= 1"));
    }
    if input.len() != arch.d_in {
        return Err(Error::shape("input length differs from d_in"));
    }
    let zero_bias = arch.bias_free || spec.bias_mode == BiasMode::Zero;
    if zero_bias && input.iter().all(|&v| v == 0.0) {
        return Err(Error::arg(
            "zero input with zero biases is degenerate: the output is always zero",
        ));
    }
    let mut hits = 0u64;
    let mut out = vec![0.0; arch.d_out()];
    for i in 0..n {
        let net = sample_network(arch, spec, seed, i);
        let mut scratch = vec![0.0; net.scratch_len()];
        net.output_into(input, &mut scratch, &mut out);
        if out.iter().all(|&v| v == 0.0) {
            hits += 1;
        }
    }
    Ok(make_estimate(hits, n, seed))
}

/// Fraction of initializations for which the whole network is the zero
/// function.
///
/// Bias-free networks with scalar input are linear on each side of the
/// origin, so testing the inputs +1 and -1 decides the question exactly.
/// For d_in >= 2 the test evaluates 64 fixed unit directions, a
/// documented proxy that can only overestimate the zero set.
pub fn estimate_zero_function(
    arch: &Architecture,
    spec: &InitializerSpec,
    n: u64,
    seed: u64,
) -> Result<MCEstimate> {
    if n == 0 {
        return Err(Error::arg("sample count must be >= 1"));
    }
    if !arch.bias_free || spec.bias_mode != BiasMode::Zero {
        return Err(Error::arg(
            "the zero-function test applies to bias-free networks only",
        ));
    }
    let probes: Vec<Vec<f64>> = if arch.d_in == 1 {
        vec![vec![1.0], vec![-1.0]]
    } else {
        let mut s = DrawStream::new(split(FIXED_PROBE_SEED, 2));
        (0..64)
            .map(|_| {
                let mut v: Vec<f64> = (0..arch.d_in).map(|_| s.normal()).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                for x in v.iter_mut() {
                    *x /= norm;
                }
                v
            })
            .collect()
    };
    let mut hits = 0u64;
    let mut out = vec![0.0; arch.d_out()];
    for i in 0..n {
        let net = sample_network(arch, spec, seed, i);
        let mut scratch = vec![0.0; net.scratch_len()];
        let mut all_zero = true;
        for p in &probes {
            net.output_into(p, &mut scratch, &mut out);
            if out.iter().any(|&v| v != 0.0) {
                all_zero = false;
                break;
            }
        }
        if all_zero {
            hits += 1;
        }
    }
    Ok(make_estimate(hits, n, seed))
}

/// Fraction of initializations whose output at `input` equals the last
/// bias vector exactly (the affine tail passes the bias through iff the
/// penultimate activity is zero).
pub fn estimate_matches_last_bias(
    arch: &Architecture,
    spec: &InitializerSpec,
    input: &[f64],
    n: u64,
    seed: u64,
) -> Result<MCEstimate> {
    if n == 0 {
        return Err(Error::arg("sample count must be >= 1"));
    }
    if arch.last_layer_relu {
        return Err(Error::arg("the last layer must be affine for the bias test"));
    }
    if arch.depth() < 2 {
        return Err(Error::arg("a one-layer affine map never equals its bias"));
    }
    if arch.bias_free || spec.bias_mode == BiasMode::Zero {
        return Err(Error::arg("the bias-match test needs nonzero biases"));
    }
    let mut hits = 0u64;
    let mut out = vec![0.0; arch.d_out()];
    for i in 0..n {
        let net = sample_network(arch, spec, seed, i);
        let mut scratch = vec![0.0; net.scratch_len()];
        net.output_into(input, &mut scratch, &mut out);
        let last_bias = &net.params().layers[arch.depth() - 1].bias;
        if out.iter().zip(last_bias.iter()).all(|(a, b)| a == b) {
            hits += 1;
        }
    }
    Ok(make_estimate(hits, n, seed))
}

/// One cell of a (width, depth, scheme) sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepCell {
    pub width: usize,
    pub depth: usize,
    pub scheme: String,
    pub estimate: MCEstimate,
}

fn scheme_tag(scheme: Scheme) -> u64 {
    match scheme {
        Scheme::HeNormal => 1,
        Scheme::LecunNormal => 2,
        Scheme::GlorotUniform => 3,
        Scheme::SymmetricNormal { .. } => 4,
        Scheme::SymmetricUniform => 5,
        Scheme::Rademacher => 6,
        Scheme::Orthogonal => 7,
        Scheme::Lsuv => 8,
    }
}

/// Zero-function probability over a (width, depth, scheme) grid of
/// bias-free scalar-input chains with ReLU on every layer. Cell seeds
/// derive from the cell coordinates, so results do not depend on grid
/// order or partitioning.
pub fn sweep(
    widths: &[usize],
    depths: &[usize],
    schemes: &[Scheme],
    n: u64,
    seed: u64,
) -> Result<Vec<SweepCell>> {
    if widths.is_empty() || depths.is_empty() || schemes.is_empty() {
        return Err(Error::arg("sweep grids must be non-empty"));
    }
    let mut out = Vec::with_capacity(widths.len() * depths.len() * schemes.len());
    for &width in widths {
        for &depth in depths {
            let arch = Architecture::chain(1, width, depth, true, true)?;
            for &scheme in schemes {
                let cell_seed = split2(split2(seed, CELL_TAG, width as u64), depth as u64, scheme_tag(scheme));
                let spec = InitializerSpec {
                    scheme,
                    bias_mode: BiasMode::Zero,
                    seed: cell_seed,
                };
                let estimate = estimate_zero_function(&arch, &spec, n, cell_seed)?;
                out.push(SweepCell {
                    width,
                    depth,
                    scheme: scheme.name().to_string(),
                    estimate,
                });
            }
        }
    }
    Ok(out)
}
