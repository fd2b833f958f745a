//! Detection and classification of collapsed networks.
//!
//! A trained or initialized network is compared against its target on a
//! dense grid: it is `fitted` when it tracks the target, `full_collapse`
//! when it is a single constant, `partial_collapse` when it is constant on
//! erroneous plateaus while fitting elsewhere, and `other` otherwise. The
//! module also houses the zero-layer search, the per-layer gradient-norm
//! verification, and the mean/median oracle for each target.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{backward, Network};
use crate::targets::{evaluate, Dataset, TargetId, DOMAIN_HALF_WIDTH};
use crate::train::LossKind;

/// A finite raster over the input domain, row-major over axes.
#[derive(Debug, Clone)]
pub struct Grid {
    pub d_in: usize,
    /// Points per axis.
    pub per_axis: usize,
    points: Vec<f64>,
}

/// Default rasterization density per input dimension.
pub const DEFAULT_GRID_PER_AXIS: usize = 2048;

impl Grid {
    /// Uniform grid with `per_axis` points per dimension spanning the
    /// target domain.
    pub fn uniform(d_in: usize, per_axis: usize) -> Grid {
        assert!(d_in >= 1 && per_axis >= 2);
        let a = DOMAIN_HALF_WIDTH;
        let axis: Vec<f64> = (0..per_axis)
            .map(|i| -a + 2.0 * a * i as f64 / (per_axis - 1) as f64)
            .collect();
        let n = per_axis.pow(d_in as u32);
        let mut points = vec![0.0; n * d_in];
        for i in 0..n {
            let mut rem = i;
            // Last axis varies fastest.
            for d in (0..d_in).rev() {
                points[i * d_in + d] = axis[rem % per_axis];
                rem /= per_axis;
            }
        }
        Grid {
            d_in,
            per_axis,
            points,
        }
    }

    pub fn default_for(d_in: usize) -> Grid {
        Grid::uniform(d_in, DEFAULT_GRID_PER_AXIS)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len() / self.d_in
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.d_in..(i + 1) * self.d_in]
    }

    /// Row-major neighbor indices (forward only: +1 along each axis).
    fn forward_neighbors(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.d_in);
        let mut stride = 1usize;
        for d in (0..self.d_in).rev() {
            let coord = (i / stride) % self.per_axis;
            if coord + 1 < self.per_axis {
                out.push(i + stride);
            }
            let _ = d;
            stride *= self.per_axis;
        }
        out
    }
}

/// Classification outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollapseKind {
    Fitted,
    FullCollapse,
    PartialCollapse,
    Other,
}

/// One erroneous constant plateau.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionReport {
    /// Bounding box of the plateau.
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Network constant over the plateau (grid mean).
    pub constant: Vec<f64>,
    /// Target conditional mean over the plateau points.
    pub conditional_mean: Vec<f64>,
    pub points: usize,
}

/// Full classification record attached to training reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CollapseReport {
    pub kind: CollapseKind,
    /// Smallest activation layer that is identically zero on the grid.
    pub zero_layer: Option<usize>,
    /// Constant value when `kind == FullCollapse`.
    pub constant_value: Option<Vec<f64>>,
    /// Plateaus when `kind == PartialCollapse`.
    pub regions: Vec<RegionReport>,
    /// Largest gradient magnitude over layers 1..=zero_layer (the whole
    /// net when no zero layer exists), computed on the grid as a dataset.
    pub max_grad_norm_prefix: f64,
    /// Whether the collapse constant matches the loss-appropriate target
    /// statistic (mean for MSE, median set for MAE) within tolerance.
    pub stat_match: Option<bool>,
}

/// Smallest activation layer `l` with `x^l` exactly zero on every grid
/// point, if any.
///
/// For bias-free networks every layer after a zero layer is zero as well;
/// this is asserted because exact zeros propagate exactly.
pub fn detect_zero_layer(net: &Network, grid: &Grid) -> Option<usize> {
    let depth = net.arch().depth();
    let mut all_zero = vec![true; depth];
    for i in 0..grid.len() {
        let trace = net.forward(grid.point(i)).expect("grid point shape");
        let mut any_candidate = false;
        for l in 1..=depth {
            if all_zero[l - 1]
                && (!net.arch().layer_has_activation(l)
                    || trace.activations[l - 1].iter().any(|&v| v != 0.0))
            {
                all_zero[l - 1] = false;
            }
            any_candidate |= all_zero[l - 1];
        }
        if !any_candidate {
            return None;
        }
    }
    let first = (1..=depth).find(|&l| all_zero[l - 1]);
    if let Some(l) = first {
        if net.arch().bias_free {
            for n in l..=depth {
                if net.arch().layer_has_activation(n) {
                    assert!(all_zero[n - 1], "zero layer {l} but layer {n} is live in a bias-free net");
                }
            }
        }
    }
    first
}

/// Default classification tolerance: 2e-2 of the target's output range on
/// the grid.
pub fn default_tolerance(target: TargetId, grid: &Grid) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..grid.len() {
        for &y in &evaluate(target, grid.point(i)).expect("grid point").value {
            lo = lo.min(y);
            hi = hi.max(y);
        }
    }
    0.02 * (hi - lo).max(1e-12)
}

/// Classifies a network against a target on a grid.
pub fn classify_state(
    net: &Network,
    target: TargetId,
    grid: &Grid,
    loss: LossKind,
    tol: f64,
) -> Result<CollapseReport> {
    if tol <= 0.0 {
        return Err(Error::arg("classification tolerance must be > 0"));
    }
    if net.arch().d_in != target.d_in() || net.arch().d_out() != target.d_out() {
        return Err(Error::shape("network and target dimensions differ"));
    }
    let n = grid.len();
    let d_out = target.d_out();
    let mut outputs = vec![0.0; n * d_out];
    let mut labels = vec![0.0; n * d_out];
    let mut scratch = vec![0.0; net.scratch_len()];
    for i in 0..n {
        net.output_into(grid.point(i), &mut scratch, &mut outputs[i * d_out..(i + 1) * d_out]);
        labels[i * d_out..(i + 1) * d_out]
            .copy_from_slice(&evaluate(target, grid.point(i))?.value);
    }

    let zero_layer = detect_zero_layer(net, grid);
    let max_grad_norm_prefix = prefix_gradient_norm(net, grid, target, loss, zero_layer)?;

    let point_err = |i: usize| -> f64 {
        (0..d_out)
            .map(|k| (outputs[i * d_out + k] - labels[i * d_out + k]).abs())
            .fold(0.0f64, f64::max)
    };

    // Fitted: tracks the target everywhere.
    let max_err = (0..n).map(point_err).fold(0.0f64, f64::max);
    if max_err < tol {
        return Ok(CollapseReport {
            kind: CollapseKind::Fitted,
            zero_layer,
            constant_value: None,
            regions: Vec::new(),
            max_grad_norm_prefix,
            stat_match: None,
        });
    }

    // Full collapse: constant on the whole grid.
    let mut constant = vec![0.0; d_out];
    let mut is_constant = true;
    for k in 0..d_out {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut mean = 0.0;
        for i in 0..n {
            let v = outputs[i * d_out + k];
            lo = lo.min(v);
            hi = hi.max(v);
            mean += v;
        }
        if hi - lo >= tol {
            is_constant = false;
        }
        constant[k] = mean / n as f64;
    }
    if is_constant {
        let stats = target_statistics(target);
        let stat_match = match loss {
            LossKind::Mse => constant
                .iter()
                .zip(stats.mean.iter())
                .all(|(c, m)| (c - m).abs() <= tol),
            LossKind::Mae => constant
                .iter()
                .zip(stats.median_set.iter())
                .all(|(c, (lo, hi))| *c >= lo - tol && *c <= hi + tol),
        };
        return Ok(CollapseReport {
            kind: CollapseKind::FullCollapse,
            zero_layer,
            constant_value: Some(constant),
            regions: Vec::new(),
            max_grad_norm_prefix,
            stat_match: Some(stat_match),
        });
    }

    // Partial collapse: erroneous plateaus, fitted elsewhere.
    let regions = find_plateaus(grid, &outputs, &labels, d_out, tol);
    if !regions.members.is_empty() {
        let mut all_match = true;
        let mut reports = Vec::new();
        let mut in_region = vec![false; n];
        for members in &regions.members {
            let mut constant = vec![0.0; d_out];
            let mut cond_mean = vec![0.0; d_out];
            let mut lo = vec![f64::INFINITY; grid.d_in];
            let mut hi = vec![f64::NEG_INFINITY; grid.d_in];
            for &i in members {
                in_region[i] = true;
                for k in 0..d_out {
                    constant[k] += outputs[i * d_out + k];
                    cond_mean[k] += labels[i * d_out + k];
                }
                for d in 0..grid.d_in {
                    lo[d] = lo[d].min(grid.point(i)[d]);
                    hi[d] = hi[d].max(grid.point(i)[d]);
                }
            }
            let m = members.len() as f64;
            for k in 0..d_out {
                constant[k] /= m;
                cond_mean[k] /= m;
                if (constant[k] - cond_mean[k]).abs() > tol {
                    all_match = false;
                }
            }
            reports.push(RegionReport {
                lo,
                hi,
                constant,
                conditional_mean: cond_mean,
                points: members.len(),
            });
        }
        // The complement must fit, ignoring points adjacent to a plateau
        // (boundary cells are transitional).
        let mut near_region = in_region.clone();
        for i in 0..n {
            if in_region[i] {
                for nb in grid.forward_neighbors(i) {
                    near_region[nb] = true;
                }
            } else {
                for nb in grid.forward_neighbors(i) {
                    if in_region[nb] {
                        near_region[i] = true;
                    }
                }
            }
        }
        let complement_fits = (0..n).filter(|&i| !near_region[i]).all(|i| point_err(i) < tol);
        if all_match && complement_fits {
            return Ok(CollapseReport {
                kind: CollapseKind::PartialCollapse,
                zero_layer,
                constant_value: None,
                regions: reports,
                max_grad_norm_prefix,
                stat_match: Some(true),
            });
        }
    }

    Ok(CollapseReport {
        kind: CollapseKind::Other,
        zero_layer,
        constant_value: None,
        regions: Vec::new(),
        max_grad_norm_prefix,
        stat_match: None,
    })
}

struct PlateauSet {
    members: Vec<Vec<usize>>,
}

/// Connected components of near-constant cells: two adjacent grid points
/// join when the network output differs by less than tol/10; a component
/// is kept when it spans at least two cells and is erroneous somewhere
/// (otherwise it is just a well-fitted smooth stretch).
fn find_plateaus(grid: &Grid, outputs: &[f64], labels: &[f64], d_out: usize, tol: f64) -> PlateauSet {
    let n = grid.len();
    let flat_tol = tol / 10.0;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in grid.forward_neighbors(i) {
            let step = (0..d_out)
                .map(|k| (outputs[i * d_out + k] - outputs[j * d_out + k]).abs())
                .fold(0.0f64, f64::max);
            if step < flat_tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut buckets: std::collections::HashMap<usize, Vec<usize>> = std::collections::HashMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        buckets.entry(root).or_default().push(i);
    }
    let mut members: Vec<Vec<usize>> = buckets
        .into_values()
        .filter(|m| m.len() >= 3) // at least two cells
        .filter(|m| {
            m.iter().any(|&i| {
                (0..d_out)
                    .map(|k| (outputs[i * d_out + k] - labels[i * d_out + k]).abs())
                    .fold(0.0f64, f64::max)
                    >= tol
            })
        })
        .collect();
    members.sort_by_key(|m| m[0]);
    for m in members.iter_mut() {
        m.sort_unstable();
    }
    PlateauSet { members }
}

/// Largest gradient magnitude over layers 1..=zero_layer (whole network
/// when no zero layer), with the grid points as the dataset.
fn prefix_gradient_norm(
    net: &Network,
    grid: &Grid,
    target: TargetId,
    loss: LossKind,
    zero_layer: Option<usize>,
) -> Result<f64> {
    // Subsample the grid for the gradient pass; exactness is what matters
    // and exact zeros survive any subset.
    let stride = (grid.len() / 256).max(1);
    let mut pairs = Vec::new();
    let mut i = 0;
    while i < grid.len() {
        let x = grid.point(i).to_vec();
        let y = evaluate(target, &x)?.value;
        pairs.push((x, y));
        i += stride;
    }
    let ds = Dataset::from_pairs(&pairs)?;
    let grads = backward(net, &ds, loss)?;
    let upto = zero_layer.unwrap_or(net.arch().depth());
    Ok((1..=upto).map(|l| grads.layer_max_abs(l)).fold(0.0f64, f64::max))
}

/// Per-layer gradient magnitudes on a dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradientReport {
    /// max |dL/dW^l| over weights and biases, per layer (1-indexed).
    pub per_layer_max_abs: Vec<f64>,
    /// Smallest activation layer with x^l == 0 on every dataset input.
    pub zero_layer: Option<usize>,
    /// Layers 1..=zero_layer have exactly zero gradients.
    pub exact_zero_prefix: bool,
    /// Every layer's gradient is exactly zero.
    pub all_zero: bool,
}

/// Computes per-layer gradient norms and the dead-prefix flags.
pub fn verify_vanishing_gradients(net: &Network, dataset: &Dataset, loss: LossKind) -> Result<GradientReport> {
    if dataset.n == 0 {
        return Err(Error::arg("dataset must be non-empty"));
    }
    let depth = net.arch().depth();
    let grads = backward(net, dataset, loss)?;
    let per_layer_max_abs: Vec<f64> = (1..=depth).map(|l| grads.layer_max_abs(l)).collect();

    let mut all_zero_layer = vec![true; depth];
    for s in 0..dataset.n {
        let trace = net.forward(dataset.input(s))?;
        for l in 1..=depth {
            if !net.arch().layer_has_activation(l)
                || trace.activations[l - 1].iter().any(|&v| v != 0.0)
            {
                all_zero_layer[l - 1] = false;
            }
        }
    }
    let zero_layer = (1..=depth).find(|&l| all_zero_layer[l - 1]);
    let exact_zero_prefix = match zero_layer {
        Some(l) => (1..=l).all(|k| per_layer_max_abs[k - 1] == 0.0),
        None => false,
    };
    let all_zero = per_layer_max_abs.iter().all(|&v| v == 0.0);
    Ok(GradientReport {
        per_layer_max_abs,
        zero_layer,
        exact_zero_prefix,
        all_zero,
    })
}

/// Mean and MAE-minimizing constant set of a target's output law.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TargetStatistics {
    pub mean: Vec<f64>,
    /// Per output component: the closed interval of constants minimizing
    /// mean absolute error (a point when the output CDF crosses 1/2
    /// strictly).
    pub median_set: Vec<(f64, f64)>,
}

/// Statistics of the target's output under the uniform input law; the mean
/// comes from adaptive quadrature, the median set from the output CDF.
pub fn target_statistics(target: TargetId) -> &'static TargetStatistics {
    use std::sync::OnceLock;
    static CACHE: [OnceLock<TargetStatistics>; 4] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    let slot = match target {
        TargetId::Abs1d => 0,
        TargetId::Xsin5x => 1,
        TargetId::Stepsin => 2,
        TargetId::Abs2d => 3,
    };
    CACHE[slot].get_or_init(|| compute_target_statistics(target))
}

fn compute_target_statistics(target: TargetId) -> TargetStatistics {
    let a = DOMAIN_HALF_WIDTH;
    match target {
        TargetId::Abs1d | TargetId::Xsin5x | TargetId::Stepsin => {
            let f = move |x: f64| evaluate(target, &[x]).unwrap().value[0];
            // Split at 0: stepsin jumps there, the others are smooth.
            let integral = adaptive_simpson(&f, -a, 0.0, 1e-12, 40)
                + adaptive_simpson(&f, 0.0, a, 1e-12, 40);
            let mean = integral / (2.0 * a);
            let median_set = median_set_from_samples(&f, a);
            TargetStatistics {
                mean: vec![mean],
                median_set: vec![median_set],
            }
        }
        TargetId::Abs2d => {
            // Both components are |u| with u = x1 ± x2 triangular on
            // [-2a, 2a]: density (2a - |u|) / (4a^2).
            let density = move |u: f64| (2.0 * a - u) / (4.0 * a * a);
            let mean_integrand = move |u: f64| u * density(u);
            let mean = 2.0 * adaptive_simpson(&mean_integrand, 0.0, 2.0 * a, 1e-12, 40);
            // CDF of |u|: F(c) = 2 * int_0^c density; strictly increasing,
            // so the median set is a point found by bisection.
            let cdf = move |c: f64| 2.0 * adaptive_simpson(&density, 0.0, c, 1e-13, 40);
            let mut lo = 0.0;
            let mut hi = 2.0 * a;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if cdf(mid) < 0.5 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let median = 0.5 * (lo + hi);
            TargetStatistics {
                mean: vec![mean, mean],
                median_set: vec![(median, median), (median, median)],
            }
        }
    }
}

/// Empirical median set from a dense deterministic output sample.
fn median_set_from_samples(f: &dyn Fn(f64) -> f64, a: f64) -> (f64, f64) {
    let n = 1 << 21;
    let mut values: Vec<f64> = (0..n)
        .map(|i| {
            let x = -a + (i as f64 + 0.5) * 2.0 * a / n as f64;
            f(x)
        })
        .collect();
    values.sort_by(|p, q| p.partial_cmp(q).unwrap());
    // Any constant between the two central order statistics minimizes the
    // mean absolute error; snap near-equal endpoints to a point.
    let lo = values[n / 2 - 1];
    let hi = values[n / 2];
    if hi - lo < 1e-6 {
        let m = 0.5 * (lo + hi);
        (m, m)
    } else {
        (lo, hi)
    }
}

/// Recursive adaptive Simpson quadrature.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    let c = 0.5 * (a + b);
    let (fa, fb, fc) = (f(a), f(b), f(c));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
    simpson_step(f, a, b, fa, fb, fc, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fc: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let c = 0.5 * (a + b);
    let d = 0.5 * (a + c);
    let e = 0.5 * (c + b);
    let (fd, fe) = (f(d), f(e));
    let left = (c - a) / 6.0 * (fa + 4.0 * fd + fc);
    let right = (b - c) / 6.0 * (fc + 4.0 * fe + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, c, fa, fc, fd, left, tol / 2.0, depth - 1)
            + simpson_step(f, c, b, fc, fb, fe, right, tol / 2.0, depth - 1)
    }
}
