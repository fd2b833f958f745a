//! Analytic target functions and seeded dataset samplers.
//!
//! All targets live on the uniform law over `[-sqrt(3), sqrt(3)]^d_in`,
//! which has unit variance per coordinate. Labels are exact analytic
//! values, never samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{split, DrawStream};

/// Half-width of the input domain; U[-SQRT3, SQRT3] has variance 1.
pub const DOMAIN_HALF_WIDTH: f64 = 1.7320508075688772;

/// The built-in target functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetId {
    /// y(x) = |x|.
    Abs1d,
    /// y(x) = x sin(5x).
    Xsin5x,
    /// y(x) = 1_{x>0} + 0.2 sin(5x); the indicator at exactly 0 is 0.
    Stepsin,
    /// y(x) = (|x1 + x2|, |x1 - x2|).
    Abs2d,
}

impl TargetId {
    pub const ALL: [TargetId; 4] = [
        TargetId::Abs1d,
        TargetId::Xsin5x,
        TargetId::Stepsin,
        TargetId::Abs2d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TargetId::Abs1d => "abs1d",
            TargetId::Xsin5x => "xsin5x",
            TargetId::Stepsin => "stepsin",
            TargetId::Abs2d => "abs2d",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "abs1d" => Ok(TargetId::Abs1d),
            "xsin5x" => Ok(TargetId::Xsin5x),
            "stepsin" => Ok(TargetId::Stepsin),
            "abs2d" => Ok(TargetId::Abs2d),
            other => Err(Error::Unsupported(format!("unknown target `{other}`"))),
        }
    }

    pub fn d_in(self) -> usize {
        match self {
            TargetId::Abs2d => 2,
            _ => 1,
        }
    }

    pub fn d_out(self) -> usize {
        match self {
            TargetId::Abs2d => 2,
            _ => 1,
        }
    }
}

/// An evaluation together with a domain check; out-of-domain inputs are
/// still evaluated, the flag just records the violation.
#[derive(Debug, Clone)]
pub struct TargetValue {
    pub value: Vec<f64>,
    pub in_domain: bool,
}

/// Evaluates a target at a point.
pub fn evaluate(id: TargetId, x: &[f64]) -> Result<TargetValue> {
    if x.len() != id.d_in() {
        return Err(Error::shape(format!(
            "target {} expects {} input(s), got {}",
            id.name(),
            id.d_in(),
            x.len()
        )));
    }
    let in_domain = x.iter().all(|v| v.abs() <= DOMAIN_HALF_WIDTH);
    let value = match id {
        TargetId::Abs1d => vec![x[0].abs()],
        TargetId::Xsin5x => vec![x[0] * (5.0 * x[0]).sin()],
        TargetId::Stepsin => {
            let step = if x[0] > 0.0 { 1.0 } else { 0.0 };
            vec![step + 0.2 * (5.0 * x[0]).sin()]
        }
        TargetId::Abs2d => vec![(x[0] + x[1]).abs(), (x[0] - x[1]).abs()],
    };
    Ok(TargetValue { value, in_domain })
}

/// A batch of (input, label) pairs stored flat and row-major.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub n: usize,
    pub d_in: usize,
    pub d_out: usize,
    inputs: Vec<f64>,
    labels: Vec<f64>,
}

impl Dataset {
    pub fn new(n: usize, d_in: usize, d_out: usize) -> Self {
        Dataset {
            n,
            d_in,
            d_out,
            inputs: vec![0.0; n * d_in],
            labels: vec![0.0; n * d_out],
        }
    }

    pub fn from_pairs(pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::arg("dataset must be non-empty"));
        }
        let d_in = pairs[0].0.len();
        let d_out = pairs[0].1.len();
        let mut ds = Dataset::new(pairs.len(), d_in, d_out);
        for (i, (x, y)) in pairs.iter().enumerate() {
            if x.len() != d_in || y.len() != d_out {
                return Err(Error::shape("ragged dataset rows"));
            }
            ds.inputs[i * d_in..(i + 1) * d_in].copy_from_slice(x);
            ds.labels[i * d_out..(i + 1) * d_out].copy_from_slice(y);
        }
        Ok(ds)
    }

    #[inline]
    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.d_in..(i + 1) * self.d_in]
    }

    #[inline]
    pub fn label(&self, i: usize) -> &[f64] {
        &self.labels[i * self.d_out..(i + 1) * self.d_out]
    }

    pub fn inputs_flat(&self) -> &[f64] {
        &self.inputs
    }

    pub fn labels_flat(&self) -> &[f64] {
        &self.labels
    }

    /// Writes the dataset as CSV: x columns then y columns.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.d_in {
            out.push_str(&format!("x{},", i + 1));
        }
        for i in 0..self.d_out {
            out.push_str(&format!("y{}", i + 1));
            if i + 1 < self.d_out {
                out.push(',');
            }
        }
        out.push('\n');
        for r in 0..self.n {
            let row: Vec<String> = self
                .input(r)
                .iter()
                .chain(self.label(r).iter())
                .map(|v| format!("{v}"))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

const SAMPLE_TAG: u64 = 0x74;

/// Draws `n` i.i.d. uniform inputs with exact labels; deterministic per seed.
pub fn sample_dataset(id: TargetId, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::arg("sample count must be >= 1"));
    }
    let mut ds = Dataset::new(n, id.d_in(), id.d_out());
    let mut stream = DrawStream::new(split(seed, SAMPLE_TAG));
    let mut x = vec![0.0; id.d_in()];
    for i in 0..n {
        for v in x.iter_mut() {
            *v = stream.uniform_in(-DOMAIN_HALF_WIDTH, DOMAIN_HALF_WIDTH);
        }
        let y = evaluate(id, &x)?.value;
        ds.inputs[i * ds.d_in..(i + 1) * ds.d_in].copy_from_slice(&x);
        ds.labels[i * ds.d_out..(i + 1) * ds.d_out].copy_from_slice(&y);
    }
    Ok(ds)
}

/// Fills a preallocated dataset in place; the hot path for training loops.
pub fn sample_into(ds: &mut Dataset, id: TargetId, stream: &mut DrawStream) {
    debug_assert_eq!(ds.d_in, id.d_in());
    debug_assert_eq!(ds.d_out, id.d_out());
    let mut x = [0.0f64; 2];
    let d_in = ds.d_in;
    for i in 0..ds.n {
        for v in x[..d_in].iter_mut() {
            *v = stream.uniform_in(-DOMAIN_HALF_WIDTH, DOMAIN_HALF_WIDTH);
        }
        ds.inputs[i * d_in..(i + 1) * d_in].copy_from_slice(&x[..d_in]);
        let y = match id {
            TargetId::Abs1d => {
                ds.labels[i] = x[0].abs();
                continue;
            }
            TargetId::Xsin5x => {
                ds.labels[i] = x[0] * (5.0 * x[0]).sin();
                continue;
            }
            TargetId::Stepsin => {
                ds.labels[i] = if x[0] > 0.0 { 1.0 } else { 0.0 } + 0.2 * (5.0 * x[0]).sin();
                continue;
            }
            TargetId::Abs2d => [(x[0] + x[1]).abs(), (x[0] - x[1]).abs()],
        };
        ds.labels[i * 2..i * 2 + 2].copy_from_slice(&y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs1d_values() {
        assert_eq!(evaluate(TargetId::Abs1d, &[-1.5]).unwrap().value, vec![1.5]);
        assert_eq!(evaluate(TargetId::Abs1d, &[0.0]).unwrap().value, vec![0.0]);
    }

    #[test]
    fn stepsin_indicator_is_strict_at_zero() {
        let v = evaluate(TargetId::Stepsin, &[0.0]).unwrap().value[0];
        assert_eq!(v, 0.0);
        let v = evaluate(TargetId::Stepsin, &[1e-12]).unwrap().value[0];
        assert!(v > 0.99);
    }

    #[test]
    fn abs2d_reference_point() {
        let v = evaluate(TargetId::Abs2d, &[1.0, 2.0]).unwrap().value;
        assert_eq!(v, vec![3.0, 1.0]);
    }

    #[test]
    fn out_of_domain_is_flagged_but_evaluated() {
        let v = evaluate(TargetId::Abs1d, &[5.0]).unwrap();
        assert!(!v.in_domain);
        assert_eq!(v.value, vec![5.0]);
    }

    #[test]
    fn wrong_dimension_is_an_error() {
        assert!(evaluate(TargetId::Abs2d, &[1.0]).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_dataset(TargetId::Abs1d, 1000, 7).unwrap();
        let b = sample_dataset(TargetId::Abs1d, 1000, 7).unwrap();
        assert_eq!(a.inputs_flat(), b.inputs_flat());
        assert_eq!(a.labels_flat(), b.labels_flat());
        let c = sample_dataset(TargetId::Abs1d, 1000, 8).unwrap();
        assert_ne!(a.inputs_flat(), c.inputs_flat());
    }

    #[test]
    fn labels_match_evaluate_exactly() {
        let ds = sample_dataset(TargetId::Abs2d, 500, 3).unwrap();
        for i in 0..ds.n {
            let y = evaluate(TargetId::Abs2d, ds.input(i)).unwrap().value;
            assert_eq!(ds.label(i), y.as_slice());
        }
    }

    #[test]
    fn input_moments_match_uniform_law() {
        let ds = sample_dataset(TargetId::Abs1d, 1_000_000, 11).unwrap();
        let n = ds.n as f64;
        let mean: f64 = ds.inputs_flat().iter().sum::<f64>() / n;
        let var: f64 = ds.inputs_flat().iter().map(|v| v * v).sum::<f64>() / n - mean * mean;
        // U[-sqrt3, sqrt3]: mean 0 (SE 1/sqrt n), variance 1 (SE ~ 0.9/sqrt n).
        assert!(mean.abs() < 5.0 / n.sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 5.0 / n.sqrt(), "var {var}");
    }

    #[test]
    fn empirical_label_mean_matches_analytic() {
        // E|x| on U[-sqrt3, sqrt3] = sqrt(3)/2.
        let ds = sample_dataset(TargetId::Abs1d, 1_000_000, 13).unwrap();
        let n = ds.n as f64;
        let mean: f64 = ds.labels_flat().iter().sum::<f64>() / n;
        // sd of |x| = sqrt(1 - 3/4) = 0.5.
        let se = 0.5 / n.sqrt();
        assert!((mean - 0.8660254037844386).abs() < 4.0 * se, "mean {mean}");
    }

    #[test]
    fn csv_dump_layout() {
        let ds = sample_dataset(TargetId::Abs2d, 3, 1).unwrap();
        let text = ds.to_csv();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x1,x2,y1,y2");
        assert_eq!(text.lines().count(), 4);
        let first: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(first.len(), 4);
        let x1: f64 = first[0].parse().unwrap();
        let x2: f64 = first[1].parse().unwrap();
        let y1: f64 = first[2].parse().unwrap();
        assert_eq!(y1, (x1 + x2).abs());
    }

    #[test]
    fn inputs_pass_ks_against_uniform() {
        let ds = sample_dataset(TargetId::Abs1d, 100_000, 17).unwrap();
        let mut xs: Vec<f64> = ds.inputs_flat().to_vec();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = xs.len();
        let mut d = 0.0f64;
        for (i, &x) in xs.iter().enumerate() {
            let c = (x + DOMAIN_HALF_WIDTH) / (2.0 * DOMAIN_HALF_WIDTH);
            d = d
                .max((c - i as f64 / n as f64).abs())
                .max(((i + 1) as f64 / n as f64 - c).abs());
        }
        // alpha = 0.01 critical value.
        assert!(d < 1.6276 / (n as f64).sqrt(), "KS {d}");
    }
}
