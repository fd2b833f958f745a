//! Closed-form collapse probabilities and the safe-depth formula.

use crate::error::{Error, Result};

/// Probability that a symmetrically initialized ReLU network maps a fixed
/// nonzero input to an erroneous constant output.
///
/// Zero biases: each ReLU layer of width N kills a nonzero input with
/// probability (1/2)^N independently, so the output is zero with
/// probability 1 - prod_l (1 - (1/2)^{N^l}); a trailing affine layer drops
/// out of the product. Nonzero symmetric biases: the output is zero with
/// probability (1/2)^{N^L} when the last layer applies ReLU, and equals
/// the last bias with probability (1/2)^{N^{L-1}} otherwise (a one-layer
/// affine map is never constant).
pub fn collapse_probability_bound(widths: &[usize], last_layer_relu: bool, biases_nonzero: bool) -> f64 {
    assert!(!widths.is_empty() && widths.iter().all(|&w| w >= 1), "invalid widths");
    let depth = widths.len();
    if biases_nonzero {
        if last_layer_relu {
            return 0.5f64.powi(widths[depth - 1] as i32);
        }
        if depth == 1 {
            return 0.0;
        }
        return 0.5f64.powi(widths[depth - 2] as i32);
    }
    let relu_layers = if last_layer_relu { depth } else { depth - 1 };
    let mut survive = 1.0f64;
    for &w in &widths[..relu_layers] {
        survive *= 1.0 - 0.5f64.powi(w as i32);
    }
    1.0 - survive
}

/// Largest depth whose zero-bias collapse bound stays below `p` at the
/// given constant width: floor(ln(1 - p) / ln(1 - (1/2)^width)).
pub fn max_safe_depth(width: usize, p: f64) -> Result<u64> {
    if width == 0 {
        return Err(Error::arg("width must be >= 1"));
    }
    if !(0.0 < p && p < 1.0) {
        return Err(Error::arg(format!("p must lie in (0, 1), got {p}")));
    }
    let per_layer = 1.0 - 0.5f64.powi(width as i32);
    Ok(((1.0 - p).ln() / per_layer.ln()).floor() as u64)
}
