//! Mean squared and mean absolute error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Mse,
    Mae,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Mse => "mse",
            LossKind::Mae => "mae",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mse" => Ok(LossKind::Mse),
            "mae" => Ok(LossKind::Mae),
            other => Err(Error::Unsupported(format!("unknown loss `{other}`"))),
        }
    }

    /// Per-component error term before averaging.
    #[inline]
    pub fn pointwise(self, prediction: f64, target: f64) -> f64 {
        let e = prediction - target;
        match self {
            LossKind::Mse => e * e,
            LossKind::Mae => e.abs(),
        }
    }

    /// d(pointwise)/d(prediction); the MAE subgradient at 0 is 0.
    #[inline]
    pub fn grad(self, prediction: f64, target: f64) -> f64 {
        let e = prediction - target;
        match self {
            LossKind::Mse => 2.0 * e,
            LossKind::Mae => {
                if e > 0.0 {
                    1.0
                } else if e < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Mean of the pointwise error over all entries.
pub fn loss_value(kind: LossKind, predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.len() != targets.len() {
        return Err(Error::shape(format!(
            "predictions ({}) and targets ({}) differ in length",
            predictions.len(),
            targets.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::arg("loss of an empty batch is undefined"));
    }
    let sum: f64 = predictions
        .iter()
        .zip(targets.iter())
        .map(|(p, y)| kind.pointwise(*p, *y))
        .sum();
    Ok(sum / predictions.len() as f64)
}
