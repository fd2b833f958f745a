//! First-order optimizers over flat parameter blocks.
//!
//! Every rule shares one structural property: a coordinate whose gradient
//! has been identically zero for the whole history receives an exactly
//! zero update (all moment accumulators start at zero), so parameters of
//! dead layers never move, bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Update rule plus its scheme-specific constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd,
    SgdNesterov { momentum: f64 },
    Adagrad { eps: f64 },
    Rmsprop { decay: f64, eps: f64 },
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl OptimizerKind {
    pub fn sgd_nesterov() -> Self {
        OptimizerKind::SgdNesterov { momentum: 0.9 }
    }

    pub fn adagrad() -> Self {
        OptimizerKind::Adagrad { eps: 1e-10 }
    }

    pub fn rmsprop() -> Self {
        OptimizerKind::Rmsprop { decay: 0.9, eps: 1e-8 }
    }

    pub fn adam() -> Self {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(OptimizerKind::Sgd),
            "sgd_nesterov" | "nesterov" => Ok(Self::sgd_nesterov()),
            "adagrad" => Ok(Self::adagrad()),
            "rmsprop" => Ok(Self::rmsprop()),
            "adam" => Ok(Self::adam()),
            other => Err(Error::Unsupported(format!("unknown optimizer `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::SgdNesterov { .. } => "sgd_nesterov",
            OptimizerKind::Adagrad { .. } => "adagrad",
            OptimizerKind::Rmsprop { .. } => "rmsprop",
            OptimizerKind::Adam { .. } => "adam",
        }
    }
}

/// Per-parameter accumulators; shaped like the parameter blocks.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    /// Momentum / first moment / squared-gradient accumulator.
    slot1: Vec<Vec<f64>>,
    /// Second moment (Adam only).
    slot2: Vec<Vec<f64>>,
    /// Completed steps.
    t: u64,
}

impl OptimizerState {
    pub fn new(block_lens: &[usize]) -> Self {
        OptimizerState {
            slot1: block_lens.iter().map(|&n| vec![0.0; n]).collect(),
            slot2: block_lens.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
        }
    }
}

/// Applies one update in place. `params` and `grads` must mirror the block
/// structure the state was built with.
pub fn optimizer_step(
    kind: OptimizerKind,
    lr: f64,
    state: &mut OptimizerState,
    params: &mut [&mut [f64]],
    grads: &[Vec<f64>],
) {
    assert_eq!(params.len(), grads.len(), "block count mismatch");
    assert_eq!(params.len(), state.slot1.len(), "state block mismatch");
    state.t += 1;
    match kind {
        OptimizerKind::Sgd => {
            for (p, g) in params.iter_mut().zip(grads.iter()) {
                for (pv, gv) in p.iter_mut().zip(g.iter()) {
                    *pv -= lr * gv;
                }
            }
        }
        OptimizerKind::SgdNesterov { momentum } => {
            for ((p, g), v) in params.iter_mut().zip(grads.iter()).zip(state.slot1.iter_mut()) {
                for ((pv, gv), vv) in p.iter_mut().zip(g.iter()).zip(v.iter_mut()) {
                    *vv = momentum * *vv - lr * gv;
                    *pv += momentum * *vv - lr * gv;
                }
            }
        }
        OptimizerKind::Adagrad { eps } => {
            for ((p, g), acc) in params.iter_mut().zip(grads.iter()).zip(state.slot1.iter_mut()) {
                for ((pv, gv), av) in p.iter_mut().zip(g.iter()).zip(acc.iter_mut()) {
                    *av += gv * gv;
                    *pv -= lr * gv / (av.sqrt() + eps);
                }
            }
        }
        OptimizerKind::Rmsprop { decay, eps } => {
            for ((p, g), acc) in params.iter_mut().zip(grads.iter()).zip(state.slot1.iter_mut()) {
                for ((pv, gv), av) in p.iter_mut().zip(g.iter()).zip(acc.iter_mut()) {
                    *av = decay * *av + (1.0 - decay) * gv * gv;
                    *pv -= lr * gv / (av.sqrt() + eps);
                }
            }
        }
        OptimizerKind::Adam { beta1, beta2, eps } => {
            let t = state.t as i32;
            let bc1 = 1.0 - beta1.powi(t);
            let bc2 = 1.0 - beta2.powi(t);
            for (((p, g), m), v) in params
                .iter_mut()
                .zip(grads.iter())
                .zip(state.slot1.iter_mut())
                .zip(state.slot2.iter_mut())
            {
                for (((pv, gv), mv), vv) in p.iter_mut().zip(g.iter()).zip(m.iter_mut()).zip(v.iter_mut()) {
                    *mv = beta1 * *mv + (1.0 - beta1) * gv;
                    *vv = beta2 * *vv + (1.0 - beta2) * gv * gv;
                    let m_hat = *mv / bc1;
                    let v_hat = *vv / bc2;
                    *pv -= lr * m_hat / (v_hat.sqrt() + eps);
                }
            }
        }
    }
}
