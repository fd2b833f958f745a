//! Losses, optimizers, normalization variants, and the seeded training
//! loop.

mod loss;
mod model;
mod optim;

pub use loss::{loss_value, LossKind};
pub use model::{apply_normalization, BatchCache, Model, Normalization, BN_EPS, BN_MOMENTUM};
pub use optim::{optimizer_step, OptimizerKind, OptimizerState};

use serde::{Deserialize, Serialize};

use crate::collapse::{classify_state, default_tolerance, CollapseReport, Grid};
use crate::error::{Error, Result};
use crate::init::{init_parameters, InitializerSpec, Scheme};
use crate::net::{ActivationKind, Architecture, Network, NetworkDocument};
use crate::rng::{split, DrawStream};
use crate::targets::{sample_into, Dataset, TargetId};

/// Everything a training run needs besides the architecture, initializer,
/// and target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub optimizer: OptimizerKind,
    pub lr: f64,
    pub steps: usize,
    pub batch_size: usize,
    pub loss: LossKind,
    pub normalization: Normalization,
    pub seed: u64,
}

impl Default for TrainConfig {
    /// The default experiment protocol: Adam at 1e-3 for 20k steps with
    /// fresh 128-sample minibatches.
    fn default() -> Self {
        TrainConfig {
            optimizer: OptimizerKind::adam(),
            lr: 1e-3,
            steps: 20_000,
            batch_size: 128,
            loss: LossKind::Mse,
            normalization: Normalization::None,
            seed: 0,
        }
    }
}

/// One downsampled point of the loss trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub loss: f64,
}

/// Outcome of a training run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    pub target: TargetId,
    pub init: InitializerSpec,
    pub config: TrainConfig,
    /// Evaluation-mode loss on a fresh seeded batch after training.
    pub final_loss: f64,
    /// Training loss went NaN or infinite; the loop stopped early.
    pub diverged: bool,
    pub loss_trajectory: Vec<TrajectoryPoint>,
    /// Final network in evaluation form.
    pub network: NetworkDocument,
    pub collapse: CollapseReport,
}

const DATA_TAG: u64 = 0x41;
const MASK_TAG: u64 = 0x42;
const EVAL_TAG: u64 = 0x43;
const EVAL_BATCH: usize = 4096;
const TRAJECTORY_POINTS: usize = 256;

/// Runs the full training loop: fresh minibatch per step, one optimizer
/// update per batch, deterministic in `(spec.seed, config.seed)`.
pub fn train(
    arch: &Architecture,
    spec: &InitializerSpec,
    target: TargetId,
    config: &TrainConfig,
) -> Result<TrainReport> {
    if arch.d_in != target.d_in() || arch.d_out() != target.d_out() {
        return Err(Error::shape(format!(
            "architecture is {}->{} but target {} is {}->{}",
            arch.d_in,
            arch.d_out(),
            target.name(),
            target.d_in(),
            target.d_out()
        )));
    }
    if config.lr <= 0.0 {
        return Err(Error::arg("learning rate must be > 0"));
    }
    if config.steps == 0 || config.batch_size == 0 {
        return Err(Error::arg("steps and batch size must be >= 1"));
    }

    // SELU training pairs with LeCun-normal draws; other schemes keep the
    // caller's choice.
    let mut init_spec = *spec;
    if config.normalization == Normalization::Selu {
        init_spec.scheme = Scheme::LecunNormal;
    }
    let activation = match config.normalization {
        Normalization::Selu => ActivationKind::Selu,
        _ => ActivationKind::Relu,
    };
    let net = Network::new(arch.clone(), init_parameters(arch, &init_spec), activation)?;
    let mut model = Model::new(net, config.normalization)?;
    let mut state = OptimizerState::new(&model.block_lens());

    let mut data_stream = DrawStream::new(split(config.seed, DATA_TAG));
    let mut mask_stream = DrawStream::new(split(config.seed, MASK_TAG));
    let mut batch = Dataset::new(config.batch_size, target.d_in(), target.d_out());

    let record_every = (config.steps / TRAJECTORY_POINTS).max(1);
    let mut trajectory = Vec::new();
    let mut diverged = false;

    for step in 0..config.steps {
        sample_into(&mut batch, target, &mut data_stream);
        let masks = model.make_masks(batch.n, &mut mask_stream);
        let cache = model.forward_train(batch.inputs_flat(), batch.n, masks.as_deref());
        let step_loss = loss_value(config.loss, model.outputs(&cache), batch.labels_flat())?;
        if !step_loss.is_finite() {
            diverged = true;
            trajectory.push(TrajectoryPoint {
                step,
                loss: step_loss,
            });
            break;
        }
        if step % record_every == 0 || step + 1 == config.steps {
            trajectory.push(TrajectoryPoint {
                step,
                loss: step_loss,
            });
        }
        let grads = model.backward_batch(&cache, batch.labels_flat(), config.loss);
        let mut blocks = model.blocks_mut();
        optimizer_step(config.optimizer, config.lr, &mut state, &mut blocks, &grads);
        drop(blocks);
        model.update_running_stats(&cache);
    }

    let eval_net = model.to_eval_network();

    // Held-out evaluation batch.
    let mut eval_stream = DrawStream::new(split(config.seed, EVAL_TAG));
    let mut eval_batch = Dataset::new(EVAL_BATCH, target.d_in(), target.d_out());
    sample_into(&mut eval_batch, target, &mut eval_stream);
    let mut preds = vec![0.0; EVAL_BATCH * target.d_out()];
    let mut scratch = vec![0.0; eval_net.scratch_len()];
    for i in 0..eval_batch.n {
        eval_net.output_into(
            eval_batch.input(i),
            &mut scratch,
            &mut preds[i * target.d_out()..(i + 1) * target.d_out()],
        );
    }
    let final_loss = loss_value(config.loss, &preds, eval_batch.labels_flat())?;

    let grid = Grid::default_for(target.d_in());
    let tol = default_tolerance(target, &grid);
    let collapse = classify_state(&eval_net, target, &grid, config.loss, tol)?;

    Ok(TrainReport {
        target,
        init: *spec,
        config: *config,
        final_loss,
        diverged,
        loss_trajectory: trajectory,
        network: NetworkDocument::from_network(&eval_net, model.normalization_name()),
        collapse,
    })
}
