//! collapselab: a numerical laboratory for the collapse of deep, narrow
//! ReLU networks.
//!
//! Deep and narrow ReLU networks initialized from symmetric weight
//! distributions die with surprisingly high probability: some layer's
//! activity becomes identically zero, gradients below it vanish exactly,
//! and training settles on the target's mean (squared loss) or median
//! (absolute loss) instead of the target. This crate computes that
//! failure mode from every angle:
//!
//! - [`exact`]: the 16-state sign-pattern chain giving exact rational
//!   collapse probabilities for width-2 chains, closed-form bounds for
//!   general widths, the safe-depth formula, and the squared-length
//!   recursion with Gauss–Hermite quadrature.
//! - [`mc`]: seeded Monte Carlo estimates of zero-output and
//!   zero-function probabilities across architectures and initializers.
//! - [`net`], [`init`], [`train`]: a from-scratch feed-forward stack
//!   (forward traces, reverse-mode gradients, finite-difference oracle,
//!   weight initializers, first-order optimizers, batch/weight
//!   normalization, dropout) precise enough to observe exact zeros.
//! - [`collapse`]: collapse detection, classification, and the
//!   mean/median statistics oracle.
//! - [`cli`]: the `collapselab` command-line tool and figure scripts.

pub mod cli;
pub mod collapse;
pub mod error;
pub mod exact;
pub mod init;
pub mod mc;
pub mod net;
pub mod report;
pub mod rng;
pub mod svg;
pub mod targets;
pub mod train;

pub use error::{Error, Result};
pub use net::{
    backward, finite_diff_grad, reference_network, ActivationKind, Architecture, ForwardTrace,
    GradientSet, LayerParams, Network, NetworkDocument, Parameters,
};
