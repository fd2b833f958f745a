//! Exact hand-built networks for the absolute-value targets.

use crate::error::{Error, Result};
use crate::targets::TargetId;

use super::{ActivationKind, Architecture, Network, Parameters};

/// The minimal ReLU network that represents the target exactly.
///
/// `abs1d` uses |x| = relu(x) + relu(-x) (2 layers, width 2); `abs2d`
/// builds both |x1 + x2| and |x1 - x2| the same way (width 4). Training
/// loss of the returned network on its matching target is exactly 0.
pub fn reference_network(target: TargetId) -> Result<Network> {
    match target {
        TargetId::Abs1d => {
            let arch = Architecture::new(1, vec![2, 1], false, true)?;
            let mut p = Parameters::zeros(&arch);
            p.layers[0].weights = vec![1.0, -1.0];
            p.layers[1].weights = vec![1.0, 1.0];
            Network::new(arch, p, ActivationKind::Relu)
        }
        TargetId::Abs2d => {
            let arch = Architecture::new(2, vec![4, 2], false, true)?;
            let mut p = Parameters::zeros(&arch);
            #[rustfmt::skip]
            let w1 = vec![
                1.0, 1.0,
                -1.0, -1.0,
                1.0, -1.0,
                -1.0, 1.0,
            ];
            #[rustfmt::skip]
            let w2 = vec![
                1.0, 1.0, 0.0, 0.0,
                0.0, 0.0, 1.0, 1.0,
            ];
            p.layers[0].weights = w1;
            p.layers[1].weights = w2;
            Network::new(arch, p, ActivationKind::Relu)
        }
        other => Err(Error::Unsupported(format!(
            "no exact reference network for target `{}`",
            other.name()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::{evaluate, sample_dataset, TargetId};

    #[test]
    fn abs1d_is_exact_on_the_domain() {
        let net = reference_network(TargetId::Abs1d).unwrap();
        let ds = sample_dataset(TargetId::Abs1d, 512, 1).unwrap();
        for i in 0..ds.n {
            let out = net.output(ds.input(i)).unwrap();
            assert_eq!(out.as_slice(), ds.label(i));
        }
        assert_eq!(net.output(&[0.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn abs2d_is_exact() {
        let net = reference_network(TargetId::Abs2d).unwrap();
        assert_eq!(net.output(&[1.0, 2.0]).unwrap(), vec![3.0, 1.0]);
        let ds = sample_dataset(TargetId::Abs2d, 512, 2).unwrap();
        for i in 0..ds.n {
            let out = net.output(ds.input(i)).unwrap();
            let want = evaluate(TargetId::Abs2d, ds.input(i)).unwrap().value;
            assert_eq!(out, want);
        }
    }

    #[test]
    fn unsupported_targets_are_rejected() {
        assert!(reference_network(TargetId::Xsin5x).is_err());
        assert!(reference_network(TargetId::Stepsin).is_err());
    }
}
