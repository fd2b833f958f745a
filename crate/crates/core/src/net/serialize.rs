//! The on-disk network document.
//!
//! Field names are frozen in `schemas/network.schema.json`. Weights are
//! flat row-major arrays shaped by the architecture. Networks trained with
//! batch or weight normalization are stored in evaluation form: the
//! normalization is folded into effective weights and biases and the
//! `normalization` field records where the parameters came from.

use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::{ActivationKind, Architecture, LayerParams, Network, Parameters};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkDocument {
    pub architecture: Architecture,
    pub activation: ActivationKind,
    /// Provenance of the parameters: "none", "batchnorm", "weightnorm",
    /// "selu", or "dropout"; always evaluation-mode effective values.
    pub normalization: String,
    pub layers: Vec<LayerParams>,
}

impl NetworkDocument {
    pub fn from_network(net: &Network, normalization: &str) -> Self {
        NetworkDocument {
            architecture: net.arch().clone(),
            activation: net.activation(),
            normalization: normalization.to_string(),
            layers: net.params().layers.clone(),
        }
    }

    pub fn to_network(&self) -> Result<Network> {
        Network::new(
            self.architecture.clone(),
            Parameters {
                layers: self.layers.clone(),
            },
            self.activation,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::reference_network;
    use crate::targets::TargetId;

    #[test]
    fn round_trip_preserves_the_function() {
        let net = reference_network(TargetId::Abs2d).unwrap();
        let doc = NetworkDocument::from_network(&net, "none");
        let text = doc.to_json().unwrap();
        let back = NetworkDocument::from_json(&text).unwrap().to_network().unwrap();
        assert_eq!(net.output(&[1.0, 2.0]).unwrap(), back.output(&[1.0, 2.0]).unwrap());
        assert_eq!(net.params(), back.params());
    }

    #[test]
    fn field_names_are_stable() {
        let net = reference_network(TargetId::Abs1d).unwrap();
        let text = NetworkDocument::from_network(&net, "none").to_json().unwrap();
        for key in [
            "\"architecture\"",
            "\"d_in\"",
            "\"widths\"",
            "\"last_layer_relu\"",
            "\"bias_free\"",
            "\"activation\"",
            "\"normalization\"",
            "\"layers\"",
            "\"weights\"",
            "\"bias\"",
        ] {
            assert!(text.contains(key), "missing {key} in {text}");
        }
    }

    #[test]
    fn mismatched_shapes_fail_to_load() {
        let net = reference_network(TargetId::Abs1d).unwrap();
        let mut doc = NetworkDocument::from_network(&net, "none");
        doc.layers[0].weights.pop();
        assert!(doc.to_network().is_err());
    }
}
