//! Named model shapes shared by training, resource accounting, and the CLI.
//!
//! Presets fix everything except the activation: swapping the activation
//! kind (and nothing else) yields twin models whose parameter counts differ
//! only by the activation's own parameters.

use crate::activations::ActivationKind;
use crate::error::{Error, Result};
use crate::nn::{Granularity, LayerSpec, ModelSpec};

/// Channel widths of the three convolution stages in the CNN presets.
pub const CONV_WIDTHS: [usize; 3] = [8, 16, 32];

/// Hidden layer widths of the dense preset.
pub const MLP_WIDTHS: [usize; 2] = [64, 32];

#[derive(Debug, Clone, Copy)]
pub struct ModelPreset {
    pub name: &'static str,
    pub summary: &'static str,
    layers: fn(&ActivationKind, Granularity, usize) -> Vec<LayerSpec>,
}

pub static MODEL_PRESETS: &[ModelPreset] = &[
    ModelPreset {
        name: "mlp",
        summary: "two dense hidden layers, works on any input shape",
        layers: mlp,
    },
    ModelPreset {
        name: "mini-cnn",
        summary: "three conv/norm/pool stages and a linear head",
        layers: mini_cnn,
    },
    ModelPreset {
        name: "mini-resnet",
        summary: "conv stem and three residual stages with pooled downsampling",
        layers: mini_resnet,
    },
];

pub fn model_preset(name: &str) -> Result<&'static ModelPreset> {
    MODEL_PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let known: Vec<&str> = MODEL_PRESETS.iter().map(|p| p.name).collect();
        Error::Config(format!("unknown model preset {name:?}, known: {}", known.join(", ")))
    })
}

impl ModelPreset {
    /// Validated spec for this preset on the given input and class count.
    pub fn spec(
        &self,
        input_shape: &[usize],
        class_count: usize,
        activation: &ActivationKind,
        granularity: Granularity,
    ) -> Result<ModelSpec> {
        let spec = ModelSpec {
            input_shape: input_shape.to_vec(),
            layers: (self.layers)(activation, granularity, class_count),
            class_count,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn act(kind: &ActivationKind, granularity: Granularity) -> LayerSpec {
    LayerSpec::Activation { kind: *kind, granularity }
}

fn conv3(out_channels: usize) -> LayerSpec {
    // No conv bias: every conv is followed by a batch norm that owns the shift.
    LayerSpec::Conv2d { out_channels, kernel: 3, stride: 1, pad: 1, bias: false }
}

fn mlp(kind: &ActivationKind, g: Granularity, classes: usize) -> Vec<LayerSpec> {
    let mut layers = Vec::new();
    for width in MLP_WIDTHS {
        layers.push(LayerSpec::Dense { out_features: width, bias: true });
        layers.push(act(kind, g));
    }
    layers.push(LayerSpec::Dense { out_features: classes, bias: true });
    layers
}

// Activation sits after the pool: max commutes with any monotone activation
// at init and the placement cuts elementwise work fourfold per stage.
fn mini_cnn(kind: &ActivationKind, g: Granularity, classes: usize) -> Vec<LayerSpec> {
    let mut layers = Vec::new();
    for width in CONV_WIDTHS {
        layers.push(conv3(width));
        layers.push(LayerSpec::BatchNorm);
        layers.push(LayerSpec::MaxPool { kernel: 2, stride: 2 });
        layers.push(act(kind, g));
    }
    layers.push(LayerSpec::GlobalAvgPool);
    layers.push(LayerSpec::Dense { out_features: classes, bias: true });
    layers
}

// Stage widths change inside stride-1 residual blocks (1x1 projection on the
// shortcut); all downsampling happens in the pools between stages, since the
// strict tiling rule leaves no room for strided 1x1 projections.
fn mini_resnet(kind: &ActivationKind, g: Granularity, classes: usize) -> Vec<LayerSpec> {
    let mut layers = vec![conv3(CONV_WIDTHS[0]), LayerSpec::BatchNorm, act(kind, g)];
    for width in CONV_WIDTHS {
        layers.push(LayerSpec::Residual {
            block: vec![
                conv3(width),
                LayerSpec::BatchNorm,
                act(kind, g),
                conv3(width),
                LayerSpec::BatchNorm,
            ],
        });
        layers.push(act(kind, g));
        layers.push(LayerSpec::MaxPool { kernel: 2, stride: 2 });
    }
    layers.push(LayerSpec::GlobalAvgPool);
    layers.push(LayerSpec::Dense { out_features: classes, bias: true });
    layers
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Model;
    use crate::rng::seeded;

    #[test]
    fn presets_validate_on_cifar_shaped_input() {
        for preset in MODEL_PRESETS {
            let spec = preset
                .spec(&[3, 32, 32], 10, &ActivationKind::reca_default(), Granularity::PerChannel)
                .unwrap();
            assert_eq!(spec.validate().unwrap(), vec![10], "{}", preset.name);
        }
    }

    #[test]
    fn mlp_accepts_flat_input_conv_presets_reject_it() {
        let kind = ActivationKind::Relu;
        assert!(model_preset("mlp").unwrap().spec(&[2], 2, &kind, Granularity::Global).is_ok());
        for name in ["mini-cnn", "mini-resnet"] {
            let err = model_preset(name)
                .unwrap()
                .spec(&[2], 2, &kind, Granularity::Global)
                .unwrap_err();
            assert!(err.to_string().contains("layer 0"), "{name}: {err}");
        }
    }

    #[test]
    fn unknown_preset_lists_known_names() {
        let msg = model_preset("resnet-152").unwrap_err().to_string();
        assert!(msg.contains("mini-cnn"), "{msg}");
    }

    #[test]
    fn activation_twins_differ_by_three_params_per_channel() {
        for preset in MODEL_PRESETS {
            let mut counts = Vec::new();
            let mut sites = 0;
            for kind in [ActivationKind::reca_default(), ActivationKind::Relu] {
                let spec =
                    preset.spec(&[3, 32, 32], 10, &kind, Granularity::PerChannel).unwrap();
                let mut model: Model<f32> = Model::build(&spec, &mut seeded(0)).unwrap();
                counts.push(model.parameter_counts());
                sites = model.activation_sites();
            }
            assert!(sites > 0);
            assert_eq!(
                counts[0].total - counts[1].total,
                3 * sites,
                "{} twin delta",
                preset.name
            );
            assert_eq!(counts[0].activation, 3 * sites);
            assert_eq!(counts[1].activation, 0);
            // Everything except the activation parameters is identical.
            assert_eq!(counts[0].weights, counts[1].weights, "{}", preset.name);
            assert_eq!(counts[0].biases, counts[1].biases);
            assert_eq!(counts[0].norm, counts[1].norm);
        }
    }
}
