//! Output landscapes: one fixed random network evaluated over a 2-D grid,
//! once per activation, so the grids differ only by the activation.

use rand::Rng;

use crate::activations::{ActivationKind, RecaParams};
use crate::data::synth::grid2d_default;
use crate::error::{Error, Result};
use crate::nn::{Granularity, LayerSpec, Mode, Model, ModelSpec, ParamClass};
use crate::rng::seeded;

/// Half-width of the uniform weight initialization.
pub const WEIGHT_RANGE: f64 = 0.05;

/// Hidden widths of the fixed probe network (input 2, output 1).
pub const HIDDEN: [usize; 3] = [16, 16, 16];

/// The three landscape variants. Linear means no activation layers at all,
/// which makes the whole network affine.
#[derive(Debug, Clone, PartialEq)]
pub enum LandscapeActivation {
    Linear,
    Relu,
    Reca(RecaParams),
}

impl LandscapeActivation {
    pub fn parse(spec: &str) -> Result<Self> {
        if spec == "linear" {
            return Ok(Self::Linear);
        }
        match crate::activations::parse_kind(spec)? {
            ActivationKind::Relu => Ok(Self::Relu),
            ActivationKind::Reca { init } => Ok(Self::Reca(init)),
            other => Err(Error::Config(format!(
                "landscape supports linear, relu, and reca, not {}",
                other.name()
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Relu => "relu",
            Self::Reca(_) => "reca",
        }
    }

    fn kind(&self) -> Option<ActivationKind> {
        match self {
            Self::Linear => None,
            Self::Relu => Some(ActivationKind::Relu),
            Self::Reca(p) => Some(ActivationKind::Reca { init: *p }),
        }
    }
}

/// A scalar field sampled over the square lattice, row-major, x1 fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    pub activation: String,
    pub seed: u64,
    pub side: usize,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub output: Vec<f64>,
}

impl Landscape {
    pub fn len(&self) -> usize {
        self.output.len()
    }

    pub fn is_empty(&self) -> bool {
        self.output.is_empty()
    }

    fn at(&self, row: usize, col: usize) -> f64 {
        self.output[row * self.side + col]
    }
}

/// Evaluate the probe network on the default 32 x 32 lattice over [-1, 1]^2.
///
/// Weights are uniform(-0.05, 0.05) drawn from `net_seed` in layer order and
/// biases stay zero; the same seed therefore pins identical weights for
/// every activation choice, because activation layers consume no draws.
pub fn landscape(activation: &LandscapeActivation, net_seed: u64) -> Result<Landscape> {
    let mut layers = Vec::new();
    for width in HIDDEN {
        layers.push(LayerSpec::Dense { out_features: width, bias: true });
        if let Some(kind) = activation.kind() {
            layers.push(LayerSpec::Activation { kind, granularity: Granularity::Global });
        }
    }
    layers.push(LayerSpec::Dense { out_features: 1, bias: true });
    let spec = ModelSpec { input_shape: vec![2], layers, class_count: 1 };

    let mut model: Model<f64> = Model::build(&spec, &mut seeded(net_seed))?;
    let mut rng = seeded(net_seed);
    for p in model.params_mut() {
        if p.class == ParamClass::Weight {
            for v in &mut p.value {
                *v = rng.gen_range(-WEIGHT_RANGE..WEIGHT_RANGE);
            }
        }
    }

    let grid = grid2d_default()?;
    let side = (grid.len() as f64).sqrt() as usize;
    let out = model.forward(grid.x(), Mode::Eval)?;
    let mut x1 = Vec::with_capacity(grid.len());
    let mut x2 = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        x1.push(grid.x().data()[2 * i]);
        x2.push(grid.x().data()[2 * i + 1]);
    }
    Ok(Landscape {
        activation: activation.name().to_string(),
        seed: net_seed,
        side,
        x1,
        x2,
        output: out.data().to_vec(),
    })
}

/// Largest |g[i-1] - 2 g[i] + g[i+1]| over both lattice axes.
///
/// Zero for affine fields; kinks crossing a lattice cell show up as spikes
/// proportional to the slope jump, which makes this a smoothness statistic.
pub fn max_second_difference(land: &Landscape) -> f64 {
    let n = land.side;
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in 1..n - 1 {
            worst = worst.max((land.at(r, c - 1) - 2.0 * land.at(r, c) + land.at(r, c + 1)).abs());
        }
    }
    for c in 0..n {
        for r in 1..n - 1 {
            worst = worst.max((land.at(r - 1, c) - 2.0 * land.at(r, c) + land.at(r + 1, c)).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_landscape_is_affine() {
        let land = landscape(&LandscapeActivation::Linear, 11).unwrap();
        assert_eq!(land.len(), 1024);
        assert!(max_second_difference(&land) <= 1e-6);
    }

    #[test]
    fn frozen_reca_grid_equals_the_relu_grid() {
        let relu = landscape(&LandscapeActivation::Relu, 5).unwrap();
        let frozen = RecaParams::relu();
        let reca = landscape(&LandscapeActivation::Reca(frozen), 5).unwrap();
        assert_eq!(relu.output, reca.output);
    }

    #[test]
    fn unit_exponents_smooth_the_relu_kinks() {
        let seed = 5;
        let relu = landscape(&LandscapeActivation::Relu, seed).unwrap();
        let p = RecaParams::new(0.5, 1.0, 1.0).unwrap();
        let reca = landscape(&LandscapeActivation::Reca(p), seed).unwrap();
        let relu_d2 = max_second_difference(&relu);
        let reca_d2 = max_second_difference(&reca);
        assert!(relu_d2 > 0.0);
        assert!(reca_d2 < relu_d2, "reca {reca_d2} vs relu {relu_d2}");
    }

    #[test]
    fn landscapes_replay_by_seed() {
        let a = landscape(&LandscapeActivation::Relu, 3).unwrap();
        let b = landscape(&LandscapeActivation::Relu, 3).unwrap();
        assert_eq!(a, b);
        let c = landscape(&LandscapeActivation::Relu, 4).unwrap();
        assert_ne!(a.output, c.output);
    }

    #[test]
    fn parse_accepts_the_three_variants_only() {
        assert_eq!(LandscapeActivation::parse("linear").unwrap(), LandscapeActivation::Linear);
        assert_eq!(LandscapeActivation::parse("relu").unwrap(), LandscapeActivation::Relu);
        match LandscapeActivation::parse("reca:0.5,1,1").unwrap() {
            LandscapeActivation::Reca(p) => assert_eq!(p.beta(), 1.0),
            other => panic!("expected reca, got {other:?}"),
        }
        assert!(LandscapeActivation::parse("swish").is_err());
        assert!(LandscapeActivation::parse("bogus").is_err());
    }
}
