//! Baseline activations the engine compares ReCA against.
//!
//! Kink convention: at non-differentiable points (the origin, for the
//! ReLU family and ELU/SELU with α ≠ 1) every `input_grad` returns the
//! x ≤ 0 branch's slope. The branch tests are written `x > 0` so that
//! x = 0 falls into the left branch uniformly.

use crate::math::sigmoid;

use super::Activation;

/// Fixed point of the self-normalizing ELU; SELU(x) = λ·ELU(x; α).
pub const SELU_ALPHA: f64 = 1.67326;
pub const SELU_LAMBDA: f64 = 1.0507;

pub const LEAKY_RELU_DEFAULT_SLOPE: f64 = 0.01;
pub const PRELU_DEFAULT_INIT_SLOPE: f64 = 0.01;

#[derive(Debug, Clone, Copy, Default)]
pub struct Relu;

impl Activation for Relu {
    fn name(&self) -> &'static str {
        "relu"
    }

    fn value(&self, x: f64, _: &[f64]) -> f64 {
        if x > 0.0 {
            x
        } else {
            0.0
        }
    }

    fn input_grad(&self, x: f64, _: &[f64]) -> f64 {
        if x > 0.0 {
            1.0
        } else {
            0.0
        }
    }
}

/// max(0, x) + slope·min(0, x) with a fixed, non-learnable slope.
#[derive(Debug, Clone, Copy)]
pub struct LeakyRelu {
    pub slope: f64,
}

impl Default for LeakyRelu {
    fn default() -> Self {
        LeakyRelu { slope: LEAKY_RELU_DEFAULT_SLOPE }
    }
}

impl Activation for LeakyRelu {
    fn name(&self) -> &'static str {
        "lrelu"
    }

    fn value(&self, x: f64, _: &[f64]) -> f64 {
        if x > 0.0 {
            x
        } else {
            self.slope * x
        }
    }

    fn input_grad(&self, x: f64, _: &[f64]) -> f64 {
        if x > 0.0 {
            1.0
        } else {
            self.slope
        }
    }
}

/// LeakyReLU whose negative slope is a learnable per-site parameter.
#[derive(Debug, Clone, Copy)]
pub struct Prelu {
    pub init_slope: f64,
}

impl Default for Prelu {
    fn default() -> Self {
        Prelu { init_slope: PRELU_DEFAULT_INIT_SLOPE }
    }
}

impl Activation for Prelu {
    fn name(&self) -> &'static str {
        "prelu"
    }

    fn param_count(&self) -> usize {
        1
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["alpha"]
    }

    fn init_params(&self) -> Vec<f64> {
        vec![self.init_slope]
    }

    fn value(&self, x: f64, p: &[f64]) -> f64 {
        if x > 0.0 {
            x
        } else {
            p[0] * x
        }
    }

    fn input_grad(&self, x: f64, p: &[f64]) -> f64 {
        if x > 0.0 {
            1.0
        } else {
            p[0]
        }
    }

    fn param_grads(&self, x: f64, _: &[f64], out: &mut [f64]) {
        // df/d(slope) = x on the negative branch, 0 on the positive one.
        out[0] = if x > 0.0 { 0.0 } else { x };
    }
}

/// x·σ(x).
#[derive(Debug, Clone, Copy, Default)]
pub struct Swish;

impl Activation for Swish {
    fn name(&self) -> &'static str {
        "swish"
    }

    fn value(&self, x: f64, _: &[f64]) -> f64 {
        x * sigmoid(x)
    }

    fn input_grad(&self, x: f64, _: &[f64]) -> f64 {
        swish_grad(x, 1.0)
    }
}

/// d/dx x·σ(βx) = σ(βx) + βx·σ(βx)·σ(-βx).
#[inline]
fn swish_grad(x: f64, beta: f64) -> f64 {
    let s = sigmoid(beta * x);
    s + beta * x * s * sigmoid(-beta * x)
}

/// x·σ(βx) with learnable per-site β.
#[derive(Debug, Clone, Copy)]
pub struct ParametricSwish {
    pub init_beta: f64,
}

impl Default for ParametricSwish {
    fn default() -> Self {
        ParametricSwish { init_beta: 1.0 }
    }
}

impl Activation for ParametricSwish {
    fn name(&self) -> &'static str {
        "pswish"
    }

    fn param_count(&self) -> usize {
        1
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["beta"]
    }

    fn init_params(&self) -> Vec<f64> {
        vec![self.init_beta]
    }

    fn value(&self, x: f64, p: &[f64]) -> f64 {
        x * sigmoid(p[0] * x)
    }

    fn input_grad(&self, x: f64, p: &[f64]) -> f64 {
        swish_grad(x, p[0])
    }

    fn param_grads(&self, x: f64, p: &[f64], out: &mut [f64]) {
        // df/dβ = x²·σ(βx)·σ(-βx).
        let b = p[0];
        out[0] = x * x * sigmoid(b * x) * sigmoid(-b * x);
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SigmoidAct;

impl Activation for SigmoidAct {
    fn name(&self) -> &'static str {
        "sigmoid"
    }

    fn value(&self, x: f64, _: &[f64]) -> f64 {
        sigmoid(x)
    }

    fn input_grad(&self, x: f64, _: &[f64]) -> f64 {
        let s = sigmoid(x);
        s * sigmoid(-x)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TanhAct;

impl Activation for TanhAct {
    fn name(&self) -> &'static str {
        "tanh"
    }

    fn value(&self, x: f64, _: &[f64]) -> f64 {
        x.tanh()
    }

    fn input_grad(&self, x: f64, _: &[f64]) -> f64 {
        let t = x.tanh();
        1.0 - t * t
    }
}

/// x for x > 0, α(e^x - 1) otherwise.
#[derive(Debug, Clone, Copy)]
pub struct Elu {
    pub alpha: f64,
}

impl Default for Elu {
    fn default() -> Self {
        Elu { alpha: 1.0 }
    }
}

impl Activation for Elu {
    fn name(&self) -> &'static str {
        "elu"
    }

    fn value(&self, x: f64, _: &[f64]) -> f64 {
        if x > 0.0 {
            x
        } else {
            self.alpha * x.exp_m1()
        }
    }

    fn input_grad(&self, x: f64, _: &[f64]) -> f64 {
        if x > 0.0 {
            1.0
        } else {
            self.alpha * x.exp()
        }
    }
}

/// λ·ELU(x; α) with the self-normalizing constants.
#[derive(Debug, Clone, Copy, Default)]
pub struct Selu;

impl Activation for Selu {
    fn name(&self) -> &'static str {
        "selu"
    }

    fn value(&self, x: f64, _: &[f64]) -> f64 {
        if x > 0.0 {
            SELU_LAMBDA * x
        } else {
            SELU_LAMBDA * SELU_ALPHA * x.exp_m1()
        }
    }

    fn input_grad(&self, x: f64, _: &[f64]) -> f64 {
        if x > 0.0 {
            SELU_LAMBDA
        } else {
            SELU_LAMBDA * SELU_ALPHA * x.exp()
        }
    }
}
