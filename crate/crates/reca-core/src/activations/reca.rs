//! ReCA: f(x) = α·max(0,x)·(σ(2x)^β + σ(x)^δ) with learnable α, β, δ.
//!
//! The (1 + tanh x)/2 factor is evaluated as σ(2x); the two forms agree to
//! machine precision and the sigmoid form keeps the power's base strictly
//! inside (0, 1), so β and δ gradients (which need ln of the base) are
//! always defined on the active branch.
//!
//! Shape of the function: a ReLU ramp whose slope is modulated by two
//! squashing terms. σ(2x)^β saturates twice as fast as σ(x)^δ (its tail
//! correction decays like e^{-2x} against e^{-x}), so β shapes the function
//! near the origin while δ keeps adjusting further out. For x → ∞ the sum
//! in parentheses tends to 2 and the function approaches a line of slope
//! 2α; for x ≤ 0 it is exactly zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{log_sigmoid, powf_unit, sigmoid};

use super::Activation;

/// Lower clamp for α. Keeps the output scale strictly positive so the
/// function can never collapse to the zero function or flip sign during
/// training.
pub const ALPHA_MIN: f64 = 1e-4;

pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_BETA: f64 = 0.05;
pub const DEFAULT_DELTA: f64 = 0.05;

/// One activation site's learnable triple (α, β, δ).
///
/// Invariants, enforced at construction and restored by
/// [`Reca::project`] after optimizer steps: α ≥ [`ALPHA_MIN`], β ≥ 0,
/// δ ≥ 0. Non-negative exponents are what make the function monotone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecaParams {
    alpha: f64,
    beta: f64,
    delta: f64,
}

impl Default for RecaParams {
    fn default() -> Self {
        RecaParams { alpha: DEFAULT_ALPHA, beta: DEFAULT_BETA, delta: DEFAULT_DELTA }
    }
}

/// Gradient of f at one input with respect to (α, β, δ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecaGrads {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
}

impl RecaParams {
    pub fn new(alpha: f64, beta: f64, delta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && delta.is_finite()) {
            return Err(Error::NonFinite(format!(
                "activation parameters ({alpha}, {beta}, {delta})"
            )));
        }
        if alpha < ALPHA_MIN {
            return Err(Error::Domain(format!("alpha = {alpha} is below {ALPHA_MIN}")));
        }
        if beta < 0.0 || delta < 0.0 {
            return Err(Error::Domain(format!(
                "exponents must be non-negative, got beta = {beta}, delta = {delta}"
            )));
        }
        Ok(RecaParams { alpha, beta, delta })
    }

    /// The parameter point (1/2, 0, 0), at which f(x) = max(0, x) exactly:
    /// both powers are exactly 1, so f(x) = (0.5·x)·2, which is exact in
    /// binary floating point for every normal x.
    pub fn relu() -> Self {
        RecaParams { alpha: 0.5, beta: 0.0, delta: 0.0 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// f(x). Errors on non-finite x.
    pub fn value(&self, x: f64) -> Result<f64> {
        ensure_finite_input(x)?;
        Ok(value(x, self.alpha, self.beta, self.delta))
    }

    /// df/dx. At x = 0 the function is continuous but not differentiable
    /// (for most parameter values); the x ≤ 0 branch applies, giving 0.
    pub fn input_grad(&self, x: f64) -> Result<f64> {
        ensure_finite_input(x)?;
        Ok(input_grad(x, self.alpha, self.beta, self.delta))
    }

    /// (df/dα, df/dβ, df/dδ). All three are zero for x ≤ 0.
    pub fn param_grads(&self, x: f64) -> Result<RecaGrads> {
        ensure_finite_input(x)?;
        let mut out = [0.0; 3];
        param_grads(x, self.alpha, self.beta, self.delta, &mut out);
        Ok(RecaGrads { alpha: out[0], beta: out[1], delta: out[2] })
    }

    /// Deliberately uncorrected derivative variant whose first term is
    /// α·f(x) instead of α·g(x), where g is the parenthesized sum. This
    /// form circulates in writing but does not match finite differences;
    /// it is kept only so diagnostics can quantify the discrepancy. See
    /// `reca gradcheck --erratum`.
    pub fn input_grad_uncorrected(&self, x: f64) -> Result<f64> {
        ensure_finite_input(x)?;
        if x <= 0.0 {
            return Ok(0.0);
        }
        let f = value(x, self.alpha, self.beta, self.delta);
        let gp = g_prime(x, self.beta, self.delta);
        Ok(self.alpha * f + self.alpha * x * gp)
    }
}

fn ensure_finite_input(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("activation input {x}")))
    }
}

/// g(x) = σ(2x)^β + σ(x)^δ, the slope-modulation factor.
#[inline]
fn g(x: f64, beta: f64, delta: f64) -> f64 {
    powf_unit(sigmoid(2.0 * x), beta) + powf_unit(sigmoid(x), delta)
}

/// g'(x) = 2β·σ(2x)^β·σ(-2x) + δ·σ(x)^δ·σ(-x), using d/dx σ(kx)^p =
/// k·p·σ(kx)^p·σ(-kx). σ(-kx) is evaluated directly rather than as
/// 1 - σ(kx), which would lose precision once σ saturates.
#[inline]
fn g_prime(x: f64, beta: f64, delta: f64) -> f64 {
    let pb = powf_unit(sigmoid(2.0 * x), beta);
    let pd = powf_unit(sigmoid(x), delta);
    2.0 * beta * pb * sigmoid(-2.0 * x) + delta * pd * sigmoid(-x)
}

#[inline]
pub(super) fn value(x: f64, alpha: f64, beta: f64, delta: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    // Evaluation order (α·x)·g keeps the β = δ = 0 case exact: g is then
    // exactly 2.0 and (0.5·x)·2.0 reproduces x bit for bit.
    (alpha * x) * g(x, beta, delta)
}

#[inline]
pub(super) fn input_grad(x: f64, alpha: f64, beta: f64, delta: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    alpha * (g(x, beta, delta) + x * g_prime(x, beta, delta))
}

/// Writes (df/dα, df/dβ, df/dδ) into `out`.
///
/// df/dβ = α·x·σ(2x)^β·ln σ(2x) and likewise for δ; ln σ goes through the
/// stable [`log_sigmoid`] so the gradient stays accurate where σ rounds
/// to 1.
#[inline]
pub(super) fn param_grads(x: f64, alpha: f64, beta: f64, delta: f64, out: &mut [f64]) {
    if x <= 0.0 {
        out[..3].fill(0.0);
        return;
    }
    let pb = powf_unit(sigmoid(2.0 * x), beta);
    let pd = powf_unit(sigmoid(x), delta);
    out[0] = x * (pb + pd);
    out[1] = alpha * x * pb * log_sigmoid(2.0 * x);
    out[2] = alpha * x * pd * log_sigmoid(x);
}

/// Fused backward: returns df/dx and writes the parameter gradients,
/// sharing the power evaluations between the two. This is the training hot
/// path; the standalone entry points above recompute instead.
#[inline]
pub(super) fn backward(x: f64, alpha: f64, beta: f64, delta: f64, out: &mut [f64]) -> f64 {
    if x <= 0.0 {
        out[..3].fill(0.0);
        return 0.0;
    }
    let s2m = sigmoid(-2.0 * x);
    let s1m = sigmoid(-x);
    let pb = powf_unit(sigmoid(2.0 * x), beta);
    let pd = powf_unit(sigmoid(x), delta);
    let gv = pb + pd;
    let gp = 2.0 * beta * pb * s2m + delta * pd * s1m;
    out[0] = x * gv;
    out[1] = alpha * x * pb * log_sigmoid(2.0 * x);
    out[2] = alpha * x * pd * log_sigmoid(x);
    alpha * (gv + x * gp)
}

/// Trait adapter: ReCA as a zoo member with three learnable parameters per
/// site. `init` seeds fresh sites.
#[derive(Debug, Clone, Copy, Default)]
pub struct Reca {
    pub init: RecaParams,
}

impl Activation for Reca {
    fn name(&self) -> &'static str {
        "reca"
    }

    fn param_count(&self) -> usize {
        3
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["alpha", "beta", "delta"]
    }

    fn init_params(&self) -> Vec<f64> {
        vec![self.init.alpha, self.init.beta, self.init.delta]
    }

    fn value(&self, x: f64, p: &[f64]) -> f64 {
        value(x, p[0], p[1], p[2])
    }

    fn input_grad(&self, x: f64, p: &[f64]) -> f64 {
        input_grad(x, p[0], p[1], p[2])
    }

    fn param_grads(&self, x: f64, p: &[f64], out: &mut [f64]) {
        param_grads(x, p[0], p[1], p[2], out);
    }

    fn backward(&self, x: f64, p: &[f64], out: &mut [f64]) -> f64 {
        backward(x, p[0], p[1], p[2], out)
    }

    fn project(&self, p: &mut [f64]) {
        if p[0] < ALPHA_MIN {
            p[0] = ALPHA_MIN;
        }
        if p[1] < 0.0 {
            p[1] = 0.0;
        }
        if p[2] < 0.0 {
            p[2] = 0.0;
        }
    }
}
