//! Numerically stable scalar helpers shared by the activation zoo.
//!
//! All activation math runs in f64 regardless of the tensor element type;
//! the layer boundary converts. That keeps identities like the exact
//! reduction to ReLU independent of training precision.

/// Logistic sigmoid 1/(1+e^{-x}), stable for any finite x.
///
/// Large negative inputs go through e^x/(1+e^x) so the exponential
/// underflows to 0 instead of overflowing to infinity.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^x) (softplus), stable at both tails.
#[inline]
pub fn log1pexp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// ln σ(x) = -log1pexp(-x). Accurate even where σ(x) rounds to 1 and the
/// naive `sigmoid(x).ln()` would return exactly 0.
#[inline]
pub fn log_sigmoid(x: f64) -> f64 {
    -log1pexp(-x)
}

/// base^e for base in (0, 1], as exp(e·ln base).
///
/// A zero exponent returns 1.0 exactly, whatever the base; this is what
/// makes parameter points with β = δ = 0 collapse to ReLU bitwise instead
/// of merely approximately.
#[inline]
pub fn powf_unit(base: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        (e * base.ln()).exp()
    }
}
