//! Deterministic neural-network training engine built around the ReCA
//! parametric activation, f(x) = α·max(0,x)·(σ(2x)^β + σ(x)^δ), with exact
//! analytic gradients for the input and for all learnable parameters.
//!
//! Design goals, in order:
//!
//! 1. **Verifiability.** Every gradient is checked against finite
//!    differences; every claimed identity (exact reduction to ReLU,
//!    monotonicity, tail decay) has a test that would fail if the
//!    implementation drifted.
//! 2. **Determinism.** All randomness flows through seeded ChaCha8 streams;
//!    reductions run in a fixed order; the same config and seed produce
//!    bitwise-identical results.
//! 3. **Smallness.** Dense/conv/batchnorm layers, two optimizers, one loss.
//!    Enough to train image classifiers at desk scale, nothing more.
//!
//! Fallible operations return [`error::Result`]; panics are reserved for
//! internal invariant violations, never for user input.

pub mod activations;
pub mod data;
pub mod element;
pub mod error;
pub mod experiments;
pub mod math;
pub mod nn;
pub mod optim;
pub mod rng;
pub mod tensor;

pub use element::{Element, Precision};
pub use error::{Error, Result};
pub use tensor::Tensor;
