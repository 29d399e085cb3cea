//! Scalar element abstraction: the engine runs in f32 for training and f64
//! for verification paths, selected at runtime.

use std::fmt;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Numeric width of a tensor or a training run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    F64,
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        })
    }
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "f32" | "32" => Ok(Precision::F32),
            "f64" | "64" => Ok(Precision::F64),
            other => Err(Error::Config(format!(
                "unknown precision {other:?}; expected f32 or f64"
            ))),
        }
    }
}

/// Tensor element. Implemented for `f32` and `f64` only; everything numeric
/// in the engine is generic over this.
pub trait Element:
    Float
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Default
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    const PRECISION: Precision;

    /// Narrowing (or identity) conversion from f64.
    fn narrow(v: f64) -> Self;

    /// Widening (or identity) conversion to f64. Exact for both element
    /// types: every f32 is representable as an f64.
    fn widen(self) -> f64;
}

impl Element for f32 {
    const PRECISION: Precision = Precision::F32;

    fn narrow(v: f64) -> Self {
        v as f32
    }

    fn widen(self) -> f64 {
        self as f64
    }
}

impl Element for f64 {
    const PRECISION: Precision = Precision::F64;

    fn narrow(v: f64) -> Self {
        v
    }

    fn widen(self) -> f64 {
        self
    }
}
