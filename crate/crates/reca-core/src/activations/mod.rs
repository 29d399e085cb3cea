//! The activation zoo: every function the engine can train with sits
//! behind one scalar trait and is registered by name, so configs and the
//! CLI select variants at runtime without the engine knowing the list.

mod baselines;
mod reca;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use baselines::{
    Elu, LeakyRelu, ParametricSwish, Prelu, Relu, Selu, SigmoidAct, Swish, TanhAct,
    LEAKY_RELU_DEFAULT_SLOPE, PRELU_DEFAULT_INIT_SLOPE, SELU_ALPHA, SELU_LAMBDA,
};
pub use reca::{
    Reca, RecaGrads, RecaParams, ALPHA_MIN, DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_DELTA,
};

/// Scalar activation strategy: value, input gradient, and gradients for
/// any learnable per-site parameters.
///
/// Implementations are pure functions of `(x, params)`: no state, safe to
/// share. All math is f64; tensor layers convert at the boundary so the
/// function's identities do not depend on training precision.
pub trait Activation: Send + Sync {
    /// Registry name, also used in reports and CSV output.
    fn name(&self) -> &'static str;

    /// Learnable scalars per activation site (0 for fixed functions).
    fn param_count(&self) -> usize {
        0
    }

    /// Report names for the learnable scalars, in `params` order.
    fn param_names(&self) -> &'static [&'static str] {
        &[]
    }

    /// Initial values for a fresh site; length equals `param_count()`.
    fn init_params(&self) -> Vec<f64> {
        Vec::new()
    }

    /// f(x) under the given site parameters.
    fn value(&self, x: f64, params: &[f64]) -> f64;

    /// df/dx. At kinks, the x ≤ 0 branch's slope.
    fn input_grad(&self, x: f64, params: &[f64]) -> f64;

    /// df/dparams[i] written into `out` (length `param_count()`).
    fn param_grads(&self, x: f64, params: &[f64], out: &mut [f64]) {
        let _ = (x, params);
        debug_assert!(out.is_empty(), "param_grads not implemented for {}", self.name());
    }

    /// Fused input and parameter gradients for the training loop; returns
    /// df/dx. Default just calls the two entry points; implementations
    /// with shared subexpressions override it.
    fn backward(&self, x: f64, params: &[f64], param_grads_out: &mut [f64]) -> f64 {
        self.param_grads(x, params, param_grads_out);
        self.input_grad(x, params)
    }

    /// Clamp site parameters back into their valid domain after an
    /// optimizer step. No-op for functions without constraints.
    fn project(&self, params: &mut [f64]) {
        let _ = params;
    }
}

/// Serializable description of an activation choice, including any fixed
/// hyperparameters and initial values for learnable ones. Builds the
/// trait object actually used by layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ActivationKind {
    Relu,
    LeakyRelu { slope: f64 },
    Prelu { init_slope: f64 },
    Swish,
    ParametricSwish { init_beta: f64 },
    Sigmoid,
    Tanh,
    Elu { alpha: f64 },
    Selu,
    Reca { init: RecaParams },
}

impl ActivationKind {
    pub fn reca_default() -> Self {
        ActivationKind::Reca { init: RecaParams::default() }
    }

    pub fn build(&self) -> Arc<dyn Activation> {
        match *self {
            ActivationKind::Relu => Arc::new(Relu),
            ActivationKind::LeakyRelu { slope } => Arc::new(LeakyRelu { slope }),
            ActivationKind::Prelu { init_slope } => Arc::new(Prelu { init_slope }),
            ActivationKind::Swish => Arc::new(Swish),
            ActivationKind::ParametricSwish { init_beta } => {
                Arc::new(ParametricSwish { init_beta })
            }
            ActivationKind::Sigmoid => Arc::new(SigmoidAct),
            ActivationKind::Tanh => Arc::new(TanhAct),
            ActivationKind::Elu { alpha } => Arc::new(Elu { alpha }),
            ActivationKind::Selu => Arc::new(Selu),
            ActivationKind::Reca { init } => Arc::new(Reca { init }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ActivationKind::Relu => "relu",
            ActivationKind::LeakyRelu { .. } => "lrelu",
            ActivationKind::Prelu { .. } => "prelu",
            ActivationKind::Swish => "swish",
            ActivationKind::ParametricSwish { .. } => "pswish",
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Tanh => "tanh",
            ActivationKind::Elu { .. } => "elu",
            ActivationKind::Selu => "selu",
            ActivationKind::Reca { .. } => "reca",
        }
    }

    /// f(x) at this kind's initial parameters, with input validation.
    /// Convenience for verification paths; layers use the trait object.
    pub fn value(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFinite(format!("activation input {x}")));
        }
        let act = self.build();
        Ok(act.value(x, &act.init_params()))
    }

    /// df/dx at this kind's initial parameters, with input validation.
    pub fn input_grad(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFinite(format!("activation input {x}")));
        }
        let act = self.build();
        Ok(act.input_grad(x, &act.init_params()))
    }
}

/// One registry row: a name plus a constructor that may take a `:`-suffixed
/// argument string from configs or the CLI.
pub struct RegistryEntry {
    pub name: &'static str,
    pub summary: &'static str,
    build: fn(Option<&str>) -> Result<ActivationKind>,
}

/// Every selectable activation. Configs and the CLI go through
/// [`parse_kind`]; this table is the single source of truth for what
/// exists.
pub static REGISTRY: &[RegistryEntry] = &[
    RegistryEntry {
        name: "relu",
        summary: "max(0, x)",
        build: |arg| {
            no_arg("relu", arg)?;
            Ok(ActivationKind::Relu)
        },
    },
    RegistryEntry {
        name: "lrelu",
        summary: "leaky ReLU, fixed negative slope (default 0.01)",
        build: |arg| {
            Ok(ActivationKind::LeakyRelu {
                slope: parse_one_arg("lrelu", arg)?.unwrap_or(LEAKY_RELU_DEFAULT_SLOPE),
            })
        },
    },
    RegistryEntry {
        name: "prelu",
        summary: "leaky ReLU with learnable slope (init 0.01)",
        build: |arg| {
            Ok(ActivationKind::Prelu {
                init_slope: parse_one_arg("prelu", arg)?.unwrap_or(PRELU_DEFAULT_INIT_SLOPE),
            })
        },
    },
    RegistryEntry {
        name: "swish",
        summary: "x·sigmoid(x)",
        build: |arg| {
            no_arg("swish", arg)?;
            Ok(ActivationKind::Swish)
        },
    },
    RegistryEntry {
        name: "pswish",
        summary: "x·sigmoid(beta·x) with learnable beta (init 1)",
        build: |arg| {
            Ok(ActivationKind::ParametricSwish {
                init_beta: parse_one_arg("pswish", arg)?.unwrap_or(1.0),
            })
        },
    },
    RegistryEntry {
        name: "sigmoid",
        summary: "1/(1+e^-x)",
        build: |arg| {
            no_arg("sigmoid", arg)?;
            Ok(ActivationKind::Sigmoid)
        },
    },
    RegistryEntry {
        name: "tanh",
        summary: "tanh(x)",
        build: |arg| {
            no_arg("tanh", arg)?;
            Ok(ActivationKind::Tanh)
        },
    },
    RegistryEntry {
        name: "elu",
        summary: "x or alpha·(e^x - 1) (default alpha 1)",
        build: |arg| Ok(ActivationKind::Elu { alpha: parse_one_arg("elu", arg)?.unwrap_or(1.0) }),
    },
    RegistryEntry {
        name: "selu",
        summary: "self-normalizing ELU",
        build: |arg| {
            no_arg("selu", arg)?;
            Ok(ActivationKind::Selu)
        },
    },
    RegistryEntry {
        name: "reca",
        summary: "alpha·max(0,x)·(sigmoid(2x)^beta + sigmoid(x)^delta), learnable (alpha,beta,delta)",
        build: |arg| {
            let init = match arg {
                None => RecaParams::default(),
                Some(s) => {
                    let parts: Vec<&str> = s.split(',').collect();
                    if parts.len() != 3 {
                        return Err(Error::Config(format!(
                            "reca takes three comma-separated initial values, got {s:?}"
                        )));
                    }
                    let mut v = [0.0; 3];
                    for (slot, raw) in v.iter_mut().zip(&parts) {
                        *slot = raw.trim().parse::<f64>().map_err(|_| {
                            Error::Config(format!("bad number {raw:?} in reca argument {s:?}"))
                        })?;
                    }
                    RecaParams::new(v[0], v[1], v[2])?
                }
            };
            Ok(ActivationKind::Reca { init })
        },
    },
];

fn no_arg(name: &str, arg: Option<&str>) -> Result<()> {
    match arg {
        None => Ok(()),
        Some(a) => Err(Error::Config(format!("{name} takes no argument, got {a:?}"))),
    }
}

fn parse_one_arg(name: &str, arg: Option<&str>) -> Result<Option<f64>> {
    match arg {
        None => Ok(None),
        Some(a) => a
            .trim()
            .parse::<f64>()
            .map(Some)
            .map_err(|_| Error::Config(format!("bad numeric argument {a:?} for {name}"))),
    }
}

/// Names of all registered activations, in registry order.
pub fn names() -> Vec<&'static str> {
    REGISTRY.iter().map(|e| e.name).collect()
}

/// Resolve `"name"` or `"name:args"` to an [`ActivationKind`].
/// Unknown names list the valid ones.
pub fn parse_kind(spec: &str) -> Result<ActivationKind> {
    let spec = spec.trim();
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (spec, None),
    };
    match REGISTRY.iter().find(|e| e.name == name) {
        Some(entry) => (entry.build)(arg),
        None => Err(Error::Config(format!(
            "unknown activation {name:?}; known: {}",
            names().join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_registry_name_parses_to_its_own_kind() {
        for entry in REGISTRY {
            let kind = parse_kind(entry.name).unwrap();
            assert_eq!(kind.name(), entry.name);
            let act = kind.build();
            assert_eq!(act.name(), entry.name);
            assert_eq!(act.init_params().len(), act.param_count());
            assert_eq!(act.param_names().len(), act.param_count());
        }
    }

    #[test]
    fn unknown_name_is_rejected_with_the_valid_list() {
        let err = parse_kind("gelu").unwrap_err().to_string();
        assert!(err.contains("unknown activation"), "{err}");
        assert!(err.contains("reca"), "{err}");
    }

    #[test]
    fn args_configure_the_kind() {
        assert_eq!(parse_kind("lrelu:0.2").unwrap(), ActivationKind::LeakyRelu { slope: 0.2 });
        assert_eq!(parse_kind("prelu:0.25").unwrap(), ActivationKind::Prelu { init_slope: 0.25 });
        let reca = parse_kind("reca:0.5,1,1").unwrap();
        assert_eq!(reca, ActivationKind::Reca { init: RecaParams::new(0.5, 1.0, 1.0).unwrap() });
        assert!(parse_kind("relu:0.1").is_err());
        assert!(parse_kind("reca:0.5,1").is_err());
        assert!(parse_kind("reca:-1,0,0").is_err());
    }

    #[test]
    fn learnable_param_counts() {
        assert_eq!(ActivationKind::Relu.build().param_count(), 0);
        assert_eq!(ActivationKind::reca_default().build().param_count(), 3);
        assert_eq!(parse_kind("prelu").unwrap().build().param_count(), 1);
        assert_eq!(parse_kind("pswish").unwrap().build().param_count(), 1);
    }

    #[test]
    fn non_finite_inputs_are_rejected() {
        for kind in [ActivationKind::Relu, ActivationKind::reca_default()] {
            assert!(kind.value(f64::NAN).is_err());
            assert!(kind.value(f64::INFINITY).is_err());
            assert!(kind.input_grad(f64::NEG_INFINITY).is_err());
            assert!(kind.value(0.0).is_ok());
        }
    }

    #[test]
    fn projection_clamps_into_the_valid_domain() {
        let reca = ActivationKind::reca_default().build();
        let mut p = [-0.1, -0.2, 0.3];
        reca.project(&mut p);
        assert_eq!(p, [ALPHA_MIN, 0.0, 0.3]);
        // Interior points are untouched.
        let mut q = [0.7, 0.01, 2.5];
        reca.project(&mut q);
        assert_eq!(q, [0.7, 0.01, 2.5]);
    }
}
