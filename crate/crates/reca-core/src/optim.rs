//! Optimizers, the cosine learning-rate schedule, and activation-parameter
//! regularization.
//!
//! Optimizer state is keyed by parameter position in the model's fixed
//! traversal order. Activation-class parameters can run at a scaled
//! learning rate (`act_lr_scale`); scale 0 freezes them, which is how the
//! ReLU-reduction twin runs keep ReCA's parameters pinned at (1/2, 0, 0).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::element::Element;
use crate::error::{Error, Result};
use crate::nn::{Param, ParamClass};

/// Cosine annealing from `lr0` down to `eta_min` over `total_epochs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub lr0: f64,
    pub eta_min: f64,
    pub total_epochs: usize,
}

impl ScheduleSpec {
    pub fn new(lr0: f64, eta_min: f64, total_epochs: usize) -> Result<Self> {
        if !(lr0.is_finite() && eta_min.is_finite()) || eta_min <= 0.0 || lr0 <= eta_min {
            return Err(Error::Config(format!(
                "cosine schedule wants lr0 > eta_min > 0, got lr0 = {lr0}, eta_min = {eta_min}"
            )));
        }
        if total_epochs == 0 {
            return Err(Error::Config("cosine schedule wants total_epochs >= 1".into()));
        }
        Ok(ScheduleSpec { lr0, eta_min, total_epochs })
    }
}

/// Learning rate for the given epoch index (0-based; epoch == total is the
/// fully annealed end state). The endpoints are returned exactly rather
/// than through the cosine expression, whose rounding would miss them by
/// an ulp.
pub fn cosine_lr(epoch: usize, spec: &ScheduleSpec) -> Result<f64> {
    if epoch > spec.total_epochs {
        return Err(Error::Domain(format!(
            "epoch {epoch} beyond schedule end {}",
            spec.total_epochs
        )));
    }
    if epoch == 0 {
        return Ok(spec.lr0);
    }
    if epoch == spec.total_epochs {
        return Ok(spec.eta_min);
    }
    let t = epoch as f64 / spec.total_epochs as f64;
    Ok(spec.eta_min + (spec.lr0 - spec.eta_min) * 0.5 * (1.0 + (std::f64::consts::PI * t).cos()))
}

/// Which optimizer a config asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
        })
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adam" => Ok(OptimizerKind::Adam),
            other => Err(Error::Config(format!("unknown optimizer {other:?}; expected sgd or adam"))),
        }
    }
}

pub const SGD_MOMENTUM: f64 = 0.9;
pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// SGD with classical momentum: v ← µ·v + g, p ← p − lr·v.
#[derive(Debug)]
pub struct Sgd<E: Element> {
    momentum: f64,
    velocity: Vec<Vec<E>>,
}

impl<E: Element> Sgd<E> {
    pub fn new(momentum: f64) -> Self {
        Sgd { momentum, velocity: Vec::new() }
    }
}

/// Adam with bias correction.
#[derive(Debug)]
pub struct Adam<E: Element> {
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: u32,
    m: Vec<Vec<E>>,
    v: Vec<Vec<E>>,
}

impl<E: Element> Adam<E> {
    pub fn new(beta1: f64, beta2: f64, eps: f64) -> Self {
        Adam { beta1, beta2, eps, step: 0, m: Vec::new(), v: Vec::new() }
    }
}

#[derive(Debug)]
pub enum Optimizer<E: Element> {
    Sgd(Sgd<E>),
    Adam(Adam<E>),
}

impl<E: Element> Optimizer<E> {
    /// Optimizer with its standard hyperparameters.
    pub fn standard(kind: OptimizerKind) -> Self {
        match kind {
            OptimizerKind::Sgd => Optimizer::Sgd(Sgd::new(SGD_MOMENTUM)),
            OptimizerKind::Adam => Optimizer::Adam(Adam::new(ADAM_BETA1, ADAM_BETA2, ADAM_EPS)),
        }
    }

    /// One update over the model's parameter sequence. State buffers are
    /// sized on first use and must keep their shape afterwards.
    /// Activation-class parameters use lr·act_lr_scale.
    pub fn step(
        &mut self,
        params: &mut [&mut Param<E>],
        lr: f64,
        act_lr_scale: f64,
    ) -> Result<()> {
        if !(lr.is_finite() && lr >= 0.0) || !(act_lr_scale.is_finite() && act_lr_scale >= 0.0) {
            return Err(Error::Domain(format!(
                "learning rate {lr} / activation scale {act_lr_scale} out of range"
            )));
        }
        match self {
            Optimizer::Sgd(sgd) => sgd.step(params, lr, act_lr_scale),
            Optimizer::Adam(adam) => adam.step(params, lr, act_lr_scale),
        }
    }
}

fn effective_lr(class: ParamClass, lr: f64, act_lr_scale: f64) -> f64 {
    match class {
        ParamClass::Activation => lr * act_lr_scale,
        _ => lr,
    }
}

fn check_state_shape<E: Element>(buffers: &[Vec<E>], params: &[&mut Param<E>]) -> Result<()> {
    if buffers.len() != params.len() {
        return Err(Error::Shape(format!(
            "optimizer state holds {} parameter tensors, model has {}",
            buffers.len(),
            params.len()
        )));
    }
    for (i, (buf, p)) in buffers.iter().zip(params.iter()).enumerate() {
        if buf.len() != p.len() {
            return Err(Error::Shape(format!(
                "optimizer state {i} has {} scalars, parameter has {}",
                buf.len(),
                p.len()
            )));
        }
    }
    Ok(())
}

impl<E: Element> Sgd<E> {
    fn step(&mut self, params: &mut [&mut Param<E>], lr: f64, act_lr_scale: f64) -> Result<()> {
        if self.velocity.is_empty() {
            self.velocity = params.iter().map(|p| vec![E::zero(); p.len()]).collect();
        }
        check_state_shape(&self.velocity, params)?;
        let mu = E::narrow(self.momentum);
        for (p, vel) in params.iter_mut().zip(&mut self.velocity) {
            let rate = E::narrow(effective_lr(p.class, lr, act_lr_scale));
            for ((value, v), &g) in p.value.iter_mut().zip(vel.iter_mut()).zip(&p.grad) {
                *v = mu * *v + g;
                *value -= rate * *v;
            }
        }
        Ok(())
    }
}

impl<E: Element> Adam<E> {
    fn step(&mut self, params: &mut [&mut Param<E>], lr: f64, act_lr_scale: f64) -> Result<()> {
        if self.m.is_empty() {
            self.m = params.iter().map(|p| vec![E::zero(); p.len()]).collect();
            self.v = params.iter().map(|p| vec![E::zero(); p.len()]).collect();
        }
        check_state_shape(&self.m, params)?;
        check_state_shape(&self.v, params)?;
        self.step += 1;
        let t = self.step as i32;
        let c1 = E::narrow(1.0 / (1.0 - self.beta1.powi(t)));
        let c2 = E::narrow(1.0 / (1.0 - self.beta2.powi(t)));
        let b1 = E::narrow(self.beta1);
        let b2 = E::narrow(self.beta2);
        let one_m_b1 = E::narrow(1.0 - self.beta1);
        let one_m_b2 = E::narrow(1.0 - self.beta2);
        let eps = E::narrow(self.eps);
        for (p, (ms, vs)) in params.iter_mut().zip(self.m.iter_mut().zip(&mut self.v)) {
            let rate = E::narrow(effective_lr(p.class, lr, act_lr_scale));
            for ((value, (m, v)), &g) in
                p.value.iter_mut().zip(ms.iter_mut().zip(vs.iter_mut())).zip(&p.grad)
            {
                *m = b1 * *m + one_m_b1 * g;
                *v = b2 * *v + one_m_b2 * g * g;
                let mhat = *m * c1;
                let vhat = *v * c2;
                *value -= rate * mhat / (vhat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

/// L2 penalty on activation-class parameters only: adds 2·strength·p to
/// their gradients and returns the penalty value strength·Σp². Weight and
/// bias tensors are untouched; the regularizer exists to keep learnable
/// activation shapes near the origin, not as general weight decay.
pub fn activation_l2<E: Element>(params: &mut [&mut Param<E>], strength: f64) -> Result<f64> {
    if !(strength.is_finite() && strength >= 0.0) {
        return Err(Error::Domain(format!("l2 strength {strength} out of range")));
    }
    if strength == 0.0 {
        return Ok(0.0);
    }
    let two_s = E::narrow(2.0 * strength);
    let mut sumsq = 0.0;
    for p in params.iter_mut() {
        if p.class != ParamClass::Activation {
            continue;
        }
        for (g, &value) in p.grad.iter_mut().zip(&p.value) {
            sumsq += value.widen() * value.widen();
            *g += two_s * value;
        }
    }
    Ok(strength * sumsq)
}
