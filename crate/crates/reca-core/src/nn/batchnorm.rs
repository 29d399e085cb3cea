//! Per-channel batch normalization for [N, C] or [N, C, H, W] inputs.
//!
//! Train mode standardizes with the current batch's statistics and updates
//! running statistics by EMA: running = (1-momentum)·running + momentum·batch.
//! Eval mode standardizes with the running statistics. Both use the biased
//! (1/m) variance. Statistics are accumulated in f64 whatever the element
//! type, in a fixed order.

use crate::element::Element;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

use super::{Mode, Param, ParamClass};

pub const BN_EPS: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.1;

#[derive(Debug)]
pub struct BatchNorm<E: Element> {
    channels: usize,
    eps: f64,
    momentum: f64,
    gain: Param<E>,
    shift: Param<E>,
    running_mean: Vec<f64>,
    running_var: Vec<f64>,
    cache: Option<Cache<E>>,
}

#[derive(Debug)]
struct Cache<E: Element> {
    xhat: Tensor<E>,
    invstd: Vec<f64>,
}

/// (N, C, spatial) view of a rank-2 or rank-4 tensor.
fn ncs(shape: &[usize]) -> Result<(usize, usize, usize)> {
    match shape {
        &[n, c] => Ok((n, c, 1)),
        &[n, c, h, w] => Ok((n, c, h * w)),
        other => Err(Error::Shape(format!("batchnorm wants [N, C] or [N, C, H, W], got {other:?}"))),
    }
}

impl<E: Element> BatchNorm<E> {
    pub fn new(channels: usize) -> Self {
        BatchNorm {
            channels,
            eps: BN_EPS,
            momentum: BN_MOMENTUM,
            gain: Param::new(vec![E::one(); channels], ParamClass::Norm),
            shift: Param::new(vec![E::zero(); channels], ParamClass::Norm),
            running_mean: vec![0.0; channels],
            running_var: vec![1.0; channels],
            cache: None,
        }
    }

    pub fn forward(&mut self, x: &Tensor<E>, mode: Mode) -> Result<Tensor<E>> {
        let (n, c, s) = ncs(x.shape())?;
        if c != self.channels {
            return Err(Error::Shape(format!(
                "batchnorm built for {} channels, input has {c}",
                self.channels
            )));
        }
        match mode {
            Mode::Train => self.forward_train(x, n, c, s),
            Mode::Eval => Ok(self.forward_eval(x, n, c, s)),
        }
    }

    // Index loops keep the [N, C, S] stride arithmetic visible.
    #[allow(clippy::needless_range_loop)]
    fn forward_train(&mut self, x: &Tensor<E>, n: usize, c: usize, s: usize) -> Result<Tensor<E>> {
        let m = n * s;
        if m < 2 {
            return Err(Error::Domain(format!(
                "train-mode batchnorm needs at least 2 values per channel, got {m}"
            )));
        }
        let mut y = Tensor::zeros(x.shape());
        let mut xhat = Tensor::zeros(x.shape());
        let mut invstds = vec![0.0; c];
        let xd = x.data();
        for ch in 0..c {
            let mut sum = 0.0;
            for smp in 0..n {
                let base = (smp * c + ch) * s;
                for v in &xd[base..base + s] {
                    sum += v.widen();
                }
            }
            let mean = sum / m as f64;
            let mut varsum = 0.0;
            for smp in 0..n {
                let base = (smp * c + ch) * s;
                for v in &xd[base..base + s] {
                    let d = v.widen() - mean;
                    varsum += d * d;
                }
            }
            let var = varsum / m as f64;
            let invstd = 1.0 / (var + self.eps).sqrt();
            invstds[ch] = invstd;
            self.running_mean[ch] = (1.0 - self.momentum) * self.running_mean[ch] + self.momentum * mean;
            self.running_var[ch] = (1.0 - self.momentum) * self.running_var[ch] + self.momentum * var;

            let g = self.gain.value[ch].widen();
            let b = self.shift.value[ch].widen();
            for smp in 0..n {
                let base = (smp * c + ch) * s;
                for i in base..base + s {
                    let xh = (xd[i].widen() - mean) * invstd;
                    xhat.data_mut()[i] = E::narrow(xh);
                    y.data_mut()[i] = E::narrow(g * xh + b);
                }
            }
        }
        self.cache = Some(Cache { xhat, invstd: invstds });
        Ok(y)
    }

    #[allow(clippy::needless_range_loop)]
    fn forward_eval(&self, x: &Tensor<E>, n: usize, c: usize, s: usize) -> Tensor<E> {
        let mut y = Tensor::zeros(x.shape());
        let xd = x.data();
        for ch in 0..c {
            let mean = self.running_mean[ch];
            let invstd = 1.0 / (self.running_var[ch] + self.eps).sqrt();
            let g = self.gain.value[ch].widen();
            let b = self.shift.value[ch].widen();
            for smp in 0..n {
                let base = (smp * c + ch) * s;
                for i in base..base + s {
                    y.data_mut()[i] = E::narrow(g * (xd[i].widen() - mean) * invstd + b);
                }
            }
        }
        y
    }

    pub fn backward(&mut self, upstream: &Tensor<E>) -> Result<Tensor<E>> {
        let cache = self.cache.as_ref().ok_or_else(|| {
            Error::Domain("batchnorm backward without a train-mode forward".into())
        })?;
        if upstream.shape() != cache.xhat.shape() {
            return Err(Error::Shape(format!(
                "batchnorm backward wants {:?}, got {:?}",
                cache.xhat.shape(),
                upstream.shape()
            )));
        }
        let (n, c, s) = ncs(upstream.shape())?;
        let m = (n * s) as f64;
        let mut d_input = Tensor::zeros(upstream.shape());
        let ud = upstream.data();
        let xh = cache.xhat.data();
        for ch in 0..c {
            let mut sum_dy = 0.0;
            let mut sum_dy_xhat = 0.0;
            for smp in 0..n {
                let base = (smp * c + ch) * s;
                for i in base..base + s {
                    let dy = ud[i].widen();
                    sum_dy += dy;
                    sum_dy_xhat += dy * xh[i].widen();
                }
            }
            self.gain.grad[ch] += E::narrow(sum_dy_xhat);
            self.shift.grad[ch] += E::narrow(sum_dy);

            // dx = γ·invstd·(dy - mean(dy) - xhat·mean(dy·xhat)).
            let g = self.gain.value[ch].widen();
            let scale = g * cache.invstd[ch];
            let mean_dy = sum_dy / m;
            let mean_dy_xhat = sum_dy_xhat / m;
            for smp in 0..n {
                let base = (smp * c + ch) * s;
                for i in base..base + s {
                    let dy = ud[i].widen();
                    d_input.data_mut()[i] =
                        E::narrow(scale * (dy - mean_dy - xh[i].widen() * mean_dy_xhat));
                }
            }
        }
        Ok(d_input)
    }

    pub fn collect_params<'a>(&'a mut self, out: &mut Vec<&'a mut Param<E>>) {
        out.push(&mut self.gain);
        out.push(&mut self.shift);
    }

    /// Running statistics, exposed for tests and reports.
    pub fn running_stats(&self) -> (&[f64], &[f64]) {
        (&self.running_mean, &self.running_var)
    }

    #[cfg(test)]
    pub(crate) fn set_running_stats(&mut self, mean: Vec<f64>, var: Vec<f64>) {
        self.running_mean = mean;
        self.running_var = var;
    }
}
