//! Fully connected layer. Inputs of any rank are treated as [N, features]:
//! a conv stack feeding a dense head needs no explicit flatten layer, and
//! the backward pass restores the original input shape.

use rand_chacha::ChaCha8Rng;

use crate::element::Element;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

use super::init::kaiming_uniform;
use super::linalg::{axpy, dot};
use super::{Mode, Param, ParamClass};

#[derive(Debug)]
pub struct Dense<E: Element> {
    in_features: usize,
    out_features: usize,
    /// [in_features][out_features] row-major: w[i*out + o].
    weight: Param<E>,
    bias: Option<Param<E>>,
    cache: Option<Cache<E>>,
}

#[derive(Debug)]
struct Cache<E: Element> {
    input: Tensor<E>,
}

impl<E: Element> Dense<E> {
    pub fn new(in_features: usize, out_features: usize, bias: bool, rng: &mut ChaCha8Rng) -> Self {
        let weight = Param::new(
            kaiming_uniform(in_features * out_features, in_features, rng),
            ParamClass::Weight,
        );
        let bias = bias.then(|| Param::new(vec![E::zero(); out_features], ParamClass::Bias));
        Dense { in_features, out_features, weight, bias, cache: None }
    }

    pub fn forward(&mut self, x: &Tensor<E>, mode: Mode) -> Result<Tensor<E>> {
        let n = x.dim(0);
        let features = x.len() / n;
        if features != self.in_features {
            return Err(Error::Shape(format!(
                "dense layer wants {} features, input {:?} flattens to {features}",
                self.in_features,
                x.shape()
            )));
        }
        let mut y = Tensor::zeros(&[n, self.out_features]);
        let w = &self.weight.value;
        for s in 0..n {
            let xrow = &x.data()[s * features..(s + 1) * features];
            let yrow = &mut y.data_mut()[s * self.out_features..(s + 1) * self.out_features];
            for (i, &xi) in xrow.iter().enumerate() {
                if xi != E::zero() {
                    axpy(xi, &w[i * self.out_features..(i + 1) * self.out_features], yrow);
                }
            }
            if let Some(b) = &self.bias {
                for (yo, bo) in yrow.iter_mut().zip(&b.value) {
                    *yo += *bo;
                }
            }
        }
        self.cache = match mode {
            Mode::Train => Some(Cache { input: x.clone() }),
            Mode::Eval => None,
        };
        Ok(y)
    }

    pub fn backward(&mut self, upstream: &Tensor<E>) -> Result<Tensor<E>> {
        let cache = self
            .cache
            .as_ref()
            .ok_or_else(|| Error::Domain("dense backward without a train-mode forward".into()))?;
        let n = cache.input.dim(0);
        if upstream.shape() != [n, self.out_features] {
            return Err(Error::Shape(format!(
                "dense backward wants [{n}, {}], got {:?}",
                self.out_features,
                upstream.shape()
            )));
        }
        let features = self.in_features;
        let mut d_input = Tensor::zeros(cache.input.shape());
        let w = &self.weight.value;
        let dw = &mut self.weight.grad;
        for s in 0..n {
            let urow = &upstream.data()[s * self.out_features..(s + 1) * self.out_features];
            let xrow = &cache.input.data()[s * features..(s + 1) * features];
            let drow = &mut d_input.data_mut()[s * features..(s + 1) * features];
            for i in 0..features {
                let wrow = &w[i * self.out_features..(i + 1) * self.out_features];
                drow[i] += dot(urow, wrow);
                let xi = xrow[i];
                if xi != E::zero() {
                    axpy(xi, urow, &mut dw[i * self.out_features..(i + 1) * self.out_features]);
                }
            }
            if let Some(b) = &mut self.bias {
                for (go, uo) in b.grad.iter_mut().zip(urow) {
                    *go += *uo;
                }
            }
        }
        Ok(d_input)
    }

    pub fn collect_params<'a>(&'a mut self, out: &mut Vec<&'a mut Param<E>>) {
        out.push(&mut self.weight);
        if let Some(b) = &mut self.bias {
            out.push(b);
        }
    }

    #[cfg(test)]
    pub(crate) fn set_weights(&mut self, w: Vec<E>, b: Option<Vec<E>>) {
        assert_eq!(w.len(), self.weight.value.len());
        self.weight.value = w;
        if let (Some(bias), Some(bv)) = (&mut self.bias, b) {
            bias.value = bv;
        }
    }
}
