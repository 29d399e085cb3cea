//! Elementwise activation layer around any zoo member, with learnable
//! parameters at global, per-channel, or per-neuron granularity.
//!
//! For rank-2 inputs [N, F] "per-channel" means per feature; for rank-4
//! [N, C, H, W] it means per channel plane, the convention for
//! convolutional nets. Activation math runs in f64 and converts at the
//! boundary; parameter gradients accumulate in f64 before being added to
//! the (possibly f32) grad buffer, so large spatial sums do not lose the
//! small per-element contributions.

use std::sync::Arc;

use crate::activations::{Activation, ActivationKind};
use crate::element::Element;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

use super::{Granularity, Mode, Param, ParamClass};

pub struct ActivationLayer<E: Element> {
    kind: ActivationKind,
    act: Arc<dyn Activation>,
    granularity: Granularity,
    sites: usize,
    params_per_site: usize,
    /// [sites · params_per_site]; absent for fixed functions.
    params: Option<Param<E>>,
    sample_shape: Vec<usize>,
    cache: Option<Tensor<E>>,
}

impl<E: Element> std::fmt::Debug for ActivationLayer<E> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ActivationLayer")
            .field("kind", &self.kind)
            .field("granularity", &self.granularity)
            .field("sites", &self.sites)
            .finish()
    }
}

/// Number of parameter sites for a granularity over a per-sample shape.
pub fn site_count(granularity: Granularity, sample_shape: &[usize]) -> usize {
    match granularity {
        Granularity::Global => 1,
        Granularity::PerChannel => sample_shape.first().copied().unwrap_or(1),
        Granularity::PerNeuron => sample_shape.iter().product(),
    }
}

impl<E: Element> ActivationLayer<E> {
    pub fn new(
        kind: ActivationKind,
        granularity: Granularity,
        sample_shape: &[usize],
    ) -> Result<Self> {
        if sample_shape.is_empty() || sample_shape.iter().product::<usize>() == 0 {
            return Err(Error::Shape(format!(
                "activation layer fed empty shape {sample_shape:?}"
            )));
        }
        let act = kind.build();
        let sites = site_count(granularity, sample_shape);
        let params_per_site = act.param_count();
        let params = (params_per_site > 0).then(|| {
            let init = act.init_params();
            let mut values = Vec::with_capacity(sites * params_per_site);
            for _ in 0..sites {
                values.extend(init.iter().map(|&v| E::narrow(v)));
            }
            Param::new(values, ParamClass::Activation)
        });
        Ok(ActivationLayer {
            kind,
            act,
            granularity,
            sites,
            params_per_site,
            params,
            sample_shape: sample_shape.to_vec(),
            cache: None,
        })
    }

    pub fn kind(&self) -> ActivationKind {
        self.kind
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn activation(&self) -> &Arc<dyn Activation> {
        &self.act
    }

    /// Learnable parameter names, as reported by the zoo member.
    pub fn param_names(&self) -> &'static [&'static str] {
        self.act.param_names()
    }

    /// Site parameters widened to f64, site-major.
    pub fn params_f64(&self) -> Vec<f64> {
        match &self.params {
            Some(p) => p.value.iter().map(|v| v.widen()).collect(),
            None => Vec::new(),
        }
    }

    fn site_stride(&self) -> (usize, usize) {
        let sample: usize = self.sample_shape.iter().product();
        let spatial: usize = self.sample_shape.iter().skip(1).product::<usize>().max(1);
        (sample, spatial)
    }

    #[inline]
    fn site_of(&self, flat: usize, sample: usize, spatial: usize) -> usize {
        match self.granularity {
            Granularity::Global => 0,
            Granularity::PerChannel => (flat % sample) / spatial,
            Granularity::PerNeuron => flat % sample,
        }
    }

    pub fn forward(&mut self, x: &Tensor<E>, mode: Mode) -> Result<Tensor<E>> {
        if x.shape().len() != self.sample_shape.len() + 1
            || x.shape()[1..] != *self.sample_shape
        {
            return Err(Error::Shape(format!(
                "activation layer built for [N, {:?}], got {:?}",
                self.sample_shape,
                x.shape()
            )));
        }
        let (sample, spatial) = self.site_stride();
        let p64 = self.params_f64();
        let k = self.params_per_site;
        let mut y = Tensor::zeros(x.shape());
        for (flat, (&xi, yi)) in x.data().iter().zip(y.data_mut()).enumerate() {
            let site = self.site_of(flat, sample, spatial);
            *yi = E::narrow(self.act.value(xi.widen(), &p64[site * k..site * k + k]));
        }
        self.cache = match mode {
            Mode::Train => Some(x.clone()),
            Mode::Eval => None,
        };
        Ok(y)
    }

    pub fn backward(&mut self, upstream: &Tensor<E>) -> Result<Tensor<E>> {
        let x = self.cache.as_ref().ok_or_else(|| {
            Error::Domain("activation backward without a train-mode forward".into())
        })?;
        if upstream.shape() != x.shape() {
            return Err(Error::Shape(format!(
                "activation backward wants {:?}, got {:?}",
                x.shape(),
                upstream.shape()
            )));
        }
        let (sample, spatial) = self.site_stride();
        let p64 = self.params_f64();
        let k = self.params_per_site;
        let mut d_input = Tensor::zeros(x.shape());
        let mut pg = vec![0.0f64; k];
        let mut acc = vec![0.0f64; self.sites * k];
        for (flat, (&xi, di)) in x.data().iter().zip(d_input.data_mut()).enumerate() {
            let site = self.site_of(flat, sample, spatial);
            let u = upstream.data()[flat].widen();
            let dx = self.act.backward(xi.widen(), &p64[site * k..site * k + k], &mut pg);
            *di = E::narrow(u * dx);
            for (slot, &g) in acc[site * k..site * k + k].iter_mut().zip(&pg) {
                *slot += u * g;
            }
        }
        if let Some(p) = &mut self.params {
            for (slot, &a) in p.grad.iter_mut().zip(&acc) {
                *slot += E::narrow(a);
            }
        }
        Ok(d_input)
    }

    /// Clamp all site parameters back into the function's valid domain.
    pub fn project(&mut self) {
        let k = self.params_per_site;
        if let Some(p) = &mut self.params {
            let mut buf = vec![0.0f64; k];
            for site in 0..self.sites {
                for (b, v) in buf.iter_mut().zip(&p.value[site * k..site * k + k]) {
                    *b = v.widen();
                }
                self.act.project(&mut buf);
                for (v, &b) in p.value[site * k..site * k + k].iter_mut().zip(&buf) {
                    *v = E::narrow(b);
                }
            }
        }
    }

    pub fn collect_params<'a>(&'a mut self, out: &mut Vec<&'a mut Param<E>>) {
        if let Some(p) = &mut self.params {
            out.push(p);
        }
    }

    /// Per-parameter-name (min, mean, max) across sites; empty for fixed
    /// functions.
    pub fn param_stats(&self) -> Vec<(&'static str, f64, f64, f64)> {
        let p = match &self.params {
            Some(p) => p,
            None => return Vec::new(),
        };
        let k = self.params_per_site;
        let names = self.act.param_names();
        let mut out = Vec::with_capacity(k);
        for (j, &name) in names.iter().enumerate() {
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            let mut sum = 0.0;
            for site in 0..self.sites {
                let v = p.value[site * k + j].widen();
                min = min.min(v);
                max = max.max(v);
                sum += v;
            }
            out.push((name, min, sum / self.sites as f64, max));
        }
        out
    }

    #[cfg(test)]
    pub(crate) fn set_params_f64(&mut self, values: &[f64]) {
        let p = self.params.as_mut().expect("activation has no learnable params");
        assert_eq!(values.len(), p.value.len());
        p.value = values.iter().map(|&v| E::narrow(v)).collect();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activations::RecaParams;

    fn layer(kind: ActivationKind, granularity: Granularity, shape: &[usize]) -> ActivationLayer<f64> {
        ActivationLayer::new(kind, granularity, shape).unwrap()
    }

    #[test]
    fn site_counts_follow_granularity() {
        assert_eq!(site_count(Granularity::Global, &[8, 4, 4]), 1);
        assert_eq!(site_count(Granularity::PerChannel, &[8, 4, 4]), 8);
        assert_eq!(site_count(Granularity::PerNeuron, &[8, 4, 4]), 128);
        // Dense features count as channels.
        assert_eq!(site_count(Granularity::PerChannel, &[16]), 16);
    }

    #[test]
    fn reca_at_the_relu_point_is_relu_bitwise() {
        let mut reca = layer(
            ActivationKind::Reca { init: RecaParams::relu() },
            Granularity::PerChannel,
            &[3, 2, 2],
        );
        let mut relu = layer(ActivationKind::Relu, Granularity::PerChannel, &[3, 2, 2]);
        let x = Tensor::from_vec(
            &[2, 3, 2, 2],
            (0..24).map(|i| (i as f64 - 11.5) * 0.37).collect(),
        )
        .unwrap();
        let a = reca.forward(&x, Mode::Eval).unwrap();
        let b = relu.forward(&x, Mode::Eval).unwrap();
        assert_eq!(a.data(), b.data());
    }

    #[test]
    fn all_negative_input_gives_zero_output_and_zero_param_grads() {
        let mut l = layer(
            ActivationKind::reca_default(),
            Granularity::PerChannel,
            &[2, 2, 2],
        );
        let x = Tensor::from_vec(&[1, 2, 2, 2], vec![-1.0; 8]).unwrap();
        let y = l.forward(&x, Mode::Train).unwrap();
        assert!(y.data().iter().all(|&v| v == 0.0));
        l.backward(&Tensor::from_vec(&[1, 2, 2, 2], vec![1.0; 8]).unwrap()).unwrap();
        let p = l.params.as_ref().unwrap();
        assert!(p.grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn per_channel_sites_see_their_own_parameters() {
        let mut l = layer(
            ActivationKind::Prelu { init_slope: 0.0 },
            Granularity::PerChannel,
            &[2],
        );
        l.set_params_f64(&[0.1, 10.0]);
        let x = Tensor::from_vec(&[1, 2], vec![-1.0, -1.0]).unwrap();
        let y = l.forward(&x, Mode::Eval).unwrap();
        assert_eq!(y.data(), &[-0.1, -10.0]);
    }

    #[test]
    fn param_grads_accumulate_per_site() {
        let mut l = layer(ActivationKind::Prelu { init_slope: 0.05 }, Granularity::PerChannel, &[2]);
        // Two samples; slope gradient is x on the negative branch.
        let x = Tensor::from_vec(&[2, 2], vec![-2.0, 3.0, -4.0, -5.0]).unwrap();
        l.forward(&x, Mode::Train).unwrap();
        l.backward(&Tensor::from_vec(&[2, 2], vec![1.0; 4]).unwrap()).unwrap();
        let p = l.params.as_ref().unwrap();
        assert_eq!(p.grad, vec![-6.0, -5.0]);
    }

    #[test]
    fn param_stats_summarize_sites() {
        let mut l = layer(ActivationKind::reca_default(), Granularity::PerChannel, &[3]);
        l.set_params_f64(&[0.4, 0.0, 0.1, 0.5, 0.05, 0.1, 0.6, 0.1, 0.1]);
        let stats = l.param_stats();
        assert_eq!(stats.len(), 3);
        let (name, min, mean, max) = stats[0];
        assert_eq!(name, "alpha");
        assert_eq!((min, max), (0.4, 0.6));
        assert!((mean - 0.5).abs() < 1e-12);
    }

    #[test]
    fn projection_restores_the_domain_at_every_site() {
        let mut l = layer(ActivationKind::reca_default(), Granularity::PerChannel, &[2]);
        l.set_params_f64(&[-1.0, -2.0, 3.0, 0.7, 0.1, -0.5]);
        l.project();
        let p = l.params.as_ref().unwrap();
        assert_eq!(p.value, vec![crate::activations::ALPHA_MIN, 0.0, 3.0, 0.7, 0.1, 0.0]);
    }
}
