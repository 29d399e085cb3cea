//! 2-D convolution (cross-correlation, no kernel flip) via im2col: each
//! sample's receptive fields are unrolled into a [C·k², H'·W'] matrix once,
//! so both passes become dense matrix products over contiguous rows.

use rand_chacha::ChaCha8Rng;

use crate::element::Element;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

use super::init::kaiming_uniform;
use super::linalg::{axpy, dot};
use super::{Mode, Param, ParamClass};

#[derive(Debug)]
pub struct Conv2d<E: Element> {
    in_channels: usize,
    out_channels: usize,
    kernel: usize,
    stride: usize,
    pad: usize,
    /// [out_channels][in_channels·kernel²] row-major.
    kernels: Param<E>,
    bias: Option<Param<E>>,
    cache: Option<Cache<E>>,
}

#[derive(Debug)]
struct Cache<E: Element> {
    /// Unrolled input for the whole batch: N× [ck][patch].
    cols: Vec<E>,
    in_shape: Vec<usize>,
    out_h: usize,
    out_w: usize,
}

impl<E: Element> Conv2d<E> {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        pad: usize,
        bias: bool,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let fan_in = in_channels * kernel * kernel;
        let kernels =
            Param::new(kaiming_uniform(out_channels * fan_in, fan_in, rng), ParamClass::Weight);
        let bias = bias.then(|| Param::new(vec![E::zero(); out_channels], ParamClass::Bias));
        Conv2d { in_channels, out_channels, kernel, stride, pad, kernels, bias, cache: None }
    }

    fn out_extent(&self, extent: usize) -> Result<usize> {
        let padded = extent + 2 * self.pad;
        if padded < self.kernel || !(padded - self.kernel).is_multiple_of(self.stride) {
            return Err(Error::Shape(format!(
                "conv2d k={} s={} p={} does not tile extent {extent}",
                self.kernel, self.stride, self.pad
            )));
        }
        Ok((padded - self.kernel) / self.stride + 1)
    }

    pub fn forward(&mut self, x: &Tensor<E>, mode: Mode) -> Result<Tensor<E>> {
        let (n, c, h, w) = match x.shape() {
            &[n, c, h, w] => (n, c, h, w),
            other => {
                return Err(Error::Shape(format!("conv2d wants [N, C, H, W], got {other:?}")))
            }
        };
        if c != self.in_channels {
            return Err(Error::Shape(format!(
                "conv2d wants {} input channels, got {c}",
                self.in_channels
            )));
        }
        let oh = self.out_extent(h)?;
        let ow = self.out_extent(w)?;
        let ck = self.in_channels * self.kernel * self.kernel;
        let patch = oh * ow;
        let mut cols = vec![E::zero(); n * ck * patch];
        let mut y = Tensor::zeros(&[n, self.out_channels, oh, ow]);
        for s in 0..n {
            let col = &mut cols[s * ck * patch..(s + 1) * ck * patch];
            self.im2col(&x.data()[s * c * h * w..(s + 1) * c * h * w], h, w, oh, ow, col);
            let yrow = &mut y.data_mut()[s * self.out_channels * patch..];
            for o in 0..self.out_channels {
                let out = &mut yrow[o * patch..(o + 1) * patch];
                let krow = &self.kernels.value[o * ck..(o + 1) * ck];
                for (q, &kq) in krow.iter().enumerate() {
                    axpy(kq, &col[q * patch..(q + 1) * patch], out);
                }
                if let Some(b) = &self.bias {
                    let bo = b.value[o];
                    for v in out.iter_mut() {
                        *v += bo;
                    }
                }
            }
        }
        self.cache = match mode {
            Mode::Train => {
                Some(Cache { cols, in_shape: x.shape().to_vec(), out_h: oh, out_w: ow })
            }
            Mode::Eval => None,
        };
        Ok(y)
    }

    /// Unroll one sample into col[q][p] where q = (c·k + ky)·k + kx and
    /// p = oy·W' + ox. `col` arrives zeroed; padding cells stay zero.
    fn im2col(&self, xs: &[E], h: usize, w: usize, oh: usize, ow: usize, col: &mut [E]) {
        let k = self.kernel;
        let stride = self.stride;
        let patch = oh * ow;
        for c in 0..self.in_channels {
            let plane = &xs[c * h * w..(c + 1) * h * w];
            for ky in 0..k {
                for kx in 0..k {
                    let row = &mut col[((c * k + ky) * k + kx) * patch..][..patch];
                    for oy in 0..oh {
                        let iy = (oy * stride + ky) as isize - self.pad as isize;
                        if iy < 0 || iy as usize >= h {
                            continue;
                        }
                        let src_base = iy as usize * w;
                        let dst = &mut row[oy * ow..(oy + 1) * ow];
                        if stride == 1 {
                            // ix = ox + kx - pad must lie in [0, w).
                            let lo = self.pad.saturating_sub(kx);
                            let hi = (w + self.pad - kx).min(ow);
                            if lo < hi {
                                let src_lo = lo + kx - self.pad;
                                dst[lo..hi]
                                    .copy_from_slice(&plane[src_base + src_lo..src_base + src_lo + (hi - lo)]);
                            }
                        } else {
                            for (ox, slot) in dst.iter_mut().enumerate() {
                                let ix = (ox * stride + kx) as isize - self.pad as isize;
                                if ix >= 0 && (ix as usize) < w {
                                    *slot = plane[src_base + ix as usize];
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Scatter-add one sample's unrolled gradient back onto the input grid
    /// (exact transpose of [`Self::im2col`]).
    fn col2im(&self, col: &[E], h: usize, w: usize, oh: usize, ow: usize, dxs: &mut [E]) {
        let k = self.kernel;
        let stride = self.stride;
        let patch = oh * ow;
        for c in 0..self.in_channels {
            let plane = &mut dxs[c * h * w..(c + 1) * h * w];
            for ky in 0..k {
                for kx in 0..k {
                    let row = &col[((c * k + ky) * k + kx) * patch..][..patch];
                    for oy in 0..oh {
                        let iy = (oy * stride + ky) as isize - self.pad as isize;
                        if iy < 0 || iy as usize >= h {
                            continue;
                        }
                        let dst_base = iy as usize * w;
                        let src = &row[oy * ow..(oy + 1) * ow];
                        for (ox, &v) in src.iter().enumerate() {
                            let ix = (ox * stride + kx) as isize - self.pad as isize;
                            if ix >= 0 && (ix as usize) < w {
                                plane[dst_base + ix as usize] += v;
                            }
                        }
                    }
                }
            }
        }
    }

    pub fn backward(&mut self, upstream: &Tensor<E>) -> Result<Tensor<E>> {
        let cache = self
            .cache
            .as_ref()
            .ok_or_else(|| Error::Domain("conv2d backward without a train-mode forward".into()))?;
        let (n, h, w) = (cache.in_shape[0], cache.in_shape[2], cache.in_shape[3]);
        let (oh, ow) = (cache.out_h, cache.out_w);
        if upstream.shape() != [n, self.out_channels, oh, ow] {
            return Err(Error::Shape(format!(
                "conv2d backward wants [{n}, {}, {oh}, {ow}], got {:?}",
                self.out_channels,
                upstream.shape()
            )));
        }
        let ck = self.in_channels * self.kernel * self.kernel;
        let patch = oh * ow;
        let chw = self.in_channels * h * w;
        let mut d_input = Tensor::zeros(&cache.in_shape);
        let mut d_col = vec![E::zero(); ck * patch];
        for s in 0..n {
            let col = &cache.cols[s * ck * patch..(s + 1) * ck * patch];
            let urow = &upstream.data()[s * self.out_channels * patch..];
            for o in 0..self.out_channels {
                let u = &urow[o * patch..(o + 1) * patch];
                let dk = &mut self.kernels.grad[o * ck..(o + 1) * ck];
                for (q, slot) in dk.iter_mut().enumerate() {
                    *slot += dot(u, &col[q * patch..(q + 1) * patch]);
                }
                if let Some(b) = &mut self.bias {
                    let mut acc = E::zero();
                    for &v in u {
                        acc += v;
                    }
                    b.grad[o] += acc;
                }
            }
            d_col.fill(E::zero());
            for o in 0..self.out_channels {
                let u = &urow[o * patch..(o + 1) * patch];
                let krow = &self.kernels.value[o * ck..(o + 1) * ck];
                for (q, &kq) in krow.iter().enumerate() {
                    axpy(kq, u, &mut d_col[q * patch..(q + 1) * patch]);
                }
            }
            self.col2im(&d_col, h, w, oh, ow, &mut d_input.data_mut()[s * chw..(s + 1) * chw]);
        }
        Ok(d_input)
    }

    pub fn collect_params<'a>(&'a mut self, out: &mut Vec<&'a mut Param<E>>) {
        out.push(&mut self.kernels);
        if let Some(b) = &mut self.bias {
            out.push(b);
        }
    }

    #[cfg(test)]
    pub(crate) fn set_kernels(&mut self, k: Vec<E>, b: Option<Vec<E>>) {
        assert_eq!(k.len(), self.kernels.value.len());
        self.kernels.value = k;
        if let (Some(bias), Some(bv)) = (&mut self.bias, b) {
            bias.value = bv;
        }
    }
}
