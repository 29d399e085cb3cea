//! Spatial pooling: strided max pooling and global average pooling.

use crate::element::Element;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

use super::Mode;

#[derive(Debug)]
pub struct MaxPool<E: Element> {
    kernel: usize,
    stride: usize,
    cache: Option<Cache>,
    _marker: std::marker::PhantomData<E>,
}

#[derive(Debug)]
struct Cache {
    /// Flat input index of each output's maximum (first hit wins on ties,
    /// which keeps gradient routing deterministic).
    argmax: Vec<usize>,
    in_shape: Vec<usize>,
    out_shape: Vec<usize>,
}

impl<E: Element> MaxPool<E> {
    pub fn new(kernel: usize, stride: usize) -> Self {
        MaxPool { kernel, stride, cache: None, _marker: std::marker::PhantomData }
    }

    pub fn forward(&mut self, x: &Tensor<E>, mode: Mode) -> Result<Tensor<E>> {
        let (n, c, h, w) = match x.shape() {
            &[n, c, h, w] => (n, c, h, w),
            other => {
                return Err(Error::Shape(format!("maxpool wants [N, C, H, W], got {other:?}")))
            }
        };
        if h < self.kernel || w < self.kernel || !(h - self.kernel).is_multiple_of(self.stride)
            || !(w - self.kernel).is_multiple_of(self.stride)
        {
            return Err(Error::Shape(format!(
                "maxpool k={} s={} does not tile {h}x{w}",
                self.kernel, self.stride
            )));
        }
        let oh = (h - self.kernel) / self.stride + 1;
        let ow = (w - self.kernel) / self.stride + 1;
        let mut y = Tensor::zeros(&[n, c, oh, ow]);
        let mut argmax = vec![0usize; n * c * oh * ow];
        let xd = x.data();
        for plane_idx in 0..n * c {
            let base = plane_idx * h * w;
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut best_idx = base + oy * self.stride * w + ox * self.stride;
                    let mut best = xd[best_idx];
                    for ky in 0..self.kernel {
                        let row = base + (oy * self.stride + ky) * w + ox * self.stride;
                        for kx in 0..self.kernel {
                            let v = xd[row + kx];
                            if v > best {
                                best = v;
                                best_idx = row + kx;
                            }
                        }
                    }
                    let out_idx = plane_idx * oh * ow + oy * ow + ox;
                    y.data_mut()[out_idx] = best;
                    argmax[out_idx] = best_idx;
                }
            }
        }
        self.cache = match mode {
            Mode::Train => Some(Cache {
                argmax,
                in_shape: x.shape().to_vec(),
                out_shape: y.shape().to_vec(),
            }),
            Mode::Eval => None,
        };
        Ok(y)
    }

    pub fn backward(&mut self, upstream: &Tensor<E>) -> Result<Tensor<E>> {
        let cache = self
            .cache
            .as_ref()
            .ok_or_else(|| Error::Domain("maxpool backward without a train-mode forward".into()))?;
        if upstream.shape() != cache.out_shape {
            return Err(Error::Shape(format!(
                "maxpool backward wants {:?}, got {:?}",
                cache.out_shape,
                upstream.shape()
            )));
        }
        let mut d_input = Tensor::zeros(&cache.in_shape);
        for (out_idx, &src) in cache.argmax.iter().enumerate() {
            d_input.data_mut()[src] += upstream.data()[out_idx];
        }
        Ok(d_input)
    }
}

/// [N, C, H, W] → [N, C] by averaging each plane.
#[derive(Debug, Default)]
pub struct GlobalAvgPool {
    in_shape: Option<Vec<usize>>,
}

impl GlobalAvgPool {
    pub fn forward<E: Element>(&mut self, x: &Tensor<E>, mode: Mode) -> Result<Tensor<E>> {
        let (n, c, h, w) = match x.shape() {
            &[n, c, h, w] => (n, c, h, w),
            other => {
                return Err(Error::Shape(format!(
                    "global average pool wants [N, C, H, W], got {other:?}"
                )))
            }
        };
        let inv = E::narrow(1.0 / (h * w) as f64);
        let mut y = Tensor::zeros(&[n, c]);
        for plane_idx in 0..n * c {
            let mut acc = E::zero();
            for &v in &x.data()[plane_idx * h * w..(plane_idx + 1) * h * w] {
                acc += v;
            }
            y.data_mut()[plane_idx] = acc * inv;
        }
        self.in_shape = match mode {
            Mode::Train => Some(x.shape().to_vec()),
            Mode::Eval => None,
        };
        Ok(y)
    }

    pub fn backward<E: Element>(&mut self, upstream: &Tensor<E>) -> Result<Tensor<E>> {
        let in_shape = self.in_shape.as_ref().ok_or_else(|| {
            Error::Domain("global average pool backward without a train-mode forward".into())
        })?;
        let (n, c, h, w) = (in_shape[0], in_shape[1], in_shape[2], in_shape[3]);
        if upstream.shape() != [n, c] {
            return Err(Error::Shape(format!(
                "global average pool backward wants [{n}, {c}], got {:?}",
                upstream.shape()
            )));
        }
        let inv = E::narrow(1.0 / (h * w) as f64);
        let mut d_input = Tensor::zeros(in_shape);
        for plane_idx in 0..n * c {
            let g = upstream.data()[plane_idx] * inv;
            for v in &mut d_input.data_mut()[plane_idx * h * w..(plane_idx + 1) * h * w] {
                *v = g;
            }
        }
        Ok(d_input)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maxpool_picks_window_maxima() {
        let mut pool = MaxPool::<f64>::new(2, 2);
        let x = Tensor::from_vec(
            &[1, 1, 4, 4],
            vec![
                1.0, 2.0, 5.0, 6.0, //
                3.0, 4.0, 7.0, 8.0, //
                -1.0, -2.0, 0.0, 0.0, //
                -3.0, -4.0, 0.0, 9.0,
            ],
        )
        .unwrap();
        let y = pool.forward(&x, Mode::Train).unwrap();
        assert_eq!(y.shape(), &[1, 1, 2, 2]);
        assert_eq!(y.data(), &[4.0, 8.0, -1.0, 9.0]);
    }

    #[test]
    fn maxpool_routes_gradient_to_the_argmax_first_on_ties() {
        let mut pool = MaxPool::<f64>::new(2, 2);
        let x = Tensor::from_vec(&[1, 1, 2, 2], vec![5.0, 5.0, 5.0, 5.0]).unwrap();
        pool.forward(&x, Mode::Train).unwrap();
        let d = pool.backward(&Tensor::from_vec(&[1, 1, 1, 1], vec![1.0]).unwrap()).unwrap();
        assert_eq!(d.data(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn maxpool_rejects_non_tiling_shapes() {
        let mut pool = MaxPool::<f64>::new(2, 2);
        let x = Tensor::<f64>::zeros(&[1, 1, 5, 4]);
        assert!(pool.forward(&x, Mode::Eval).is_err());
    }

    #[test]
    fn global_avg_pool_averages_each_plane() {
        let mut gap = GlobalAvgPool::default();
        let x = Tensor::from_vec(&[1, 2, 2, 2], vec![1.0, 2.0, 3.0, 4.0, 10.0, 10.0, 10.0, 10.0])
            .unwrap();
        let y = gap.forward(&x, Mode::Train).unwrap();
        assert_eq!(y.shape(), &[1, 2]);
        assert_eq!(y.data(), &[2.5, 10.0]);
        let d = gap.backward(&Tensor::from_vec(&[1, 2], vec![4.0, 8.0]).unwrap()).unwrap();
        assert_eq!(d.data(), &[1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0]);
    }
}
