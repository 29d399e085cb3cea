//! Softmax cross-entropy over logits, fused with its gradient.
//!
//! Per-row log-sum-exp subtracts the row maximum, so arbitrarily large
//! logits cannot overflow; all row reductions run in f64.

use crate::element::Element;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug)]
pub struct LossOutput<E: Element> {
    /// Mean cross-entropy over the batch.
    pub loss: f64,
    /// d loss / d logits, shape [N, K]: (softmax - onehot)/N.
    pub grad: Tensor<E>,
}

pub fn softmax_cross_entropy<E: Element>(
    logits: &Tensor<E>,
    labels: &[u32],
) -> Result<LossOutput<E>> {
    let (n, k) = match logits.shape() {
        &[n, k] => (n, k),
        other => return Err(Error::Shape(format!("loss wants [N, K] logits, got {other:?}"))),
    };
    if labels.len() != n {
        return Err(Error::Shape(format!("{n} logit rows but {} labels", labels.len())));
    }
    if n == 0 {
        return Err(Error::Shape("empty batch".into()));
    }
    logits.ensure_finite("logits")?;
    let mut grad = Tensor::zeros(&[n, k]);
    let inv_n = 1.0 / n as f64;
    let mut total = 0.0;
    for (row, &label) in labels.iter().enumerate() {
        if label as usize >= k {
            return Err(Error::Domain(format!(
                "label {label} out of range for {k} classes (row {row})"
            )));
        }
        let z = &logits.data()[row * k..(row + 1) * k];
        let mut max = f64::NEG_INFINITY;
        for &v in z {
            max = max.max(v.widen());
        }
        let mut sum = 0.0;
        for &v in z {
            sum += (v.widen() - max).exp();
        }
        let lse = max + sum.ln();
        total += lse - z[label as usize].widen();
        let g = &mut grad.data_mut()[row * k..(row + 1) * k];
        for (j, slot) in g.iter_mut().enumerate() {
            let p = (z[j].widen() - lse).exp();
            let onehot = if j == label as usize { 1.0 } else { 0.0 };
            *slot = E::narrow((p - onehot) * inv_n);
        }
    }
    Ok(LossOutput { loss: total * inv_n, grad })
}
