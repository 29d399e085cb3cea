//! Tiny dense kernels the layers are built from. Contiguous-slice loops in
//! a fixed order: deterministic results, and simple enough for the
//! compiler to vectorize.

use crate::element::Element;

/// y += a·x.
#[inline]
pub fn axpy<E: Element>(a: E, x: &[E], y: &mut [E]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * *xi;
    }
}

/// Σ aᵢ·bᵢ.
#[inline]
pub fn dot<E: Element>(a: &[E], b: &[E]) -> E {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = E::zero();
    for (ai, bi) in a.iter().zip(b) {
        acc += *ai * *bi;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axpy_accumulates() {
        let mut y = vec![1.0f32, 2.0, 3.0];
        axpy(2.0, &[10.0, 20.0, 30.0], &mut y);
        assert_eq!(y, vec![21.0, 42.0, 63.0]);
    }

    #[test]
    fn dot_of_orthogonal_vectors_is_zero() {
        assert_eq!(dot(&[1.0f64, 0.0], &[0.0, 5.0]), 0.0);
        assert_eq!(dot(&[1.0f64, 2.0, 3.0], &[4.0, 5.0, 6.0]), 32.0);
    }
}
