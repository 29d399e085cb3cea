//! Parameter initialization. One scheme, used everywhere: Kaiming-uniform
//! weights U(-b, b) with b = sqrt(6/fan_in), zero biases. Values are drawn
//! in storage order so a seed pins the exact initial state.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::element::Element;

pub fn kaiming_uniform<E: Element>(count: usize, fan_in: usize, rng: &mut ChaCha8Rng) -> Vec<E> {
    let bound = (6.0 / fan_in as f64).sqrt();
    (0..count).map(|_| E::narrow(rng.gen_range(-bound..bound))).collect()
}
