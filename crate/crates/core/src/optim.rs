//! RMSProp without momentum.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct RmsProp {
    pub learning_rate: f64,
    pub decay: f64,
    pub epsilon: f64,
    cache: Vec<f64>,
}

impl RmsProp {
    pub fn new(len: usize, learning_rate: f64, decay: f64, epsilon: f64) -> Self {
        Self { learning_rate, decay, epsilon, cache: vec![0.0; len] }
    }

    /// `cache = decay * cache + (1 - decay) * g^2`,
    /// `param -= lr * g / (sqrt(cache) + epsilon)`.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        debug_assert_eq!(params.len(), grads.len());
        debug_assert_eq!(params.len(), self.cache.len());
        for ((p, g), c) in params.iter_mut().zip(grads).zip(self.cache.iter_mut()) {
            *c = self.decay * *c + (1.0 - self.decay) * g * g;
            *p -= self.learning_rate * g / (libm::sqrt(*c) + self.epsilon);
        }
    }

    pub fn cache(&self) -> &[f64] {
        &self.cache
    }
}
