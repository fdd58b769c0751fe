use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::layers::{Layer, Pass};
use super::matrix::Matrix;
use crate::error::Result;

/// Layers applied in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sequential {
    pub layers: Vec<Layer>,
}

impl Sequential {
    pub fn new(layers: Vec<Layer>) -> Self {
        Sequential { layers }
    }

    pub fn forward(&mut self, x: &Matrix, pass: &mut Pass<'_>) -> Result<Matrix> {
        let mut h = x.clone();
        for layer in &mut self.layers {
            h = layer.forward(&h, pass)?;
        }
        Ok(h)
    }

    /// Pure inference pass (running statistics, no dropout, no caching).
    pub fn infer(&self, x: &Matrix) -> Result<Matrix> {
        let mut h = x.clone();
        for layer in &self.layers {
            h = layer.infer(&h)?;
        }
        Ok(h)
    }

    /// Backpropagate `grad_out` through every layer, storing parameter
    /// gradients. The first layer skips its input gradient unless asked.
    pub fn backward(&mut self, grad_out: &Matrix, need_input_grad: bool) -> Result<Matrix> {
        let mut g = grad_out.clone();
        for (i, layer) in self.layers.iter_mut().enumerate().rev() {
            g = layer.backward(&g, need_input_grad || i > 0)?;
        }
        Ok(g)
    }

    pub fn visit_params<F: FnMut(&mut [f64], &[f64])>(&mut self, mut f: F) {
        for layer in &mut self.layers {
            layer.visit_params(&mut f);
        }
    }

    pub fn param_count(&mut self) -> usize {
        let mut n = 0;
        self.visit_params(|p, _| n += p.len());
        n
    }

    /// Re-create gradient buffers (they are not serialized).
    pub fn reset_grads(&mut self) {
        self.layers.iter_mut().for_each(Layer::reset_grads);
    }

    pub fn is_finite(&mut self) -> bool {
        let mut ok = true;
        self.visit_params(|p, _| ok &= p.iter().all(|v| v.is_finite()));
        ok
    }
}
