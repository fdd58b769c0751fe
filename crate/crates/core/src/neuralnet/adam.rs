use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::network::Sequential;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { lr: 2e-4, beta1: 0.5, beta2: 0.999, eps: 1e-8 }
    }
}

/// One bias-corrected Adam update of a single tensor. `t` is the step number
/// after incrementing (1 on the first step).
pub fn adam_step(params: &mut [f64], grads: &[f64], m: &mut [f64], v: &mut [f64], t: u64, cfg: &AdamConfig) {
    assert!(t >= 1);
    assert!(params.len() == grads.len() && m.len() == params.len() && v.len() == params.len());
    let bc1 = 1.0 - libm::pow(cfg.beta1, t as f64);
    let bc2 = 1.0 - libm::pow(cfg.beta2, t as f64);
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= cfg.lr * m_hat / (libm::sqrt(v_hat) + cfg.eps);
    }
}

/// Adam optimizer state for one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub config: AdamConfig,
    pub t: u64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(config: AdamConfig) -> Self {
        Adam { config, t: 0, first: Vec::new(), second: Vec::new() }
    }

    /// Apply one update to every parameter of `net` using its stored gradients.
    pub fn step(&mut self, net: &mut Sequential) {
        self.t += 1;
        let t = self.t;
        let cfg = self.config;
        let (first, second) = (&mut self.first, &mut self.second);
        let mut i = 0;
        net.visit_params(|p, g| {
            if first.len() <= i {
                first.push(vec![0.0; p.len()]);
                second.push(vec![0.0; p.len()]);
            }
            adam_step(p, g, &mut first[i], &mut second[i], t, &cfg);
            i += 1;
        });
    }
}
