use serde::{Deserialize, Serialize};

use crate::nn::params::ParamStore;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment estimates for every parameter of a store.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub config: AdamConfig,
    pub m: Vec<Tensor>,
    pub v: Vec<Tensor>,
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &ParamStore, config: AdamConfig) -> Self {
        let zeros: Vec<Tensor> = params.iter().map(|p| Tensor::zeros(p.value.shape())).collect();
        AdamState {
            config,
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }
}

/// One bias-corrected Adam update using the gradients held in `params`.
pub fn adam_step(params: &mut ParamStore, state: &mut AdamState) {
    assert_eq!(params.len(), state.m.len(), "optimizer state does not match parameters");
    state.t += 1;
    let AdamConfig {
        lr,
        beta1,
        beta2,
        epsilon,
    } = state.config;
    let t = state.t as i32;
    let bias1 = 1.0 - beta1.powi(t);
    let bias2 = 1.0 - beta2.powi(t);
    for ((p, m), v) in params.iter_mut().zip(&mut state.m).zip(&mut state.v) {
        let values = p.value.data_mut();
        let m = m.data_mut();
        let v = v.data_mut();
        for (i, &g) in p.grad.data().iter().enumerate() {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g;
            v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
            let m_hat = m[i] / bias1;
            let v_hat = v[i] / bias2;
            values[i] -= lr * m_hat / (v_hat.sqrt() + epsilon);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_store(value: f64, grad: f64) -> ParamStore {
        let mut s = ParamStore::new();
        s.insert("w", Tensor::vector(vec![value])).unwrap();
        s.iter_mut().next().unwrap().grad = Tensor::vector(vec![grad]);
        s
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut s = scalar_store(0.7, 0.0);
        let mut st = AdamState::new(&s, AdamConfig::default());
        for _ in 0..5 {
            adam_step(&mut s, &mut st);
        }
        assert_eq!(s.get("w").unwrap().data(), &[0.7]);
        assert_eq!(st.t, 5);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut s = scalar_store(1.0, 1.0);
        let mut st = AdamState::new(&s, AdamConfig::default());
        adam_step(&mut s, &mut st);
        // m̂ = v̂ = 1, so the step is lr / (1 + ε).
        let expected = 1.0 - 0.001 / (1.0 + 1e-8);
        assert!((s.get("w").unwrap().data()[0] - expected).abs() < 1e-15);
        assert_eq!(st.t, 1);
    }

    #[test]
    fn opposite_gradients_give_opposite_updates() {
        let mut a = scalar_store(0.0, 0.3);
        let mut b = scalar_store(0.0, -0.3);
        let mut sa = AdamState::new(&a, AdamConfig::default());
        let mut sb = AdamState::new(&b, AdamConfig::default());
        for _ in 0..3 {
            adam_step(&mut a, &mut sa);
            adam_step(&mut b, &mut sb);
        }
        assert_eq!(a.get("w").unwrap().data()[0], -b.get("w").unwrap().data()[0]);
    }
}
