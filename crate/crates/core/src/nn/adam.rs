//! Adaptive moment estimation with bias correction.

use serde::{Deserialize, Serialize};

use super::{Gradients, ModelParams, Real, BLOCK_NAMES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment accumulators plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState<F> {
    cfg: AdamConfig,
    m: Gradients<F>,
    v: Gradients<F>,
    t: u64,
}

impl<F: Real> AdamState<F> {
    pub fn new(cfg: AdamConfig, params: &ModelParams<F>) -> Self {
        AdamState {
            cfg,
            m: Gradients::zeros_like(params),
            v: Gradients::zeros_like(params),
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One update: `m <- b1*m + (1-b1)*g`, `v <- b2*v + (1-b2)*g^2`,
    /// bias-correct both, then `theta -= lr * m_hat / (sqrt(v_hat) + eps)`.
    pub fn step(&mut self, params: &mut ModelParams<F>, grads: &Gradients<F>) {
        self.t += 1;
        let t = self.t.min(i32::MAX as u64) as i32;
        let b1 = F::of_f64(self.cfg.beta1);
        let b2 = F::of_f64(self.cfg.beta2);
        let one = F::one();
        // bias corrections in f64 to keep long runs accurate
        let corr1 = F::of_f64(1.0 - self.cfg.beta1.powi(t));
        let corr2 = F::of_f64(1.0 - self.cfg.beta2.powi(t));
        let lr = F::of_f64(self.cfg.learning_rate);
        let eps = F::of_f64(self.cfg.epsilon);

        for i in 0..BLOCK_NAMES.len() {
            let g = grads.block(i);
            let m = self.m.block_mut(i);
            for (mv, &gv) in m.iter_mut().zip(g) {
                *mv = b1 * *mv + (one - b1) * gv;
            }
            let v = self.v.block_mut(i);
            for (vv, &gv) in v.iter_mut().zip(g) {
                *vv = b2 * *vv + (one - b2) * gv * gv;
            }
            let m = self.m.block(i);
            let v = self.v.block(i);
            let p = params.block_mut(i);
            for ((pv, &mv), &vv) in p.iter_mut().zip(m).zip(v) {
                let m_hat = mv / corr1;
                let v_hat = vv / corr2;
                *pv = *pv - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::EncodingConfig;

    fn tiny_params() -> ModelParams<f64> {
        ModelParams::init(2, 0.0, EncodingConfig::with_max_len(6), 1)
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut params = tiny_params();
        let before = params.clone();
        let grads = Gradients::zeros_like(&params);
        let mut adam = AdamState::new(AdamConfig::default(), &params);
        adam.step(&mut params, &grads);
        assert_eq!(params, before);
    }

    #[test]
    fn first_step_is_learning_rate_sized() {
        // scalar simulation: theta = 0, g = 1; bias corrections cancel at t=1
        let mut params = tiny_params();
        params.dense_b[0] = 0.0;
        let mut grads = Gradients::zeros_like(&params);
        grads.dense_b[0] = 1.0;
        let mut adam = AdamState::new(AdamConfig::default(), &params);
        adam.step(&mut params, &grads);
        let expected = -0.001 * 1.0 / (1.0 + 1e-8);
        assert!((params.dense_b[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn repeated_identical_gradients_approach_learning_rate_steps() {
        // closed form: with constant g, m_hat -> g and v_hat -> g^2, so the
        // per-step move tends to lr * g / (|g| + eps) = lr (for g = 2)
        let mut params = tiny_params();
        params.dense_b[0] = 0.0;
        let mut grads = Gradients::zeros_like(&params);
        grads.dense_b[0] = 2.0;
        let mut adam = AdamState::new(AdamConfig::default(), &params);
        let mut prev = params.dense_b[0];
        let mut last_step = 0.0;
        for _ in 0..500 {
            adam.step(&mut params, &grads);
            last_step = prev - params.dense_b[0];
            prev = params.dense_b[0];
        }
        assert!((last_step - 0.001).abs() < 1e-6, "step {last_step}");
    }

    #[test]
    fn moments_track_decayed_averages() {
        let mut params = tiny_params();
        let mut grads = Gradients::zeros_like(&params);
        grads.fwd.b[0] = 1.0;
        let mut adam = AdamState::new(AdamConfig::default(), &params);
        adam.step(&mut params, &grads);
        adam.step(&mut params, &grads);
        // m after two steps of g=1: (1-b1)(1 + b1)
        let expected_m = (1.0 - 0.9) * (1.0 + 0.9);
        assert!((adam.m.fwd.b[0] - expected_m).abs() < 1e-15);
        assert_eq!(adam.step_count(), 2);
    }
}
