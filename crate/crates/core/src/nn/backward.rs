//! Exact reverse-mode differentiation of the forward pass plus the
//! cross-entropy loss. The softmax and the loss fuse into the usual
//! `probs - onehot(target)` logit gradient, then errors run back through
//! the dense layer, the dropout mask, and both LSTM directions.

use crate::encoder::TargetVector;

use super::{ForwardCache, Gradients, LstmDirectionParams, ModelParams, Real, StepCache};

fn direction_backward<F: Real>(
    dir: &LstmDirectionParams<F>,
    steps: &[StepCache<F>],
    dh_final: &[F],
    grad: &mut LstmDirectionParams<F>,
) {
    let hidden = dir.hidden();
    if steps.is_empty() {
        return;
    }
    let zeros = vec![F::zero(); hidden];
    let mut dh_carry = vec![F::zero(); hidden];
    let mut dc_carry = vec![F::zero(); hidden];
    let mut dpre = vec![F::zero(); 4 * hidden];

    for k in (0..steps.len()).rev() {
        let step = &steps[k];
        let (h_prev, c_prev) = if k > 0 {
            (&steps[k - 1].h, &steps[k - 1].c)
        } else {
            (&zeros, &zeros)
        };

        for j in 0..hidden {
            let mut dh = dh_carry[j];
            if k == steps.len() - 1 {
                dh = dh + dh_final[j];
            }
            let i = step.gates[j];
            let f = step.gates[hidden + j];
            let g = step.gates[2 * hidden + j];
            let o = step.gates[3 * hidden + j];
            let tc = step.tanh_c[j];

            let dc = dh * o * (F::one() - tc * tc) + dc_carry[j];
            dpre[j] = dc * g * i * (F::one() - i);
            dpre[hidden + j] = dc * c_prev[j] * f * (F::one() - f);
            dpre[2 * hidden + j] = dc * i * (F::one() - g * g);
            dpre[3 * hidden + j] = dh * tc * o * (F::one() - o);
            dc_carry[j] = dc * f;
        }

        for (r, &dp) in dpre.iter().enumerate() {
            grad.b[r] = grad.b[r] + dp;
            if let Some(ch) = step.channel {
                *grad.w.at_mut(r, ch) = grad.w.at(r, ch) + dp;
            }
            let grow = grad.u.row_mut(r);
            for (gu, hp) in grow.iter_mut().zip(h_prev) {
                *gu = *gu + dp * *hp;
            }
        }
        // gradient into h_{t-1} flows only through the recurrent matrix
        for j in 0..hidden {
            let mut acc = F::zero();
            for (r, &dp) in dpre.iter().enumerate() {
                acc = acc + dir.u.at(r, j) * dp;
            }
            dh_carry[j] = acc;
        }
    }
}

impl<F: Real> ModelParams<F> {
    /// Gradient of the cross-entropy loss w.r.t. every parameter, given the
    /// cache of a training-mode forward on the same input.
    pub fn backward(&self, cache: &ForwardCache<F>, target: &TargetVector) -> Gradients<F> {
        let hidden = self.hidden;
        let mut grads = Gradients::zeros_like(self);

        let mut dlogits = cache.probs.clone();
        dlogits[target.index()] = dlogits[target.index()] - F::one();

        let dropped: Vec<F> = cache
            .concat
            .iter()
            .zip(&cache.mask_scale)
            .map(|(z, m)| *z * *m)
            .collect();
        let mut dz = vec![F::zero(); 2 * hidden];
        for (pos, &dl) in dlogits.iter().enumerate() {
            grads.dense_b[pos] = grads.dense_b[pos] + dl;
            let grow = grads.dense_w.row_mut(pos);
            let wrow = self.dense_w.row(pos);
            for j in 0..2 * hidden {
                grow[j] = grow[j] + dl * dropped[j];
                dz[j] = dz[j] + wrow[j] * dl;
            }
        }
        for (d, m) in dz.iter_mut().zip(&cache.mask_scale) {
            *d = *d * *m;
        }

        direction_backward(&self.fwd, &cache.fwd_steps, &dz[..hidden], &mut grads.fwd);
        direction_backward(&self.bwd, &cache.bwd_steps, &dz[hidden..], &mut grads.bwd);
        grads
    }
}
