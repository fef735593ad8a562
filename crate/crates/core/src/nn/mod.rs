//! The classifier: a bidirectional LSTM over character positions feeding a
//! dense softmax layer over the `max_len` output positions, written from
//! scratch with exact backpropagation.
//!
//! Both directions run the standard LSTM recurrence with gate order
//! `[input, forget, cell-candidate, output]`; the two final hidden states
//! are concatenated, passed through inverted dropout (training only) and a
//! dense layer, and softmax produces a distribution over stress positions.
//!
//! Everything is generic over [`Real`] so training runs in `f32` while
//! gradient checking runs the identical code path in `f64`.

mod adam;
mod backward;
mod gradcheck;

pub use adam::{AdamConfig, AdamState};
pub use gradcheck::{gradient_check, gradient_check_tampered, BlockReport, GradCheckReport};

use std::fmt;

use num_traits::{Float, FromPrimitive};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::encoder::{EncodeError, EncodingConfig, InputMatrix, TargetVector};

/// Floating-point scalar the network can run in.
pub trait Real: Float + FromPrimitive + fmt::Debug + Default + Send + Sync + 'static {
    fn of_f64(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 converts")
    }
    fn into_f64(self) -> f64;
}

impl Real for f32 {
    fn into_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn into_f64(self) -> f64 {
        self
    }
}

#[derive(Debug, Error)]
pub enum NnError {
    #[error("non-finite activation at timestep {step} in {place}")]
    NonFiniteActivation { step: usize, place: &'static str },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("gradient check requires dropout disabled, got rate {rate}")]
    DropoutActive { rate: f64 },
    #[error(
        "gradient check failed in block {block}: relative error {max_rel:.3e} at flat index {index} \
         (analytic {analytic:.6e}, numeric {numeric:.6e}, tolerance {tolerance:.1e})"
    )]
    CheckFailed {
        block: &'static str,
        max_rel: f64,
        index: usize,
        analytic: f64,
        numeric: f64,
        tolerance: f64,
    },
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Real> Mat<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> F {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut F {
        &mut self.data[r * self.cols + c]
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[F] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [F] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [F] {
        &mut self.data
    }
}

/// Weights of one LSTM direction. `w` maps input channels to the stacked
/// gate pre-activations (4·hidden rows), `u` is the recurrent matrix and
/// `b` the gate bias, all in the fixed `[i, f, g, o]` block order.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmDirectionParams<F> {
    pub w: Mat<F>,
    pub u: Mat<F>,
    pub b: Vec<F>,
}

impl<F: Real> LstmDirectionParams<F> {
    pub fn zeros(hidden: usize, channels: usize) -> Self {
        LstmDirectionParams {
            w: Mat::zeros(4 * hidden, channels),
            u: Mat::zeros(4 * hidden, hidden),
            b: vec![F::zero(); 4 * hidden],
        }
    }

    pub fn hidden(&self) -> usize {
        self.u.cols()
    }
}

/// The full parameter set plus the hyperparameters needed to run it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<F> {
    pub fwd: LstmDirectionParams<F>,
    pub bwd: LstmDirectionParams<F>,
    pub dense_w: Mat<F>,
    pub dense_b: Vec<F>,
    pub hidden: usize,
    pub dropout_rate: f64,
    pub cfg: EncodingConfig,
}

/// Names of the eight parameter blocks, in serialization order.
pub const BLOCK_NAMES: [&str; 8] = [
    "fwd.W", "fwd.U", "fwd.b", "bwd.W", "bwd.U", "bwd.b", "dense_W", "dense_b",
];

impl<F: Real> ModelParams<F> {
    /// Glorot-uniform weights, zero biases except the forget gate at one.
    /// Deterministic in the seed; the draw order is the block order.
    pub fn init(hidden: usize, dropout_rate: f64, cfg: EncodingConfig, seed: u64) -> Self {
        use rand::SeedableRng;
        assert!(hidden >= 1, "hidden must be at least 1");
        assert!(
            (0.0..1.0).contains(&dropout_rate),
            "dropout_rate must lie in [0, 1)"
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ModelParams {
            fwd: LstmDirectionParams::zeros(hidden, cfg.channels),
            bwd: LstmDirectionParams::zeros(hidden, cfg.channels),
            dense_w: Mat::zeros(cfg.max_len, 2 * hidden),
            dense_b: vec![F::zero(); cfg.max_len],
            hidden,
            dropout_rate,
            cfg,
        };
        let mut glorot = |m: &mut Mat<F>| {
            let limit = (6.0 / (m.rows() + m.cols()) as f64).sqrt();
            for v in m.data_mut() {
                *v = F::of_f64(rng.random_range(-limit..limit));
            }
        };
        glorot(&mut params.fwd.w);
        glorot(&mut params.fwd.u);
        glorot(&mut params.bwd.w);
        glorot(&mut params.bwd.u);
        glorot(&mut params.dense_w);
        // forget-gate bias starts at 1 so early cells keep their memory
        for dir in [&mut params.fwd, &mut params.bwd] {
            for v in &mut dir.b[hidden..2 * hidden] {
                *v = F::one();
            }
        }
        params
    }

    pub fn channels(&self) -> usize {
        self.cfg.channels
    }

    pub fn max_len(&self) -> usize {
        self.cfg.max_len
    }

    /// Flat view of one parameter block, indexed per [`BLOCK_NAMES`].
    pub fn block(&self, i: usize) -> &[F] {
        match i {
            0 => self.fwd.w.data(),
            1 => self.fwd.u.data(),
            2 => &self.fwd.b,
            3 => self.bwd.w.data(),
            4 => self.bwd.u.data(),
            5 => &self.bwd.b,
            6 => self.dense_w.data(),
            7 => &self.dense_b,
            _ => panic!("block index {i} out of range"),
        }
    }

    pub fn block_mut(&mut self, i: usize) -> &mut [F] {
        match i {
            0 => self.fwd.w.data_mut(),
            1 => self.fwd.u.data_mut(),
            2 => &mut self.fwd.b,
            3 => self.bwd.w.data_mut(),
            4 => self.bwd.u.data_mut(),
            5 => &mut self.bwd.b,
            6 => self.dense_w.data_mut(),
            7 => &mut self.dense_b,
            _ => panic!("block index {i} out of range"),
        }
    }

    pub fn parameter_count(&self) -> usize {
        (0..BLOCK_NAMES.len()).map(|i| self.block(i).len()).sum()
    }
}

/// Parameter-shaped gradient accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<F> {
    pub fwd: LstmDirectionParams<F>,
    pub bwd: LstmDirectionParams<F>,
    pub dense_w: Mat<F>,
    pub dense_b: Vec<F>,
}

impl<F: Real> Gradients<F> {
    pub fn zeros_like(params: &ModelParams<F>) -> Self {
        Gradients {
            fwd: LstmDirectionParams::zeros(params.hidden, params.channels()),
            bwd: LstmDirectionParams::zeros(params.hidden, params.channels()),
            dense_w: Mat::zeros(params.max_len(), 2 * params.hidden),
            dense_b: vec![F::zero(); params.max_len()],
        }
    }

    pub fn block(&self, i: usize) -> &[F] {
        match i {
            0 => self.fwd.w.data(),
            1 => self.fwd.u.data(),
            2 => &self.fwd.b,
            3 => self.bwd.w.data(),
            4 => self.bwd.u.data(),
            5 => &self.bwd.b,
            6 => self.dense_w.data(),
            7 => &self.dense_b,
            _ => panic!("block index {i} out of range"),
        }
    }

    pub fn block_mut(&mut self, i: usize) -> &mut [F] {
        match i {
            0 => self.fwd.w.data_mut(),
            1 => self.fwd.u.data_mut(),
            2 => &mut self.fwd.b,
            3 => self.bwd.w.data_mut(),
            4 => self.bwd.u.data_mut(),
            5 => &mut self.bwd.b,
            6 => self.dense_w.data_mut(),
            7 => &mut self.dense_b,
            _ => panic!("block index {i} out of range"),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients<F>) {
        for i in 0..BLOCK_NAMES.len() {
            let src = other.block(i).to_vec();
            for (a, b) in self.block_mut(i).iter_mut().zip(src) {
                *a = *a + b;
            }
        }
    }

    pub fn scale(&mut self, factor: F) {
        for i in 0..BLOCK_NAMES.len() {
            for v in self.block_mut(i) {
                *v = *v * factor;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        (0..BLOCK_NAMES.len())
            .flat_map(|i| self.block(i).iter())
            .fold(0.0f64, |acc, v| acc.max(v.abs().into_f64()))
    }
}

/// Everything the backward pass needs from one training-mode forward.
#[derive(Debug, Clone)]
pub struct ForwardCache<F> {
    pub(crate) fwd_steps: Vec<StepCache<F>>,
    pub(crate) bwd_steps: Vec<StepCache<F>>,
    /// Concatenated final hidden states before dropout.
    pub(crate) concat: Vec<F>,
    /// Per-unit dropout factor: 0 for dropped units, 1/(1-rate) for kept.
    pub(crate) mask_scale: Vec<F>,
    pub(crate) probs: Vec<F>,
}

#[derive(Debug, Clone)]
pub(crate) struct StepCache<F> {
    pub channel: Option<usize>,
    /// Post-activation gates, 4·hidden in `[i, f, g, o]` order.
    pub gates: Vec<F>,
    pub c: Vec<F>,
    pub tanh_c: Vec<F>,
    pub h: Vec<F>,
}

#[inline]
fn sigmoid<F: Real>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}

fn direction_pass<F: Real>(
    dir: &LstmDirectionParams<F>,
    matrix: &InputMatrix,
    length: usize,
    reverse: bool,
    mut caches: Option<&mut Vec<StepCache<F>>>,
) -> Result<Vec<F>, NnError> {
    let hidden = dir.hidden();
    let mut h = vec![F::zero(); hidden];
    let mut c = vec![F::zero(); hidden];
    let mut pre = vec![F::zero(); 4 * hidden];

    let order: Box<dyn Iterator<Item = usize>> = if reverse {
        Box::new((0..length).rev())
    } else {
        Box::new(0..length)
    };
    for t in order {
        pre.copy_from_slice(&dir.b);
        let channel = matrix.active_channel(t);
        if let Some(ch) = channel {
            for (r, p) in pre.iter_mut().enumerate() {
                *p = *p + dir.w.at(r, ch);
            }
        }
        for (r, p) in pre.iter_mut().enumerate() {
            let mut acc = F::zero();
            for (u, hv) in dir.u.row(r).iter().zip(&h) {
                acc = acc + *u * *hv;
            }
            *p = *p + acc;
        }

        let mut gates = vec![F::zero(); 4 * hidden];
        for j in 0..hidden {
            gates[j] = sigmoid(pre[j]); // input
            gates[hidden + j] = sigmoid(pre[hidden + j]); // forget
            gates[2 * hidden + j] = pre[2 * hidden + j].tanh(); // candidate
            gates[3 * hidden + j] = sigmoid(pre[3 * hidden + j]); // output
        }
        let mut tanh_c = vec![F::zero(); hidden];
        for j in 0..hidden {
            let new_c = gates[hidden + j] * c[j] + gates[j] * gates[2 * hidden + j];
            if !new_c.is_finite() {
                return Err(NnError::NonFiniteActivation { step: t, place: "cell state" });
            }
            c[j] = new_c;
            tanh_c[j] = new_c.tanh();
            h[j] = gates[3 * hidden + j] * tanh_c[j];
        }
        if let Some(ref mut steps) = caches {
            steps.push(StepCache {
                channel,
                gates,
                c: c.clone(),
                tanh_c,
                h: h.clone(),
            });
        }
    }
    Ok(h)
}

/// Run one direction over the first `length` rows and return the final
/// hidden state. `reverse` walks the rows back to front; zero length returns
/// the all-zero initial state.
pub fn lstm_direction_forward<F: Real>(
    dir: &LstmDirectionParams<F>,
    matrix: &InputMatrix,
    length: usize,
    reverse: bool,
) -> Result<Vec<F>, NnError> {
    direction_pass(dir, matrix, length, reverse, None)
}

fn softmax_into<F: Real>(logits: &[F]) -> Result<Vec<F>, NnError> {
    let mut max = logits[0];
    for &l in logits {
        if !l.is_finite() {
            return Err(NnError::NonFiniteActivation { step: 0, place: "logits" });
        }
        if l > max {
            max = l;
        }
    }
    let mut probs: Vec<F> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum = probs.iter().fold(F::zero(), |a, &b| a + b);
    for p in &mut probs {
        *p = *p / sum;
    }
    Ok(probs)
}

impl<F: Real> ModelParams<F> {
    fn check_shapes(&self, matrix: &InputMatrix) -> Result<(), NnError> {
        if matrix.channels() != self.channels() || matrix.max_len() != self.max_len() {
            return Err(NnError::ShapeMismatch(format!(
                "matrix is {}x{}, model expects {}x{}",
                matrix.max_len(),
                matrix.channels(),
                self.max_len(),
                self.channels()
            )));
        }
        Ok(())
    }

    fn dense_forward(&self, dropped: &[F]) -> Result<Vec<F>, NnError> {
        let mut logits = self.dense_b.clone();
        for (pos, l) in logits.iter_mut().enumerate() {
            let mut acc = F::zero();
            for (w, z) in self.dense_w.row(pos).iter().zip(dropped) {
                acc = acc + *w * *z;
            }
            *l = *l + acc;
        }
        softmax_into(&logits)
    }

    /// Inference-mode forward: no dropout, no randomness, no cache.
    pub fn infer(&self, matrix: &InputMatrix, length: usize) -> Result<Vec<F>, NnError> {
        self.check_shapes(matrix)?;
        let hf = direction_pass(&self.fwd, matrix, length, false, None)?;
        let hb = direction_pass(&self.bwd, matrix, length, true, None)?;
        let mut concat = hf;
        concat.extend(hb);
        self.dense_forward(&concat)
    }

    /// Training-mode forward: draws an inverted-dropout mask from `rng` and
    /// returns the cache the backward pass consumes.
    pub fn forward_training(
        &self,
        matrix: &InputMatrix,
        length: usize,
        rng: &mut impl Rng,
    ) -> Result<(Vec<F>, ForwardCache<F>), NnError> {
        self.check_shapes(matrix)?;
        let mut fwd_steps = Vec::with_capacity(length);
        let mut bwd_steps = Vec::with_capacity(length);
        let hf = direction_pass(&self.fwd, matrix, length, false, Some(&mut fwd_steps))?;
        let hb = direction_pass(&self.bwd, matrix, length, true, Some(&mut bwd_steps))?;
        let mut concat = hf;
        concat.extend(hb);

        let keep = 1.0 - self.dropout_rate;
        let mask_scale: Vec<F> = (0..concat.len())
            .map(|_| {
                if self.dropout_rate == 0.0 || rng.random::<f64>() < keep {
                    F::of_f64(1.0 / keep)
                } else {
                    F::zero()
                }
            })
            .collect();
        let dropped: Vec<F> = concat
            .iter()
            .zip(&mask_scale)
            .map(|(z, m)| *z * *m)
            .collect();
        let probs = self.dense_forward(&dropped)?;
        let cache = ForwardCache {
            fwd_steps,
            bwd_steps,
            concat,
            mask_scale,
            probs: probs.clone(),
        };
        Ok((probs, cache))
    }
}

/// Categorical cross-entropy against the one-hot target, with the
/// probability clamped at 1e-12 before the log.
pub fn loss<F: Real>(probabilities: &[F], target: &TargetVector) -> F {
    let floor = F::of_f64(1e-12);
    let p = probabilities[target.index()];
    let p = if p < floor { floor } else { p };
    -p.ln()
}
