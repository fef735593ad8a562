//! Finite-difference verification of the backward pass.
//!
//! For a sample of coordinates in every parameter block the analytic
//! gradient is compared against the central difference
//! `(L(theta+eps) - L(theta-eps)) / 2eps` with `eps = 1e-4`, in double
//! precision and with dropout disabled so the loss is deterministic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::TrainInstance;
use crate::encoder::{encode, InputMatrix, TargetVector};

use super::{loss, Gradients, ModelParams, NnError, BLOCK_NAMES};

const FD_EPSILON: f64 = 1e-4;
// Differences below this scale are under the measurement noise of the
// central difference itself and never count as relative error.
const REL_FLOOR: f64 = 1e-3;

/// Worst coordinate found in one parameter block.
#[derive(Debug, Clone)]
pub struct BlockReport {
    pub block: &'static str,
    pub checked: usize,
    pub max_rel: f64,
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub blocks: Vec<BlockReport>,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn max_rel(&self) -> f64 {
        self.blocks.iter().fold(0.0, |a, b| a.max(b.max_rel))
    }

    pub fn passed(&self) -> bool {
        self.max_rel() < self.tolerance
    }

    /// `Ok` on pass, otherwise the failure naming the worst block.
    pub fn verdict(&self) -> Result<(), NnError> {
        if self.passed() {
            return Ok(());
        }
        let worst = self
            .blocks
            .iter()
            .max_by(|a, b| a.max_rel.total_cmp(&b.max_rel))
            .expect("at least one block");
        Err(NnError::CheckFailed {
            block: worst.block,
            max_rel: worst.max_rel,
            index: worst.worst_index,
            analytic: worst.analytic,
            numeric: worst.numeric,
            tolerance: self.tolerance,
        })
    }
}

fn deterministic_loss(
    params: &ModelParams<f64>,
    matrix: &InputMatrix,
    target: &TargetVector,
    length: usize,
) -> Result<f64, NnError> {
    // dropout is off, so the rng never fires
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (probs, _) = params.forward_training(matrix, length, &mut rng)?;
    Ok(loss(&probs, target))
}

/// Compare analytic gradients against central differences on at least
/// `samples_per_block` coordinates per block (all of them for small blocks).
pub fn gradient_check(
    params: &ModelParams<f64>,
    instance: &TrainInstance,
    tolerance: f64,
    samples_per_block: usize,
    seed: u64,
) -> Result<GradCheckReport, NnError> {
    gradient_check_tampered(params, instance, tolerance, samples_per_block, seed, |_| {})
}

/// Same as [`gradient_check`] but lets a test hook corrupt the analytic
/// gradients before comparison, to prove the check can fail.
pub fn gradient_check_tampered(
    params: &ModelParams<f64>,
    instance: &TrainInstance,
    tolerance: f64,
    samples_per_block: usize,
    seed: u64,
    tamper: impl FnOnce(&mut Gradients<f64>),
) -> Result<GradCheckReport, NnError> {
    if params.dropout_rate != 0.0 {
        return Err(NnError::DropoutActive {
            rate: params.dropout_rate,
        });
    }
    let (matrix, target) = encode(instance, &params.cfg)?;
    let length = instance.len();

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (_, cache) = params.forward_training(&matrix, length, &mut rng)?;
    let mut analytic = params.backward(&cache, &target);
    tamper(&mut analytic);

    let mut pick = ChaCha8Rng::seed_from_u64(seed);
    let mut blocks = Vec::with_capacity(BLOCK_NAMES.len());
    for (bi, name) in BLOCK_NAMES.iter().enumerate() {
        let size = params.block(bi).len();
        let indices: Vec<usize> = if size <= samples_per_block {
            (0..size).collect()
        } else {
            (0..samples_per_block)
                .map(|_| pick.random_range(0..size))
                .collect()
        };
        let mut report = BlockReport {
            block: name,
            checked: indices.len(),
            max_rel: 0.0,
            worst_index: 0,
            analytic: 0.0,
            numeric: 0.0,
        };
        for idx in indices {
            let mut plus = params.clone();
            plus.block_mut(bi)[idx] += FD_EPSILON;
            let mut minus = params.clone();
            minus.block_mut(bi)[idx] -= FD_EPSILON;
            let numeric = (deterministic_loss(&plus, &matrix, &target, length)?
                - deterministic_loss(&minus, &matrix, &target, length)?)
                / (2.0 * FD_EPSILON);
            let a = analytic.block(bi)[idx];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(REL_FLOOR);
            if rel > report.max_rel {
                report.max_rel = rel;
                report.worst_index = idx;
                report.analytic = a;
                report.numeric = numeric;
            }
        }
        blocks.push(report);
    }
    Ok(GradCheckReport { blocks, tolerance })
}
