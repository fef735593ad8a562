use std::collections::BTreeMap;
use std::path::Path;

use clap::Args;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use accentor::dataset::{Mode, TrainInstance};
use accentor::encoder::EncodingConfig;
use accentor::nn::{
    gradient_check_tampered, GradCheckReport, ModelParams, NnError, BLOCK_NAMES,
};
use accentor::textcore::Alphabet;

use crate::settings::{emit_manifest, resolve, CliError, ConfigFile};

#[derive(Args, Debug)]
pub struct GradcheckArgs {
    /// LSTM units per direction for the checked model.
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    maxlen: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Maximum relative error allowed against central differences.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Coordinates sampled per parameter block.
    #[arg(long)]
    samples: Option<usize>,
    /// Random instances to check.
    #[arg(long)]
    instances: Option<usize>,
    /// Test hook: corrupt the named gradient block before comparing.
    #[arg(long = "corrupt-block", hide = true)]
    corrupt_block: Option<String>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct GradcheckSettings {
    hidden: usize,
    maxlen: usize,
    seed: u64,
    tolerance: f64,
    samples: usize,
    instances: usize,
}

/// A random checkable instance: optional short context prefix, then a word
/// with at least one vowel; the target sits on a random word vowel.
fn random_instance(seed: u64, max_len: usize) -> TrainInstance {
    use rand::{Rng, SeedableRng};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let prefix_len = if max_len >= 8 { rng.random_range(0..=3) } else { 0 };
        let budget = max_len - if prefix_len > 0 { prefix_len + 1 } else { 0 };
        let word_len = rng.random_range(3..=budget.min(10));
        let mut input = String::new();
        for _ in 0..prefix_len {
            input.push(Alphabet::LETTERS[rng.random_range(0..33)]);
        }
        let word_start = if prefix_len > 0 {
            input.push(Alphabet::SEPARATOR);
            prefix_len + 1
        } else {
            0
        };
        for _ in 0..word_len {
            input.push(Alphabet::LETTERS[rng.random_range(0..33)]);
        }
        let vowels: Vec<usize> = input
            .chars()
            .enumerate()
            .filter(|(i, c)| *i >= word_start && Alphabet::is_vowel(*c))
            .map(|(i, _)| i)
            .collect();
        if vowels.is_empty() {
            continue;
        }
        let target = vowels[rng.random_range(0..vowels.len())];
        return TrainInstance::new(input, target, Mode::Cdm, max_len).expect("valid by construction");
    }
}

pub fn run(
    args: GradcheckArgs,
    cfg: &ConfigFile,
    manifest_path: Option<&Path>,
) -> Result<(), CliError> {
    let hidden = resolve(args.hidden, cfg.hidden, 8);
    let maxlen = resolve(args.maxlen, cfg.maxlen, 12);
    let seed = resolve(args.seed, cfg.seed, 0);
    let tolerance = resolve(args.tolerance, cfg.tolerance, 1e-3);
    let samples = resolve(args.samples, cfg.samples, 200);
    let instances = resolve(args.instances, cfg.instances, 20);
    if maxlen < 4 {
        return Err(CliError::usage("--maxlen must be at least 4"));
    }

    let encoding = EncodingConfig::new(maxlen, 34).map_err(CliError::usage)?;
    let corrupt = args.corrupt_block.as_deref();
    if let Some(block) = corrupt {
        if !BLOCK_NAMES.contains(&block) {
            return Err(CliError::Usage(format!(
                "unknown block {block:?}; expected one of {BLOCK_NAMES:?}"
            )));
        }
    }

    let mut worst_per_block: BTreeMap<&'static str, f64> = BTreeMap::new();
    let mut failure: Option<NnError> = None;
    for i in 0..instances {
        let instance_seed = seed.wrapping_add(i as u64);
        let params: ModelParams<f64> =
            ModelParams::init(hidden, 0.0, encoding, instance_seed);
        let instance = random_instance(instance_seed, maxlen);
        let report: GradCheckReport = gradient_check_tampered(
            &params,
            &instance,
            tolerance,
            samples,
            instance_seed,
            |grads| {
                if let Some(block) = corrupt {
                    let idx = BLOCK_NAMES.iter().position(|n| *n == block).unwrap();
                    grads.block_mut(idx)[0] += 0.5;
                }
            },
        )?;
        for block in &report.blocks {
            let worst = worst_per_block.entry(block.block).or_insert(0.0);
            *worst = worst.max(block.max_rel);
        }
        if failure.is_none() {
            if let Err(e) = report.verdict() {
                failure = Some(e);
            }
        }
    }

    for (block, rel) in &worst_per_block {
        println!("block {block:<8} max-rel {rel:.3e}");
    }
    let overall = worst_per_block.values().cloned().fold(0.0, f64::max);
    let verdict = if failure.is_none() { "PASS" } else { "FAIL" };
    println!(
        "{verdict}: {instances} instance(s), overall max-rel {overall:.3e}, tolerance {tolerance:.1e}"
    );

    let settings = GradcheckSettings {
        hidden,
        maxlen,
        seed,
        tolerance,
        samples,
        instances,
    };
    let manifest = serde_json::json!({
        "command": "gradcheck",
        "settings": settings,
        "overall-max-rel": overall,
        "passed": failure.is_none(),
    });
    emit_manifest(&manifest, manifest_path, None)?;

    match failure {
        None => Ok(()),
        Some(e) => Err(e.into()),
    }
}
