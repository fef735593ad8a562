use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use serde::Serialize;

use accentor::dataset::{
    build_instances, instances_digest, parse_corpus, parse_dictionary, parse_instances,
    split_corpus, split_dictionary, Fraction, InstanceSource, Mode, SplitConfig, TrainInstance,
};
use accentor::encoder::DecodeMode;
use accentor::eval::bucket_accuracy;
use accentor::modelio;
use accentor::trainer::{predict_all, EvalCounts};

use crate::commands::train::decode_name;
use crate::commands::{open, policy, report_issues};
use crate::settings::{
    emit_manifest, parse_as, require, resolve, CliError, ConfigFile,
};

/// Which side of the reproducible split to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitSide {
    All,
    Train,
    Test,
}

impl FromStr for SplitSide {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(SplitSide::All),
            "train" => Ok(SplitSide::Train),
            "test" => Ok(SplitSide::Test),
            other => Err(format!(
                "unknown split {other:?} (expected all, train or test)"
            )),
        }
    }
}

impl SplitSide {
    pub fn name(self) -> &'static str {
        match self {
            SplitSide::All => "all",
            SplitSide::Train => "train",
            SplitSide::Test => "test",
        }
    }
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Trained model file.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Evaluation data.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Instance mode; defaults to the model's own tag.
    #[arg(long)]
    mode: Option<String>,
    /// Base path for the TSV and JSON reports.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Data format: auto (from mode), dict, corpus, or instances
    /// (`input<TAB>target` lines).
    #[arg(long)]
    format: Option<String>,
    /// Evaluate all of the data, or re-derive the train/test split with
    /// --seed and --train-fraction and use one side.
    #[arg(long)]
    split: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "train-fraction")]
    train_fraction: Option<String>,
    #[arg(long)]
    decode: Option<String>,
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct EvalSettings {
    model: PathBuf,
    data: PathBuf,
    mode: String,
    report: PathBuf,
    format: String,
    split: String,
    seed: u64,
    train_fraction: String,
    decode: String,
    strict: bool,
}

pub fn run(args: EvalArgs, cfg: &ConfigFile, manifest_path: Option<&Path>) -> Result<(), CliError> {
    let model_path = require(args.model, cfg.model.clone(), "model")?;
    let data = require(args.data, cfg.data.clone(), "data")?;
    let report_base = require(args.report, cfg.report.clone(), "report")?;
    let (params, meta) = modelio::load(&model_path)?;
    let mode: Mode = match args.mode.or_else(|| cfg.mode.clone()) {
        Some(m) => parse_as(m, "mode")?,
        None => meta.model_tag,
    };
    let format = resolve(args.format, cfg.format.clone(), "auto".into());
    let split: SplitSide = parse_as(
        resolve(args.split, cfg.split.clone(), "all".into()),
        "split",
    )?;
    let seed = resolve(args.seed, cfg.seed, 0);
    let train_fraction: Fraction = parse_as(
        resolve(args.train_fraction, cfg.train_fraction.clone(), "2/3".into()),
        "train-fraction",
    )?;
    let decode: DecodeMode = parse_as(
        resolve(args.decode, cfg.decode.clone(), "constrained".into()),
        "decode",
    )?;
    let strict = args.strict || cfg.strict.unwrap_or(false);

    // Instances are constructed against the dataset cap so that words the
    // model's max_len cannot hold still enter the denominator as errors.
    let build_cap = params.cfg.max_len.max(40);
    let split_cfg = SplitConfig {
        train_fraction,
        seed,
        ..SplitConfig::default()
    };
    let (instances, dropped) =
        load_instances(&data, mode, &format, split, &split_cfg, build_cap, strict)?;
    if instances.is_empty() {
        eprintln!("warning: no instances to evaluate");
    }

    let predictions = predict_all(&params, &instances, decode);
    let mut counts = EvalCounts::default();
    for (inst, pred) in instances.iter().zip(&predictions) {
        counts.total += 1;
        if inst.len() > params.cfg.max_len {
            counts.too_long += 1;
        } else if *pred == Some(inst.target()) {
            counts.correct += 1;
        }
    }
    let buckets = bucket_accuracy(&instances, &predictions);

    let tsv_path = report_base.with_extension("tsv");
    let json_path = report_base.with_extension("json");
    fs::write(&tsv_path, buckets.to_tsv())
        .map_err(|e| CliError::Usage(format!("{}: {e}", tsv_path.display())))?;
    let report_json = serde_json::json!({
        "model": model_path,
        "mode": mode.to_string(),
        "decode": decode_name(decode),
        "counts": counts,
        "buckets": buckets,
        "dropped_over_cap": dropped,
    });
    fs::write(&json_path, serde_json::to_string_pretty(&report_json).unwrap())
        .map_err(|e| CliError::Usage(format!("{}: {e}", json_path.display())))?;

    println!(
        "instances {}  correct {}  accuracy {}  too-long {}  dropped-over-cap {}",
        counts.total,
        counts.correct,
        fmt_opt_ratio(counts),
        counts.too_long,
        dropped
    );
    println!(
        "micro-average {}",
        buckets
            .micro_average()
            .map(|m| format!("{m:.4}"))
            .unwrap_or_else(|| "n/a".into())
    );
    println!("reports written to {} and {}", tsv_path.display(), json_path.display());

    let settings = EvalSettings {
        model: model_path,
        data,
        mode: mode.to_string(),
        report: report_base.clone(),
        format,
        split: split.name().into(),
        seed,
        train_fraction: train_fraction.to_string(),
        decode: decode_name(decode),
        strict,
    };
    let manifest = serde_json::json!({
        "command": "eval",
        "settings": settings,
        "dataset-digest": instances_digest(&instances),
        "counts": counts,
        "micro-average": buckets.micro_average(),
    });
    let default_manifest = report_base.with_extension("manifest.json");
    emit_manifest(&manifest, manifest_path, Some(&default_manifest))
}

fn fmt_opt_ratio(counts: EvalCounts) -> String {
    if counts.total == 0 {
        "n/a".into()
    } else {
        format!("{:.4}", counts.accuracy())
    }
}

#[allow(clippy::too_many_arguments)]
fn load_instances(
    data: &Path,
    mode: Mode,
    format: &str,
    split: SplitSide,
    split_cfg: &SplitConfig,
    build_cap: usize,
    strict: bool,
) -> Result<(Vec<TrainInstance>, u64), CliError> {
    let effective_format = match format {
        "auto" => match mode {
            Mode::Dict => "dict",
            Mode::Cfm | Mode::Cdm => "corpus",
        },
        other => other,
    };
    match effective_format {
        "instances" => {
            if split != SplitSide::All {
                return Err(CliError::usage(
                    "--format instances carries no split information; use --split all",
                ));
            }
            let report = parse_instances(open(data)?, mode, build_cap, policy(strict))?;
            report_issues(data, &report.issues);
            Ok((report.items, 0))
        }
        "dict" => {
            if mode != Mode::Dict {
                return Err(CliError::usage(format!(
                    "--format dict conflicts with --mode {mode}"
                )));
            }
            let report = parse_dictionary(open(data)?, policy(strict))?;
            report_issues(data, &report.issues);
            let entries = match split {
                SplitSide::All => report.items,
                SplitSide::Train => split_dictionary(report.items, split_cfg).0,
                SplitSide::Test => split_dictionary(report.items, split_cfg).1,
            };
            let build = build_instances(InstanceSource::Dictionary(&entries), mode, build_cap)?;
            Ok((build.instances, build.too_long))
        }
        "corpus" => {
            if mode == Mode::Dict {
                return Err(CliError::usage("--format corpus conflicts with --mode dict"));
            }
            let report = parse_corpus(open(data)?, policy(strict))?;
            report_issues(data, &report.issues);
            let utts = match split {
                SplitSide::All => report.items,
                SplitSide::Train => split_corpus(report.items, split_cfg).0,
                SplitSide::Test => split_corpus(report.items, split_cfg).1,
            };
            let build = build_instances(InstanceSource::Corpus(&utts), mode, build_cap)?;
            Ok((build.instances, build.too_long))
        }
        other => Err(CliError::Usage(format!(
            "unknown format {other:?} (expected auto, dict, corpus or instances)"
        ))),
    }
}
