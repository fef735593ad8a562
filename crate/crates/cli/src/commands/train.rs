use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use accentor::dataset::{
    build_instances, carve_dev, instances_digest, parse_corpus, parse_dictionary, split_corpus,
    split_dictionary, Fraction, InstanceSource, Mode, SplitConfig, TrainInstance,
};
use accentor::encoder::{DecodeMode, EncodingConfig};
use accentor::modelio::{self, ModelMeta};
use accentor::nn::AdamConfig;
use accentor::trainer::{self, InstanceCounts, RunManifest, TrainRunConfig};

use crate::commands::{open, policy, report_issues};
use crate::settings::{
    emit_manifest, manifest_digest, parse_as, require, resolve, CliError, ConfigFile,
};

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Training regime: dict, cfm or cdm.
    #[arg(long)]
    mode: Option<String>,
    /// Data file; parsed as a dictionary in dict mode, a corpus otherwise.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Dictionary-format data (alternative to --data; dict mode only).
    #[arg(long, conflicts_with = "data")]
    dict: Option<PathBuf>,
    /// Corpus-format data (alternative to --data; cfm/cdm modes only).
    #[arg(long, conflicts_with_all = ["data", "dict"])]
    corpus: Option<PathBuf>,
    /// Where to write the trained model.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// LSTM units per direction.
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
    /// Adam learning rate.
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long = "max-len")]
    max_len: Option<usize>,
    /// 34 (with separator channel) or 33 (paper-shaped, no CDM inputs).
    #[arg(long)]
    channels: Option<usize>,
    #[arg(long = "train-fraction")]
    train_fraction: Option<String>,
    #[arg(long = "dev-fraction")]
    dev_fraction: Option<String>,
    /// Bitwise-reproducible gradient reduction (true by default).
    #[arg(long)]
    reproducible: Option<bool>,
    /// Decode mode for the per-epoch dev accuracy: constrained or raw.
    #[arg(long)]
    decode: Option<String>,
    /// Abort on the first unparseable line instead of skipping it.
    #[arg(long)]
    strict: bool,
    /// Select the best epoch on the held-out test split instead of a dev
    /// carve (the reference protocol; conflates selection and reporting).
    #[arg(long = "select-on-test")]
    select_on_test: bool,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct TrainSettings {
    mode: String,
    data: PathBuf,
    out: PathBuf,
    epochs: usize,
    batch: usize,
    seed: u64,
    hidden: usize,
    dropout: f64,
    lr: f64,
    max_len: usize,
    channels: usize,
    train_fraction: String,
    dev_fraction: String,
    reproducible: bool,
    decode: String,
    strict: bool,
    select_on_test: bool,
}

pub fn run(args: TrainArgs, cfg: &ConfigFile, manifest_path: Option<&Path>) -> Result<(), CliError> {
    let mode: Mode = parse_as(require(args.mode.clone(), cfg.mode.clone(), "mode")?, "mode")?;
    let data = pick_data(&args, cfg, mode)?;
    let out = require(args.out, cfg.out.clone(), "out")?;
    let epochs = resolve(args.epochs, cfg.epochs, 10);
    let batch = resolve(args.batch, cfg.batch, 128);
    let seed = resolve(args.seed, cfg.seed, 0);
    let hidden = resolve(args.hidden, cfg.hidden, 64);
    let dropout = resolve(args.dropout, cfg.dropout, 0.2);
    let lr = resolve(args.lr, cfg.lr, 0.001);
    let max_len = resolve(args.max_len, cfg.max_len, 40);
    let channels = resolve(args.channels, cfg.channels, 34);
    let train_fraction: Fraction = parse_as(
        resolve(args.train_fraction, cfg.train_fraction.clone(), "2/3".into()),
        "train-fraction",
    )?;
    let dev_fraction: Fraction = parse_as(
        resolve(args.dev_fraction, cfg.dev_fraction.clone(), "0.05".into()),
        "dev-fraction",
    )?;
    let reproducible = resolve(args.reproducible, cfg.reproducible, true);
    let decode: DecodeMode = parse_as(
        resolve(args.decode, cfg.decode.clone(), "constrained".into()),
        "decode",
    )?;
    let strict = args.strict || cfg.strict.unwrap_or(false);
    let select_on_test = args.select_on_test || cfg.select_on_test.unwrap_or(false);

    let encoding = EncodingConfig::new(max_len, channels).map_err(CliError::usage)?;
    if channels == 33 && mode == Mode::Cdm {
        return Err(CliError::usage(
            "--channels 33 cannot represent the separator required by --mode cdm",
        ));
    }
    let split_cfg = SplitConfig {
        train_fraction,
        dev_fraction,
        seed,
    };

    let (train_set, dev_set, counts) =
        prepare_instances(&data, mode, strict, &split_cfg, max_len, select_on_test)?;
    eprintln!(
        "instances: {} train, {} dev ({} duplicates removed, {} too long)",
        counts.train, counts.dev, counts.duplicates_removed, counts.too_long
    );

    let run_cfg = TrainRunConfig {
        epochs,
        batch_size: batch,
        seed,
        hidden,
        dropout_rate: dropout,
        optimizer: AdamConfig {
            learning_rate: lr,
            ..AdamConfig::default()
        },
        encoding,
        model_tag: mode,
        reproducible,
        dev_decode: decode,
    };
    let outcome = trainer::train(&train_set, &dev_set, &run_cfg)?;
    for rec in &outcome.records {
        println!(
            "epoch {:>3}  loss {:.4}  dev-acc {:.4}  ({:.1}s)",
            rec.epoch, rec.mean_train_loss, rec.dev_accuracy, rec.wall_secs
        );
    }
    println!("best epoch: {}", outcome.best_epoch);

    let settings = TrainSettings {
        mode: mode.to_string(),
        data,
        out: out.clone(),
        epochs,
        batch,
        seed,
        hidden,
        dropout,
        lr,
        max_len,
        channels,
        train_fraction: train_fraction.to_string(),
        dev_fraction: dev_fraction.to_string(),
        reproducible,
        decode: decode_name(decode),
        strict,
        select_on_test,
    };
    let mut manifest = RunManifest {
        command: "train".into(),
        settings: serde_json::to_value(&settings).expect("settings serialize"),
        dataset_digest: Some(instances_digest(&train_set)),
        instance_counts: Some(counts),
        records: outcome.records.clone(),
        best_epoch: Some(outcome.best_epoch),
        digest: None,
    };
    let digest = manifest_digest(&manifest);
    manifest.digest = Some(digest.clone());

    modelio::save(
        &outcome.params,
        &ModelMeta {
            model_tag: mode,
            manifest_digest: Some(digest),
        },
        &out,
    )?;
    let default_manifest = out.with_extension("accm.manifest.json");
    emit_manifest(
        &serde_json::to_value(&manifest).unwrap(),
        manifest_path,
        Some(&default_manifest),
    )?;
    println!("model written to {}", out.display());
    Ok(())
}

pub fn decode_name(mode: DecodeMode) -> String {
    match mode {
        DecodeMode::Raw => "raw".into(),
        DecodeMode::Constrained => "constrained".into(),
    }
}

fn pick_data(args: &TrainArgs, cfg: &ConfigFile, mode: Mode) -> Result<PathBuf, CliError> {
    // --dict/--corpus double as format assertions
    if let Some(path) = args.dict.clone().or_else(|| cfg.dict.clone()) {
        if mode != Mode::Dict {
            return Err(CliError::usage(format!(
                "--mode {mode} conflicts with --dict (corpus modes read --corpus or --data)"
            )));
        }
        return Ok(path);
    }
    if let Some(path) = args.corpus.clone().or_else(|| cfg.corpus.clone()) {
        if mode == Mode::Dict {
            return Err(CliError::usage(
                "--mode dict conflicts with --corpus (dict mode reads --dict or --data)",
            ));
        }
        return Ok(path);
    }
    require(args.data.clone(), cfg.data.clone(), "data")
}

fn prepare_instances(
    data: &Path,
    mode: Mode,
    strict: bool,
    split_cfg: &SplitConfig,
    max_len: usize,
    select_on_test: bool,
) -> Result<(Vec<TrainInstance>, Vec<TrainInstance>, InstanceCounts), CliError> {
    let (train_build, test_build) = match mode {
        Mode::Dict => {
            let report = parse_dictionary(open(data)?, policy(strict))?;
            report_issues(data, &report.issues);
            let (train_entries, test_entries) = split_dictionary(report.items, split_cfg);
            (
                build_instances(InstanceSource::Dictionary(&train_entries), mode, max_len)?,
                build_instances(InstanceSource::Dictionary(&test_entries), mode, max_len)?,
            )
        }
        Mode::Cfm | Mode::Cdm => {
            let report = parse_corpus(open(data)?, policy(strict))?;
            report_issues(data, &report.issues);
            let (train_utts, test_utts) = split_corpus(report.items, split_cfg);
            (
                build_instances(InstanceSource::Corpus(&train_utts), mode, max_len)?,
                build_instances(InstanceSource::Corpus(&test_utts), mode, max_len)?,
            )
        }
    };

    let (train_set, dev_set) = if select_on_test {
        (train_build.instances, test_build.instances)
    } else {
        carve_dev(train_build.instances, split_cfg)
    };
    let counts = InstanceCounts {
        train: train_set.len(),
        dev: dev_set.len(),
        duplicates_removed: train_build.duplicates_removed,
        too_long: train_build.too_long,
    };
    Ok((train_set, dev_set, counts))
}
