use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use accentor::dataset::{parse_corpus, parse_dictionary, Fraction, SplitConfig, split_corpus};
use accentor::encoder::DecodeMode;
use accentor::eval::{
    extract_homographs, score_homographs, threshold_homographs, ScoredModel, ThresholdBasis,
};
use accentor::modelio;

use crate::commands::eval_cmd::SplitSide;
use crate::commands::train::decode_name;
use crate::commands::{open, policy, report_issues};
use crate::settings::{emit_manifest, parse_as, require, resolve, CliError, ConfigFile};

#[derive(Args, Debug)]
pub struct HomographsArgs {
    /// Stressed dictionary the pairs are extracted from.
    #[arg(long)]
    dict: Option<PathBuf>,
    /// Stressed corpus for frequency counts and test occurrences.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// One or more trained models to score.
    #[arg(long, num_args = 1..)]
    models: Option<Vec<PathBuf>>,
    /// Minimum corpus occurrences for a pair to qualify.
    #[arg(long = "min-count")]
    min_count: Option<u64>,
    /// Keep only the most frequent pairs.
    #[arg(long = "top-k")]
    top_k: Option<usize>,
    /// Apply --min-count per-variant (default) or to the pair total.
    #[arg(long = "threshold-basis")]
    threshold_basis: Option<String>,
    /// Score on the test side of the reproducible split (default), the
    /// train side, or all of the corpus.
    #[arg(long)]
    split: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "train-fraction")]
    train_fraction: Option<String>,
    #[arg(long)]
    decode: Option<String>,
    /// Base path for per-model reports.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct HomographsSettings {
    dict: PathBuf,
    corpus: PathBuf,
    models: Vec<PathBuf>,
    min_count: u64,
    top_k: usize,
    threshold_basis: String,
    split: String,
    seed: u64,
    train_fraction: String,
    decode: String,
    report: PathBuf,
    strict: bool,
}

pub fn run(
    args: HomographsArgs,
    cfg: &ConfigFile,
    manifest_path: Option<&Path>,
) -> Result<(), CliError> {
    let dict_path = require(args.dict, cfg.dict.clone(), "dict")?;
    let corpus_path = require(args.corpus, cfg.corpus.clone(), "corpus")?;
    let model_paths = require(args.models, cfg.models.clone(), "models")?;
    if model_paths.is_empty() {
        return Err(CliError::usage("--models needs at least one model file"));
    }
    let min_count = resolve(args.min_count, cfg.min_count, 50);
    let top_k = resolve(args.top_k, cfg.top_k, 50);
    let basis: ThresholdBasis = parse_as(
        resolve(
            args.threshold_basis,
            cfg.threshold_basis.clone(),
            "per-variant".into(),
        ),
        "threshold-basis",
    )?;
    let split: SplitSide = parse_as(
        resolve(args.split, cfg.split.clone(), "test".into()),
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
    let report_base = require(args.report, cfg.report.clone(), "report")?;
    let strict = args.strict || cfg.strict.unwrap_or(false);

    let dict_report = parse_dictionary(open(&dict_path)?, policy(strict))?;
    report_issues(&dict_path, &dict_report.issues);
    let pairs = extract_homographs(&dict_report.items);
    eprintln!("extracted {} candidate homograph group(s)", pairs.len());

    let corpus_report = parse_corpus(open(&corpus_path)?, policy(strict))?;
    report_issues(&corpus_path, &corpus_report.issues);
    // frequency thresholding counts over the whole corpus
    let pairs = threshold_homographs(pairs, &corpus_report.items, min_count, top_k, basis);
    if pairs.is_empty() {
        eprintln!("warning: no homograph pair clears --min-count {min_count}; empty report");
    } else {
        eprintln!("{} pair(s) qualify", pairs.len());
    }

    let split_cfg = SplitConfig {
        train_fraction,
        seed,
        ..SplitConfig::default()
    };
    let scored_corpus = match split {
        SplitSide::All => corpus_report.items,
        SplitSide::Train => split_corpus(corpus_report.items, &split_cfg).0,
        SplitSide::Test => split_corpus(corpus_report.items, &split_cfg).1,
    };

    let loaded: Vec<(String, _, _)> = model_paths
        .iter()
        .map(|path| {
            let (params, meta) = modelio::load(path)?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            Ok((name, params, meta))
        })
        .collect::<Result<_, CliError>>()?;
    let models: Vec<ScoredModel> = loaded
        .iter()
        .map(|(name, params, meta)| ScoredModel {
            name: name.clone(),
            params,
            mode: meta.model_tag,
            decode,
        })
        .collect();

    let reports = score_homographs(&models, &pairs, &scored_corpus);
    for report in &reports {
        let tsv_path = report_path(&report_base, &report.model, "tsv");
        let json_path = report_path(&report_base, &report.model, "json");
        fs::write(&tsv_path, report.to_tsv())
            .map_err(|e| CliError::Usage(format!("{}: {e}", tsv_path.display())))?;
        fs::write(&json_path, serde_json::to_string_pretty(report).unwrap())
            .map_err(|e| CliError::Usage(format!("{}: {e}", json_path.display())))?;
        let overall = if report.overall.total == 0 {
            "n/a".to_string()
        } else {
            format!("{:.4}", report.overall.accuracy())
        };
        println!(
            "{} ({}): {} occurrence(s), accuracy {}, micro-average {}",
            report.model,
            report.mode,
            report.overall.total,
            overall,
            report
                .buckets
                .micro_average()
                .map(|m| format!("{m:.4}"))
                .unwrap_or_else(|| "n/a".into()),
        );
        println!("  reports: {} {}", tsv_path.display(), json_path.display());
    }

    let settings = HomographsSettings {
        dict: dict_path,
        corpus: corpus_path,
        models: model_paths,
        min_count,
        top_k,
        threshold_basis: match basis {
            ThresholdBasis::PerVariant => "per-variant".into(),
            ThresholdBasis::Total => "total".into(),
        },
        split: split.name().into(),
        seed,
        train_fraction: train_fraction.to_string(),
        decode: decode_name(decode),
        report: report_base.clone(),
        strict,
    };
    let manifest = serde_json::json!({
        "command": "homographs",
        "settings": settings,
        "qualifying-pairs": pairs.len(),
    });
    let default_manifest = report_base.with_extension("manifest.json");
    emit_manifest(&manifest, manifest_path, Some(&default_manifest))
}

fn report_path(base: &Path, model: &str, ext: &str) -> PathBuf {
    let stem = base
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    base.with_file_name(format!("{stem}.{model}.{ext}"))
}
