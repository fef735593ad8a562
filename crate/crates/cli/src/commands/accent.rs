use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use accentor::dataset::{augment_context, Mode};
use accentor::textcore::TextError;
use accentor::encoder::{constrained_argmax, encode, DecodeMode};
use accentor::nn::ModelParams;
use accentor::textcore::{count_syllables, normalize, yo_override, Alphabet, STRESS_MARK};
use accentor::{modelio, StressedWord};

use crate::commands::train::decode_name;
use crate::settings::{emit_manifest, parse_as, require, resolve, CliError, ConfigFile};

#[derive(Args, Debug)]
pub struct AccentArgs {
    /// Trained model file.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Use the previous word as context: auto (from the model tag), on, off.
    #[arg(long)]
    context: Option<String>,
    /// Stress a lone ё without consulting the model: on (default) or off.
    #[arg(long = "yo-rule")]
    yo_rule: Option<String>,
    /// Stress single-vowel words without the model: on (default) or off.
    #[arg(long)]
    mono: Option<String>,
    /// constrained (default) or raw.
    #[arg(long)]
    decode: Option<String>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct AccentSettings {
    model: PathBuf,
    context: String,
    yo_rule: String,
    mono: String,
    decode: String,
}

fn on_off(value: &str, flag: &str) -> Result<bool, CliError> {
    match value {
        "on" => Ok(true),
        "off" => Ok(false),
        other => Err(CliError::Usage(format!(
            "--{flag}: expected on or off, got {other:?}"
        ))),
    }
}

pub fn run(args: AccentArgs, cfg: &ConfigFile, manifest_path: Option<&Path>) -> Result<(), CliError> {
    let model_path = require(args.model, cfg.model.clone(), "model")?;
    let (params, meta) = modelio::load(&model_path)?;
    let context_raw = resolve(args.context, cfg.context.clone(), "auto".into());
    let context = match context_raw.as_str() {
        "auto" => meta.model_tag == Mode::Cdm,
        other => on_off(other, "context")?,
    };
    let yo_rule = on_off(
        &resolve(args.yo_rule, cfg.yo_rule.clone(), "on".into()),
        "yo-rule",
    )?;
    let mono = on_off(&resolve(args.mono, cfg.mono.clone(), "on".into()), "mono")?;
    let decode: DecodeMode = parse_as(
        resolve(args.decode, cfg.decode.clone(), "constrained".into()),
        "decode",
    )?;
    if context && params.cfg.channels < Alphabet::CHANNELS {
        return Err(CliError::usage(
            "--context on needs a model with a separator channel (34 channels)",
        ));
    }

    let stdin = io::stdin();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut line = String::new();
    let mut reader = stdin.lock();
    let mut lineno = 0usize;
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        lineno += 1;
        let accented = accent_line(&line, &params, context, yo_rule, mono, decode, lineno);
        out.write_all(accented.as_bytes())?;
    }
    out.flush()?;

    let settings = AccentSettings {
        model: model_path,
        context: if context { "on" } else { "off" }.into(),
        yo_rule: if yo_rule { "on" } else { "off" }.into(),
        mono: if mono { "on" } else { "off" }.into(),
        decode: decode_name(decode),
    };
    let manifest = serde_json::json!({
        "command": "accent",
        "settings": settings,
    });
    emit_manifest(&manifest, manifest_path, None)
}

/// Accent every alphabetic token of one line; everything else (including
/// the line terminator) passes through verbatim, so stripping the marks
/// recovers the input exactly.
fn accent_line(
    line: &str,
    params: &ModelParams<f32>,
    context: bool,
    yo_rule: bool,
    mono: bool,
    decode: DecodeMode,
    lineno: usize,
) -> String {
    let mut out = String::with_capacity(line.len() + 8);
    let mut prev_word: Option<String> = None;
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let is_letter = |c: char| c.to_lowercase().all(Alphabet::is_letter);
        if !is_letter(chars[i]) {
            out.push(chars[i]);
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && is_letter(chars[i]) {
            i += 1;
        }
        let token: String = chars[start..i].iter().collect();
        let normalized = normalize(&token).expect("run characters are alphabet letters");
        let prev = if context { prev_word.as_deref() } else { None };
        match stress_token(&normalized, prev, params, yo_rule, mono, decode) {
            Ok(Some(idx)) => {
                for (k, ch) in token.chars().enumerate() {
                    out.push(ch);
                    if k == idx {
                        out.push(STRESS_MARK);
                    }
                }
            }
            Ok(None) => out.push_str(&token),
            Err(reason) => {
                eprintln!("warning: line {lineno}: token {token:?} left unaccented: {reason}");
                out.push_str(&token);
            }
        }
        prev_word = Some(normalized);
    }
    out
}

/// Stress position for one normalized token, or `None` for tokens that
/// cannot carry stress (no vowel). `Err` carries a diagnostic for tokens
/// the model cannot handle.
fn stress_token(
    word: &str,
    prev: Option<&str>,
    params: &ModelParams<f32>,
    yo_rule: bool,
    mono: bool,
    decode: DecodeMode,
) -> Result<Option<usize>, String> {
    if yo_rule {
        if let Some(idx) = yo_override(word) {
            return Ok(Some(idx));
        }
    }
    let syllables = count_syllables(word);
    if syllables == 0 {
        return Ok(None);
    }
    let only_vowel = word
        .chars()
        .position(Alphabet::is_vowel)
        .expect("at least one vowel");
    if syllables == 1 && mono {
        return Ok(Some(only_vowel));
    }

    // any vowel position works as a placeholder target; only the input
    // string matters for inference
    let max_len = params.cfg.max_len;
    let placeholder = StressedWord::new(word, only_vowel)
        .map_err(|e: TextError| e.to_string())?;
    let instance =
        augment_context(prev, &placeholder, max_len).map_err(|e| e.to_string())?;
    let word_start = instance.len() - word.chars().count();

    let (matrix, _) = encode(&instance, &params.cfg).map_err(|e| e.to_string())?;
    let probs = params
        .infer(&matrix, matrix.len())
        .map_err(|e| e.to_string())?;
    let predicted = match decode {
        DecodeMode::Constrained => {
            let legal = instance
                .input()
                .chars()
                .enumerate()
                .filter(|(k, c)| *k >= word_start && Alphabet::is_vowel(*c))
                .map(|(k, _)| k);
            constrained_argmax(&probs, legal)
        }
        DecodeMode::Raw => constrained_argmax(&probs, 0..probs.len()).filter(|&k| {
            k >= word_start
                && instance
                    .input()
                    .chars()
                    .nth(k)
                    .is_some_and(Alphabet::is_vowel)
        }),
    };
    match predicted {
        Some(k) => Ok(Some(k - word_start)),
        None => Err("no usable stress position predicted".into()),
    }
}
