//! Dictionary and corpus ingestion, reproducible train/test splits, and
//! training-instance construction.
//!
//! Splits are assigned by a keyed hash rather than a shuffle: the same input
//! and seed always produce the same partition, and for the dictionary all
//! forms of a lexeme travel together because the lemma alone is hashed.
//!
//! Context augmentation follows the left-context rule: a previous word
//! shorter than three letters is prepended whole, otherwise its last three
//! letters are used, joined with `_` (`те` + `облака́` gives `те_облака́`,
//! `белого` + `о́блака` gives `ого_о́блака`).

use std::collections::BTreeSet;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textcore::{
    self, count_syllables, normalize, parse_stress_mark, yo_override, Alphabet, StressedWord,
    TextError, STRESS_MARK,
};

/// Which of the three training regimes an instance belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Dict,
    Cfm,
    Cdm,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Dict => "dict",
            Mode::Cfm => "cfm",
            Mode::Cdm => "cdm",
        };
        f.write_str(s)
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dict" => Ok(Mode::Dict),
            "cfm" => Ok(Mode::Cfm),
            "cdm" => Ok(Mode::Cdm),
            other => Err(format!("unknown mode {other:?} (expected dict, cfm or cdm)")),
        }
    }
}

/// A dictionary headword with its stressed inflected forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexemeEntry {
    lemma: String,
    forms: Vec<StressedWord>,
}

impl LexemeEntry {
    pub fn new(lemma: impl Into<String>, forms: Vec<StressedWord>) -> Result<Self, DatasetError> {
        let lemma = lemma.into();
        if lemma.is_empty() {
            return Err(DatasetError::InvalidConfig("lexeme lemma is empty".into()));
        }
        if forms.is_empty() {
            return Err(DatasetError::InvalidConfig(format!(
                "lexeme {lemma:?} has no forms"
            )));
        }
        Ok(LexemeEntry { lemma, forms })
    }

    pub fn lemma(&self) -> &str {
        &self.lemma
    }

    pub fn forms(&self) -> &[StressedWord] {
        &self.forms
    }
}

/// One line of corpus: an ordered sequence of stressed tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusUtterance {
    tokens: Vec<StressedWord>,
}

impl CorpusUtterance {
    pub fn new(tokens: Vec<StressedWord>) -> Result<Self, DatasetError> {
        if tokens.is_empty() {
            return Err(DatasetError::InvalidConfig("utterance has no tokens".into()));
        }
        Ok(CorpusUtterance { tokens })
    }

    pub fn tokens(&self) -> &[StressedWord] {
        &self.tokens
    }
}

/// A model input string with its target stress position.
///
/// For CDM instances the input carries the context prefix and separator, and
/// the target is shifted accordingly; the character at `target` is always
/// the same vowel the bare word is stressed on.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TrainInstance {
    input: String,
    target: usize,
    mode: Mode,
}

impl TrainInstance {
    pub fn new(
        input: impl Into<String>,
        target: usize,
        mode: Mode,
        max_len: usize,
    ) -> Result<Self, DatasetError> {
        let input: String = input.into();
        let len = input.chars().count();
        if len == 0 {
            return Err(DatasetError::InvalidConfig("instance input is empty".into()));
        }
        if len > max_len {
            return Err(DatasetError::InstanceTooLong { input, len, max_len });
        }
        for ch in input.chars() {
            if Alphabet::index_of(ch).is_none() {
                return Err(DatasetError::InvalidConfig(format!(
                    "instance input {input:?} contains unrepresentable character {ch:?}"
                )));
            }
        }
        match input.chars().nth(target) {
            Some(c) if Alphabet::is_vowel(c) => Ok(TrainInstance { input, target, mode }),
            _ => Err(DatasetError::TargetNotVowel { input, target }),
        }
    }

    pub fn input(&self) -> &str {
        &self.input
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Length in characters.
    pub fn len(&self) -> usize {
        self.input.chars().count()
    }

    pub fn is_empty(&self) -> bool {
        self.input.is_empty()
    }

    /// The bare word with any context prefix removed.
    pub fn word_part(&self) -> &str {
        match self.input.rfind(Alphabet::SEPARATOR) {
            Some(byte_pos) => &self.input[byte_pos + Alphabet::SEPARATOR.len_utf8()..],
            None => &self.input,
        }
    }

    /// Syllables of the bare word; the context prefix never counts.
    pub fn word_syllables(&self) -> usize {
        count_syllables(self.word_part())
    }
}

/// An exact fraction, kept rational so split assignment has no rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    num: u64,
    den: u64,
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Result<Self, DatasetError> {
        if num == 0 || den == 0 || num >= den || den > u32::MAX as u64 {
            return Err(DatasetError::InvalidConfig(format!(
                "fraction {num}/{den} must satisfy 0 < num < den <= 2^32"
            )));
        }
        let g = gcd(num, den);
        Ok(Fraction {
            num: num / g,
            den: den / g,
        })
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// True iff `hash / 2^64 < num / den`, computed exactly in integers.
    fn admits(&self, hash: u64) -> bool {
        (hash as u128) * (self.den as u128) < (self.num as u128) << 64
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Fraction {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |s: &str| DatasetError::InvalidConfig(format!("cannot parse fraction {s:?}"));
        if let Some((a, b)) = s.split_once('/') {
            let num: u64 = a.trim().parse().map_err(|_| bad(s))?;
            let den: u64 = b.trim().parse().map_err(|_| bad(s))?;
            return Fraction::new(num, den);
        }
        // decimal form, e.g. "0.05"
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || frac.len() > 9 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad(s));
            }
            let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad(s))? };
            let scale = 10u64.pow(frac.len() as u32);
            let num = int * scale + frac.parse::<u64>().map_err(|_| bad(s))?;
            return Fraction::new(num, scale);
        }
        Err(bad(s))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// How a dataset is partitioned. The seed keys every hash, so one config
/// fully determines the split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub train_fraction: Fraction,
    pub dev_fraction: Fraction,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train_fraction: Fraction::new(2, 3).unwrap(),
            dev_fraction: Fraction::new(1, 20).unwrap(),
            seed: 0,
        }
    }
}

impl SplitConfig {
    pub fn with_seed(seed: u64) -> Self {
        SplitConfig {
            seed,
            ..SplitConfig::default()
        }
    }
}

// Salts keep the dictionary, corpus and dev assignments statistically
// independent even under one seed.
const DICT_SALT: u64 = 0x64696374;
const CORPUS_SALT: u64 = 0x636f7270;
const DEV_SALT: u64 = 0x64657621;

use crate::splitmix64;

/// FNV-1a over the key bytes with the seed folded in, finished with a
/// splitmix64 avalanche so the high bits are uniform enough for thresholding.
fn keyed_hash(seed: u64, salt: u64, bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ splitmix64(seed ^ salt);
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(h)
}

/// Partition lexemes 2:1 (by default) such that every form of a lemma lands
/// on one side. Deterministic in `(entries, cfg.seed)`.
pub fn split_dictionary(
    entries: Vec<LexemeEntry>,
    cfg: &SplitConfig,
) -> (Vec<LexemeEntry>, Vec<LexemeEntry>) {
    entries.into_iter().partition(|e| {
        cfg.train_fraction
            .admits(keyed_hash(cfg.seed, DICT_SALT, e.lemma().as_bytes()))
    })
}

/// Partition whole utterances by a hash of their content and position.
pub fn split_corpus(
    utterances: Vec<CorpusUtterance>,
    cfg: &SplitConfig,
) -> (Vec<CorpusUtterance>, Vec<CorpusUtterance>) {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (index, utt) in utterances.into_iter().enumerate() {
        let mut key = Vec::new();
        key.extend_from_slice(&(index as u64).to_le_bytes());
        for tok in utt.tokens() {
            key.extend_from_slice(textcore::format_stress_mark(tok).as_bytes());
            key.push(b' ');
        }
        if cfg.train_fraction.admits(keyed_hash(cfg.seed, CORPUS_SALT, &key)) {
            train.push(utt);
        } else {
            test.push(utt);
        }
    }
    (train, test)
}

/// Carve the dev set out of a training instance list, again by keyed hash so
/// the carve is reproducible without storing it.
pub fn carve_dev(
    instances: Vec<TrainInstance>,
    cfg: &SplitConfig,
) -> (Vec<TrainInstance>, Vec<TrainInstance>) {
    instances.into_iter().partition(|inst| {
        let mut key = inst.input().as_bytes().to_vec();
        key.push(0);
        key.extend_from_slice(&(inst.target() as u64).to_le_bytes());
        !cfg.dev_fraction.admits(keyed_hash(cfg.seed, DEV_SALT, &key))
    })
}

/// Whether a parse run aborts on the first bad line or skips and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParsePolicy {
    Strict,
    #[default]
    Lenient,
}

/// What went wrong on one line.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LineError {
    #[error(transparent)]
    Text(#[from] TextError),
    #[error("expected `lemma<TAB>form1 form2 ...`")]
    MissingTab,
    #[error("lexeme has no forms")]
    NoForms,
    #[error("expected `input<TAB>target_index`")]
    BadInstanceLine,
}

/// A skipped-or-fatal parse problem, located by line (1-based) and token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseIssue {
    pub line: usize,
    pub token: Option<String>,
    pub error: LineError,
}

impl fmt::Display for ParseIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.token {
            Some(tok) => write!(f, "line {}: token {:?}: {}", self.line, tok, self.error),
            None => write!(f, "line {}: {}", self.line, self.error),
        }
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{0}")]
    Parse(ParseIssue),
    #[error("instance {input:?} is {len} characters long, over the limit of {max_len}")]
    InstanceTooLong {
        input: String,
        len: usize,
        max_len: usize,
    },
    #[error("target {target} is not a vowel position of {input:?}")]
    TargetNotVowel { input: String, target: usize },
    #[error("{0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Parsed file plus whatever lenient mode skipped.
#[derive(Debug)]
pub struct ParseReport<T> {
    pub items: Vec<T>,
    pub issues: Vec<ParseIssue>,
}

impl<T> Default for ParseReport<T> {
    fn default() -> Self {
        ParseReport {
            items: Vec::new(),
            issues: Vec::new(),
        }
    }
}

fn report_issue<T>(
    policy: ParsePolicy,
    report: &mut ParseReport<T>,
    issue: ParseIssue,
) -> Result<(), DatasetError> {
    match policy {
        ParsePolicy::Strict => Err(DatasetError::Parse(issue)),
        ParsePolicy::Lenient => {
            report.issues.push(issue);
            Ok(())
        }
    }
}

/// Parse the dictionary format: one `lemma<TAB>form1 form2 ...` per line,
/// forms carrying U+0301 marks. Blank lines are ignored.
pub fn parse_dictionary(
    reader: impl BufRead,
    policy: ParsePolicy,
) -> Result<ParseReport<LexemeEntry>, DatasetError> {
    let mut report = ParseReport::default();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let Some((lemma_raw, forms_raw)) = line.split_once('\t') else {
            report_issue(policy, &mut report, ParseIssue {
                line: lineno,
                token: None,
                error: LineError::MissingTab,
            })?;
            continue;
        };
        let lemma = match normalize(lemma_raw) {
            Ok(l) => l,
            Err(e) => {
                report_issue(policy, &mut report, ParseIssue {
                    line: lineno,
                    token: Some(lemma_raw.to_string()),
                    error: e.into(),
                })?;
                continue;
            }
        };
        let mut forms = Vec::new();
        let mut line_ok = true;
        for tok in forms_raw.split_whitespace() {
            match parse_stress_mark(tok) {
                Ok(w) => forms.push(w),
                Err(e) => {
                    report_issue(policy, &mut report, ParseIssue {
                        line: lineno,
                        token: Some(tok.to_string()),
                        error: e.into(),
                    })?;
                    line_ok = false;
                }
            }
        }
        if forms.is_empty() {
            if line_ok {
                report_issue(policy, &mut report, ParseIssue {
                    line: lineno,
                    token: None,
                    error: LineError::NoForms,
                })?;
            }
            continue;
        }
        report.items.push(LexemeEntry { lemma, forms });
    }
    Ok(report)
}

/// Parse one stressed corpus token. Tokens without an acute are still
/// accepted when the stress is forced: a single `ё`, or a single vowel.
pub fn parse_corpus_token(token: &str) -> Result<StressedWord, TextError> {
    if token.chars().any(|c| c == STRESS_MARK) {
        return parse_stress_mark(token);
    }
    let norm = normalize(token)?;
    if let Some(yo) = yo_override(&norm) {
        return StressedWord::new(norm, yo);
    }
    let vowels: Vec<usize> = norm
        .chars()
        .enumerate()
        .filter(|(_, c)| Alphabet::is_vowel(*c))
        .map(|(i, _)| i)
        .collect();
    match vowels.as_slice() {
        [] => Err(TextError::NoVowel { word: norm }),
        [only] => StressedWord::new(norm, *only),
        _ => Err(TextError::NoStressMark),
    }
}

/// Parse the corpus format: one utterance per line, space-separated stressed
/// tokens. Blank lines and `#` comments are ignored. In lenient mode an
/// unparseable token is skipped with a counted issue and the rest of the
/// utterance survives.
pub fn parse_corpus(
    reader: impl BufRead,
    policy: ParsePolicy,
) -> Result<ParseReport<CorpusUtterance>, DatasetError> {
    let mut report = ParseReport::default();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let mut tokens = Vec::new();
        for tok in line.split_whitespace() {
            match parse_corpus_token(tok) {
                Ok(w) => tokens.push(w),
                Err(e) => {
                    report_issue(policy, &mut report, ParseIssue {
                        line: lineno,
                        token: Some(tok.to_string()),
                        error: e.into(),
                    })?;
                }
            }
        }
        if !tokens.is_empty() {
            report.items.push(CorpusUtterance { tokens });
        }
    }
    Ok(report)
}

/// Parse the alternate interop format: `input<TAB>target_index` per line.
pub fn parse_instances(
    reader: impl BufRead,
    mode: Mode,
    max_len: usize,
    policy: ParsePolicy,
) -> Result<ParseReport<TrainInstance>, DatasetError> {
    let mut report = ParseReport::default();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let parsed = line
            .split_once('\t')
            .and_then(|(input, idx)| idx.trim().parse::<usize>().ok().map(|t| (input, t)));
        let Some((input, target)) = parsed else {
            report_issue(policy, &mut report, ParseIssue {
                line: lineno,
                token: None,
                error: LineError::BadInstanceLine,
            })?;
            continue;
        };
        match TrainInstance::new(input, target, mode, max_len) {
            Ok(inst) => report.items.push(inst),
            Err(_) => {
                report_issue(policy, &mut report, ParseIssue {
                    line: lineno,
                    token: Some(input.to_string()),
                    error: LineError::BadInstanceLine,
                })?;
            }
        }
    }
    Ok(report)
}

/// Write instances back out in the alternate format.
pub fn format_instances(instances: &[TrainInstance]) -> String {
    let mut out = String::new();
    for inst in instances {
        out.push_str(inst.input());
        out.push('\t');
        out.push_str(&inst.target().to_string());
        out.push('\n');
    }
    out
}

/// Build a CDM instance from a word and its (optional) left neighbour.
pub fn augment_context(
    prev: Option<&str>,
    current: &StressedWord,
    max_len: usize,
) -> Result<TrainInstance, DatasetError> {
    let prev = prev.filter(|p| !p.is_empty());
    match prev {
        None => TrainInstance::new(current.surface(), current.stress(), Mode::Cdm, max_len),
        Some(p) => {
            let chars: Vec<char> = p.chars().collect();
            let prefix: String = if chars.len() < 3 {
                chars.iter().collect()
            } else {
                chars[chars.len() - 3..].iter().collect()
            };
            let prefix_len = prefix.chars().count();
            let mut input = prefix;
            input.push(Alphabet::SEPARATOR);
            input.push_str(current.surface());
            let target = current.stress() + prefix_len + 1;
            TrainInstance::new(input, target, Mode::Cdm, max_len)
        }
    }
}

/// What instances are built from.
pub enum InstanceSource<'a> {
    Dictionary(&'a [LexemeEntry]),
    Corpus(&'a [CorpusUtterance]),
}

/// Deduplicated instances plus pipeline counters.
#[derive(Debug)]
pub struct InstanceBuild {
    pub instances: Vec<TrainInstance>,
    pub duplicates_removed: u64,
    pub too_long: u64,
}

/// Turn a data source into the unique, sorted instance list for a mode.
///
/// Dict and CFM instances are bare wordforms; CDM threads the context rule
/// through each utterance. Duplicate `(input, target)` pairs collapse to one
/// instance, and instances longer than `max_len` are dropped and counted.
pub fn build_instances(
    source: InstanceSource<'_>,
    mode: Mode,
    max_len: usize,
) -> Result<InstanceBuild, DatasetError> {
    let per_unit: Vec<Vec<Result<TrainInstance, DatasetError>>> = match (source, mode) {
        (InstanceSource::Dictionary(entries), Mode::Dict) => entries
            .par_iter()
            .map(|entry| {
                entry
                    .forms()
                    .iter()
                    .map(|w| TrainInstance::new(w.surface(), w.stress(), Mode::Dict, max_len))
                    .collect()
            })
            .collect(),
        (InstanceSource::Corpus(utterances), Mode::Cfm) => utterances
            .par_iter()
            .map(|utt| {
                utt.tokens()
                    .iter()
                    .map(|w| TrainInstance::new(w.surface(), w.stress(), Mode::Cfm, max_len))
                    .collect()
            })
            .collect(),
        (InstanceSource::Corpus(utterances), Mode::Cdm) => utterances
            .par_iter()
            .map(|utt| {
                let mut out = Vec::with_capacity(utt.tokens().len());
                let mut prev: Option<&str> = None;
                for tok in utt.tokens() {
                    out.push(augment_context(prev, tok, max_len));
                    prev = Some(tok.surface());
                }
                out
            })
            .collect(),
        (InstanceSource::Dictionary(_), _) => {
            return Err(DatasetError::InvalidConfig(format!(
                "mode {mode} needs a corpus source; the dictionary only feeds dict mode"
            )))
        }
        (InstanceSource::Corpus(_), Mode::Dict) => {
            return Err(DatasetError::InvalidConfig(
                "dict mode needs a dictionary source".into(),
            ))
        }
    };

    let mut too_long = 0u64;
    let mut instances = Vec::new();
    for unit in per_unit {
        for res in unit {
            match res {
                Ok(inst) => instances.push(inst),
                Err(DatasetError::InstanceTooLong { .. }) => too_long += 1,
                Err(e) => return Err(e),
            }
        }
    }

    let before = instances.len();
    instances.sort_unstable();
    instances.dedup();
    let duplicates_removed = (before - instances.len()) as u64;
    Ok(InstanceBuild {
        instances,
        duplicates_removed,
        too_long,
    })
}

/// Stable content digest of an instance list, recorded in run manifests.
pub fn instances_digest(instances: &[TrainInstance]) -> String {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    let mut mix = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    mix(&(instances.len() as u64).to_le_bytes());
    for inst in instances {
        mix(inst.input().as_bytes());
        mix(&[0]);
        mix(&(inst.target() as u64).to_le_bytes());
    }
    format!("{:016x}", splitmix64(h))
}

/// Distinct lemma set, used by split soundness checks.
pub fn lemma_set(entries: &[LexemeEntry]) -> BTreeSet<&str> {
    entries.iter().map(|e| e.lemma()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Cursor;

    const MAX_LEN: usize = 40;

    fn word(s: &str, stress: usize) -> StressedWord {
        StressedWord::new(s, stress).unwrap()
    }

    #[test]
    fn dictionary_line_parses() {
        let text = "слово\tсло́во слова́ слову́\nдом\tдо́м\n";
        let report = parse_dictionary(Cursor::new(text), ParsePolicy::Strict).unwrap();
        assert_eq!(report.items.len(), 2);
        assert_eq!(report.items[0].lemma(), "слово");
        assert_eq!(report.items[0].forms().len(), 3);
        assert_eq!(report.items[1].forms(), &[word("дом", 1)]);
    }

    #[test]
    fn dictionary_bad_form_is_located() {
        let text = "слово\tсло́во\nдом\tdom\n";
        let err = parse_dictionary(Cursor::new(text), ParsePolicy::Strict).unwrap_err();
        match err {
            DatasetError::Parse(issue) => {
                assert_eq!(issue.line, 2);
                assert_eq!(issue.token.as_deref(), Some("dom"));
                assert!(matches!(
                    issue.error,
                    LineError::Text(TextError::IllegalCharacter { .. })
                ));
            }
            other => panic!("unexpected error {other:?}"),
        }
        let report = parse_dictionary(
            Cursor::new("слово\tсло́во\nдом\tdom\n"),
            ParsePolicy::Lenient,
        )
        .unwrap();
        assert_eq!(report.items.len(), 1);
        assert_eq!(report.issues.len(), 1);
        assert_eq!(report.issues[0].line, 2);
    }

    #[test]
    fn corpus_line_parses() {
        let text = "те облака́ плыли́\n\nон узна́ет её\n";
        let report = parse_corpus(Cursor::new(text), ParsePolicy::Strict).unwrap();
        assert_eq!(report.items.len(), 2);
        assert_eq!(report.items[0].tokens().len(), 3);
        // "те" is monosyllabic, no acute needed
        assert_eq!(report.items[0].tokens()[0], word("те", 1));
        // "её" resolves through the ё rule
        assert_eq!(report.items[1].tokens()[2], word("её", 1));
    }

    #[test]
    fn corpus_comments_and_blanks_skipped() {
        let text = "# заголовок\n\nдо́м\n";
        let report = parse_corpus(Cursor::new(text), ParsePolicy::Strict).unwrap();
        assert_eq!(report.items.len(), 1);
    }

    #[test]
    fn corpus_lenient_skips_bad_token() {
        // "в" has no vowel and cannot carry stress
        let text = "он пошёл в до́м\n";
        let report = parse_corpus(Cursor::new(text), ParsePolicy::Lenient).unwrap();
        assert_eq!(report.items.len(), 1);
        assert_eq!(report.items[0].tokens().len(), 3);
        assert_eq!(report.issues.len(), 1);
        assert_eq!(report.issues[0].token.as_deref(), Some("в"));
        assert!(parse_corpus(Cursor::new(text), ParsePolicy::Strict).is_err());
    }

    fn entry(lemma: &str, forms: &[(&str, usize)]) -> LexemeEntry {
        LexemeEntry::new(
            lemma,
            forms.iter().map(|(s, i)| word(s, *i)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn dictionary_split_is_lemma_disjoint_and_deterministic() {
        let entries = vec![
            entry("слово", &[("слово", 2), ("слова", 4)]),
            entry("дом", &[("дом", 1)]),
            entry("рука", &[("рука", 3), ("руки", 1)]),
        ];
        let cfg = SplitConfig::with_seed(7);
        let (train, test) = split_dictionary(entries.clone(), &cfg);
        let (train2, test2) = split_dictionary(entries.clone(), &cfg);
        assert_eq!(train, train2);
        assert_eq!(test, test2);
        let train_lemmas = lemma_set(&train);
        let test_lemmas = lemma_set(&test);
        assert!(train_lemmas.is_disjoint(&test_lemmas));
        assert_eq!(
            train_lemmas.len() + test_lemmas.len(),
            lemma_set(&entries).len()
        );
    }

    /// Deterministic synthetic lemmas for share checks.
    fn synth_entries(n: usize) -> Vec<LexemeEntry> {
        let letters = Alphabet::LETTERS;
        (0..n)
            .map(|i| {
                let mut s = String::new();
                let mut x = splitmix64(i as u64 + 1);
                for _ in 0..6 {
                    s.push(letters[(x % 33) as usize]);
                    x = splitmix64(x);
                }
                s.push('а');
                let stress = s.chars().count() - 1;
                LexemeEntry::new(s.clone(), vec![word(&s, stress)]).unwrap()
            })
            .collect()
    }

    #[test]
    fn dictionary_split_share_is_close_to_fraction() {
        let entries = synth_entries(10_000);
        let cfg = SplitConfig::with_seed(42);
        let (train, test) = split_dictionary(entries, &cfg);
        let share = train.len() as f64 / (train.len() + test.len()) as f64;
        assert!((share - 2.0 / 3.0).abs() < 0.03, "share {share}");
    }

    #[test]
    fn corpus_split_is_deterministic_and_whole_utterance() {
        let utts: Vec<CorpusUtterance> = (0..100)
            .map(|i| {
                CorpusUtterance::new(vec![word("дом", 1), word(if i % 2 == 0 { "те" } else { "на" }, 1)])
                    .unwrap()
            })
            .collect();
        let cfg = SplitConfig::with_seed(3);
        let (a1, b1) = split_corpus(utts.clone(), &cfg);
        let (a2, b2) = split_corpus(utts.clone(), &cfg);
        assert_eq!(a1, a2);
        assert_eq!(b1, b2);
        assert_eq!(a1.len() + b1.len(), utts.len());
    }

    #[test]
    fn context_rule_matches_known_shapes() {
        let oblaka_final = word("облака", 5);
        let oblaka_initial = word("облака", 0);
        let inst = augment_context(Some("те"), &oblaka_final, MAX_LEN).unwrap();
        assert_eq!(inst.input(), "те_облака");
        assert_eq!(inst.target(), 8);
        let inst = augment_context(Some("белого"), &oblaka_initial, MAX_LEN).unwrap();
        assert_eq!(inst.input(), "ого_облака");
        assert_eq!(inst.target(), 4);
        let inst = augment_context(None, &word("дом", 1), MAX_LEN).unwrap();
        assert_eq!(inst.input(), "дом");
        assert_eq!(inst.target(), 1);
    }

    #[test]
    fn context_overflow_is_too_long() {
        let long: String = std::iter::repeat('а').take(39).collect();
        let w = word(&long, 0);
        let err = augment_context(Some("белого"), &w, MAX_LEN).unwrap_err();
        assert!(matches!(err, DatasetError::InstanceTooLong { len: 43, .. }));
    }

    #[test]
    fn dict_instances_one_per_form() {
        let entries = vec![entry("слово", &[("слово", 2), ("слова", 4), ("слову", 4)])];
        let build =
            build_instances(InstanceSource::Dictionary(&entries), Mode::Dict, MAX_LEN).unwrap();
        assert_eq!(build.instances.len(), 3);
        assert_eq!(build.duplicates_removed, 0);
    }

    #[test]
    fn duplicate_instances_collapse() {
        let utts = vec![
            CorpusUtterance::new(vec![word("те", 1), word("облака", 5)]).unwrap(),
            CorpusUtterance::new(vec![word("те", 1), word("облака", 5)]).unwrap(),
        ];
        let build = build_instances(InstanceSource::Corpus(&utts), Mode::Cdm, MAX_LEN).unwrap();
        // "те" (no prefix) and "те_облака" survive once each
        assert_eq!(build.instances.len(), 2);
        assert_eq!(build.duplicates_removed, 2);
    }

    #[test]
    fn distinct_contexts_survive_dedup() {
        let contexts = [("те", 1), ("эти", 0), ("белые", 1), ("серые", 1), ("чьи", 2)];
        let utts: Vec<CorpusUtterance> = contexts
            .iter()
            .map(|(c, s)| {
                CorpusUtterance::new(vec![word(c, *s), word("облака", 5)]).unwrap()
            })
            .collect();
        let build = build_instances(InstanceSource::Corpus(&utts), Mode::Cdm, MAX_LEN).unwrap();
        let oblaka: Vec<_> = build
            .instances
            .iter()
            .filter(|i| i.word_part() == "облака")
            .collect();
        assert_eq!(oblaka.len(), 5);
    }

    #[test]
    fn mode_source_mismatch_rejected() {
        let entries = vec![entry("дом", &[("дом", 1)])];
        assert!(build_instances(InstanceSource::Dictionary(&entries), Mode::Cdm, MAX_LEN).is_err());
        let utts = vec![CorpusUtterance::new(vec![word("дом", 1)]).unwrap()];
        assert!(build_instances(InstanceSource::Corpus(&utts), Mode::Dict, MAX_LEN).is_err());
    }

    #[test]
    fn instance_rejects_consonant_target_and_overflow() {
        assert!(matches!(
            TrainInstance::new("дом", 0, Mode::Dict, MAX_LEN),
            Err(DatasetError::TargetNotVowel { .. })
        ));
        let long: String = std::iter::repeat('а').take(41).collect();
        assert!(matches!(
            TrainInstance::new(long, 0, Mode::Dict, MAX_LEN),
            Err(DatasetError::InstanceTooLong { .. })
        ));
    }

    #[test]
    fn alternate_format_round_trips() {
        let insts = vec![
            TrainInstance::new("те_облака", 8, Mode::Cdm, MAX_LEN).unwrap(),
            TrainInstance::new("дом", 1, Mode::Cdm, MAX_LEN).unwrap(),
        ];
        let text = format_instances(&insts);
        let report =
            parse_instances(Cursor::new(text), Mode::Cdm, MAX_LEN, ParsePolicy::Strict).unwrap();
        assert_eq!(report.items, insts);
    }

    #[test]
    fn dev_carve_is_deterministic_partition() {
        let insts: Vec<TrainInstance> = synth_entries(2000)
            .iter()
            .map(|e| {
                let w = &e.forms()[0];
                TrainInstance::new(w.surface(), w.stress(), Mode::Dict, MAX_LEN).unwrap()
            })
            .collect();
        let cfg = SplitConfig::with_seed(11);
        let (train, dev) = carve_dev(insts.clone(), &cfg);
        let (train2, dev2) = carve_dev(insts.clone(), &cfg);
        assert_eq!(train, train2);
        assert_eq!(dev, dev2);
        assert_eq!(train.len() + dev.len(), insts.len());
        let share = dev.len() as f64 / insts.len() as f64;
        assert!((share - 0.05).abs() < 0.02, "dev share {share}");
    }

    #[test]
    fn fraction_parsing() {
        assert_eq!("2/3".parse::<Fraction>().unwrap(), Fraction::new(2, 3).unwrap());
        assert_eq!("0.05".parse::<Fraction>().unwrap(), Fraction::new(1, 20).unwrap());
        assert!("3/2".parse::<Fraction>().is_err());
        assert!("".parse::<Fraction>().is_err());
        assert!("0".parse::<Fraction>().is_err());
    }

    prop_compose! {
        fn arb_prev()(len in 1usize..10, seed in any::<u64>()) -> String {
            let mut x = splitmix64(seed);
            (0..len)
                .map(|_| {
                    x = splitmix64(x);
                    Alphabet::LETTERS[(x % 33) as usize]
                })
                .collect()
        }
    }

    proptest! {
        #[test]
        fn prefix_length_law(prev in arb_prev()) {
            let w = word("облака", 5);
            let inst = augment_context(Some(&prev), &w, MAX_LEN).unwrap();
            let sep = inst.input().chars().position(|c| c == '_').unwrap();
            let expected = prev.chars().count().min(3);
            prop_assert_eq!(sep, expected);
        }

        #[test]
        fn context_shift_preserves_stressed_vowel(prev in arb_prev()) {
            let w = word("вздрогнувшему", 4);
            let inst = augment_context(Some(&prev), &w, MAX_LEN).unwrap();
            let at_target = inst.input().chars().nth(inst.target()).unwrap();
            prop_assert_eq!(at_target, w.stressed_char());
        }
    }

    #[test]
    fn dedup_is_idempotent() {
        let utts = vec![
            CorpusUtterance::new(vec![word("те", 1), word("облака", 5), word("те", 1)]).unwrap(),
        ];
        let first = build_instances(InstanceSource::Corpus(&utts), Mode::Cfm, MAX_LEN).unwrap();
        let mut again = first.instances.clone();
        again.sort_unstable();
        again.dedup();
        assert_eq!(again, first.instances);
    }
}
