//! The evaluation protocol: accuracy bucketed by syllable count with its
//! micro-average, and the homograph analysis (extraction from the
//! dictionary, corpus-frequency thresholding, per-variant scoring).
//!
//! Reports serialize both as TSV (one row per bucket or variant) and as
//! JSON, mirroring the syllables / percent / "correct of total" layout.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dataset::{augment_context, CorpusUtterance, LexemeEntry, Mode, TrainInstance};
use crate::encoder::DecodeMode;
use crate::nn::ModelParams;
use crate::textcore::{format_stress_mark, yo_override, StressedWord};
use crate::trainer::{predict_all, EvalCounts};

/// Bucket index for a syllable count: 1..=9 keep their own row, everything
/// above collapses into the `10+` row.
pub fn bucket_index(syllables: usize) -> usize {
    syllables.min(10)
}

fn bucket_label(index: usize) -> String {
    if index >= 10 {
        "10+".to_string()
    } else {
        index.to_string()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub correct: u64,
    pub total: u64,
}

impl Counts {
    pub fn accuracy(&self) -> Option<f64> {
        (self.total > 0).then(|| self.correct as f64 / self.total as f64)
    }
}

/// Per-syllable-bucket accuracy. One-syllable words sit in their own row,
/// kept separate from the multi-syllable rows the reference tables start at.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SyllableBucketReport {
    rows: BTreeMap<usize, Counts>,
}

impl SyllableBucketReport {
    pub fn add(&mut self, syllables: usize, correct: bool) {
        let row = self.rows.entry(bucket_index(syllables)).or_default();
        row.total += 1;
        if correct {
            row.correct += 1;
        }
    }

    pub fn rows(&self) -> &BTreeMap<usize, Counts> {
        &self.rows
    }

    pub fn totals(&self) -> Counts {
        let mut out = Counts::default();
        for c in self.rows.values() {
            out.correct += c.correct;
            out.total += c.total;
        }
        out
    }

    /// Total correct over total instances across all rows; `None` when the
    /// report is empty (rendered as `n/a`).
    pub fn micro_average(&self) -> Option<f64> {
        self.totals().accuracy()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("syllables\taccuracy\tcorrect\ttotal\n");
        for (idx, c) in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                bucket_label(*idx),
                fmt_opt(c.accuracy()),
                c.correct,
                c.total
            ));
        }
        let t = self.totals();
        out.push_str(&format!(
            "micro-average\t{}\t{}\t{}\n",
            fmt_opt(self.micro_average()),
            t.correct,
            t.total
        ));
        out
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.3}"),
        None => "n/a".to_string(),
    }
}

#[derive(Debug, Serialize)]
struct BucketRow {
    syllables: String,
    correct: u64,
    total: u64,
    accuracy: Option<f64>,
}

impl Serialize for SyllableBucketReport {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let rows: Vec<BucketRow> = self
            .rows
            .iter()
            .map(|(idx, c)| BucketRow {
                syllables: bucket_label(*idx),
                correct: c.correct,
                total: c.total,
                accuracy: c.accuracy(),
            })
            .collect();
        let mut s = serializer.serialize_struct("SyllableBucketReport", 2)?;
        s.serialize_field("rows", &rows)?;
        s.serialize_field("micro_average", &self.micro_average())?;
        s.end()
    }
}

/// Bucket predictions by the syllable count of the bare word (context
/// prefixes never count). A missing prediction is an error.
pub fn bucket_accuracy(
    instances: &[TrainInstance],
    predictions: &[Option<usize>],
) -> SyllableBucketReport {
    assert_eq!(
        instances.len(),
        predictions.len(),
        "one prediction per instance"
    );
    let mut report = SyllableBucketReport::default();
    for (inst, pred) in instances.iter().zip(predictions) {
        report.add(inst.word_syllables(), *pred == Some(inst.target()));
    }
    report
}

/// A surface spelled identically under at least two stress positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomographPair {
    pub surface: String,
    pub variants: Vec<HomographVariant>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomographVariant {
    pub stress: usize,
    pub corpus_count: u64,
}

impl HomographPair {
    pub fn total_count(&self) -> u64 {
        self.variants.iter().map(|v| v.corpus_count).sum()
    }
}

/// Group all wordforms of all lexemes by surface and keep the groups with
/// two or more distinct stress positions, sorted by surface.
///
/// Surfaces whose stress the `ё` rule already pins down are not genuine
/// ambiguities and are skipped.
pub fn extract_homographs(entries: &[LexemeEntry]) -> Vec<HomographPair> {
    let mut by_surface: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for entry in entries {
        for form in entry.forms() {
            let stresses = by_surface.entry(form.surface()).or_default();
            if !stresses.contains(&form.stress()) {
                stresses.push(form.stress());
            }
        }
    }
    by_surface
        .into_iter()
        .filter(|(surface, stresses)| stresses.len() >= 2 && yo_override(surface).is_none())
        .map(|(surface, mut stresses)| {
            stresses.sort_unstable();
            HomographPair {
                surface: surface.to_string(),
                variants: stresses
                    .into_iter()
                    .map(|stress| HomographVariant {
                        stress,
                        corpus_count: 0,
                    })
                    .collect(),
            }
        })
        .collect()
}

/// Whether the frequency threshold applies to every variant or to the
/// group total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdBasis {
    #[default]
    PerVariant,
    Total,
}

impl std::str::FromStr for ThresholdBasis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "per-variant" => Ok(ThresholdBasis::PerVariant),
            "total" => Ok(ThresholdBasis::Total),
            other => Err(format!(
                "unknown threshold basis {other:?} (expected per-variant or total)"
            )),
        }
    }
}

/// Tally corpus occurrences per variant, keep the pairs clearing
/// `min_count`, order by total count (ties by surface) and cut to `top_k`.
pub fn threshold_homographs(
    pairs: Vec<HomographPair>,
    corpus: &[CorpusUtterance],
    min_count: u64,
    top_k: usize,
    basis: ThresholdBasis,
) -> Vec<HomographPair> {
    let mut index: BTreeMap<(String, usize), u64> = BTreeMap::new();
    for pair in &pairs {
        for v in &pair.variants {
            index.insert((pair.surface.clone(), v.stress), 0);
        }
    }
    for utt in corpus {
        for tok in utt.tokens() {
            if let Some(count) = index.get_mut(&(tok.surface().to_string(), tok.stress())) {
                *count += 1;
            }
        }
    }
    let mut kept: Vec<HomographPair> = pairs
        .into_iter()
        .map(|mut pair| {
            for v in &mut pair.variants {
                v.corpus_count = index[&(pair.surface.clone(), v.stress)];
            }
            pair
        })
        .filter(|pair| match basis {
            ThresholdBasis::PerVariant => {
                pair.variants.iter().all(|v| v.corpus_count >= min_count)
            }
            ThresholdBasis::Total => pair.total_count() >= min_count,
        })
        .collect();
    kept.sort_by(|a, b| {
        b.total_count()
            .cmp(&a.total_count())
            .then_with(|| a.surface.cmp(&b.surface))
    });
    kept.truncate(top_k);
    kept
}

/// A model entered into the homograph comparison.
pub struct ScoredModel<'a> {
    pub name: String,
    pub params: &'a ModelParams<f32>,
    pub mode: Mode,
    pub decode: DecodeMode,
}

#[derive(Debug, Clone, Serialize)]
pub struct VariantScore {
    pub stress: usize,
    pub stressed_form: String,
    pub occurrences: u64,
    pub correct: u64,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairScore {
    pub surface: String,
    pub variants: Vec<VariantScore>,
    /// Correct over all occurrences of every variant; `None` with no
    /// occurrences at all.
    pub aggregate: Option<f64>,
    pub total_occurrences: u64,
}

#[derive(Debug, Serialize)]
pub struct ModelHomographReport {
    pub model: String,
    pub mode: Mode,
    pub pairs: Vec<PairScore>,
    pub buckets: SyllableBucketReport,
    pub overall: EvalCounts,
}

impl ModelHomographReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(
            "surface\tstressed_form\toccurrences\taccuracy\tpair_aggregate\tpair_total\n",
        );
        for pair in &self.pairs {
            for v in &pair.variants {
                out.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\n",
                    pair.surface,
                    v.stressed_form,
                    v.occurrences,
                    fmt_opt(v.accuracy),
                    fmt_opt(pair.aggregate),
                    pair.total_occurrences,
                ));
            }
        }
        out
    }
}

/// One corpus occurrence of a homograph variant, ready for prediction.
struct Occurrence {
    pair_idx: usize,
    variant_idx: usize,
    syllables: usize,
    /// `None` when the augmented input did not fit `max_len`.
    instance: Option<TrainInstance>,
    gold: usize,
}

fn collect_occurrences(
    pairs: &[HomographPair],
    test_corpus: &[CorpusUtterance],
    mode: Mode,
    max_len: usize,
) -> Vec<Occurrence> {
    let surface_index: BTreeMap<&str, usize> = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| (p.surface.as_str(), i))
        .collect();
    let mut out = Vec::new();
    for utt in test_corpus {
        let mut prev: Option<&str> = None;
        for tok in utt.tokens() {
            if let Some(&pair_idx) = surface_index.get(tok.surface()) {
                let pair = &pairs[pair_idx];
                if let Some(variant_idx) =
                    pair.variants.iter().position(|v| v.stress == tok.stress())
                {
                    let instance = match mode {
                        Mode::Cdm => augment_context(prev, tok, max_len).ok(),
                        _ => {
                            TrainInstance::new(tok.surface(), tok.stress(), mode, max_len).ok()
                        }
                    };
                    let gold = instance
                        .as_ref()
                        .map(|i| i.target())
                        .unwrap_or(tok.stress());
                    out.push(Occurrence {
                        pair_idx,
                        variant_idx,
                        syllables: tok.syllables(),
                        instance,
                        gold,
                    });
                }
            }
            prev = Some(tok.surface());
        }
    }
    out
}

/// Score each model on every corpus occurrence of the thresholded pairs:
/// per-variant accuracy, per-pair aggregate, and a syllable-bucket summary
/// over all homograph instances.
pub fn score_homographs(
    models: &[ScoredModel<'_>],
    pairs: &[HomographPair],
    test_corpus: &[CorpusUtterance],
) -> Vec<ModelHomographReport> {
    models
        .iter()
        .map(|model| {
            let max_len = model.params.cfg.max_len;
            let occurrences =
                collect_occurrences(pairs, test_corpus, model.mode, max_len);
            let instances: Vec<TrainInstance> = occurrences
                .iter()
                .filter_map(|o| o.instance.clone())
                .collect();
            let predictions = predict_all(model.params, &instances, model.decode);

            let mut scores: Vec<Vec<(u64, u64)>> = pairs
                .iter()
                .map(|p| vec![(0u64, 0u64); p.variants.len()])
                .collect();
            let mut buckets = SyllableBucketReport::default();
            let mut overall = EvalCounts::default();
            let mut pred_iter = predictions.into_iter();
            for occ in &occurrences {
                let predicted = match &occ.instance {
                    Some(_) => pred_iter.next().expect("one prediction per instance"),
                    None => {
                        overall.too_long += 1;
                        None
                    }
                };
                let correct = predicted == Some(occ.gold);
                let cell = &mut scores[occ.pair_idx][occ.variant_idx];
                cell.1 += 1;
                if correct {
                    cell.0 += 1;
                }
                buckets.add(occ.syllables, correct);
                overall.total += 1;
                if correct {
                    overall.correct += 1;
                }
            }

            let pair_scores: Vec<PairScore> = pairs
                .iter()
                .zip(&scores)
                .map(|(pair, cells)| {
                    let variants: Vec<VariantScore> = pair
                        .variants
                        .iter()
                        .zip(cells)
                        .map(|(v, (correct, total))| VariantScore {
                            stress: v.stress,
                            stressed_form: format_stress_mark(
                                &StressedWord::new(pair.surface.clone(), v.stress)
                                    .expect("variant stress is a vowel position"),
                            ),
                            occurrences: *total,
                            correct: *correct,
                            accuracy: (*total > 0)
                                .then(|| *correct as f64 / *total as f64),
                        })
                        .collect();
                    let total: u64 = variants.iter().map(|v| v.occurrences).sum();
                    let correct: u64 = variants.iter().map(|v| v.correct).sum();
                    PairScore {
                        surface: pair.surface.clone(),
                        variants,
                        aggregate: (total > 0).then(|| correct as f64 / total as f64),
                        total_occurrences: total,
                    }
                })
                .collect();

            ModelHomographReport {
                model: model.name.clone(),
                mode: model.mode,
                pairs: pair_scores,
                buckets,
                overall,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{LexemeEntry, Mode};
    use crate::encoder::EncodingConfig;
    use crate::textcore::StressedWord;

    fn word(s: &str, stress: usize) -> StressedWord {
        StressedWord::new(s, stress).unwrap()
    }

    fn inst(input: &str, target: usize) -> TrainInstance {
        TrainInstance::new(input, target, Mode::Cfm, 40).unwrap()
    }

    #[test]
    fn bucket_accuracy_counts_by_syllables() {
        // three two-syllable words (2 correct), one three-syllable (correct)
        let instances = vec![
            inst("слово", 2),
            inst("слова", 4),
            inst("руки", 1),
            inst("облака", 5),
        ];
        let predictions = vec![Some(2), Some(4), Some(3), Some(5)];
        let report = bucket_accuracy(&instances, &predictions);
        assert_eq!(report.rows()[&2], Counts { correct: 2, total: 3 });
        assert_eq!(report.rows()[&3], Counts { correct: 1, total: 1 });
        assert_eq!(report.micro_average(), Some(0.75));
    }

    #[test]
    fn empty_report_has_no_micro_average() {
        let report = bucket_accuracy(&[], &[]);
        assert_eq!(report.micro_average(), None);
        assert!(report.to_tsv().contains("n/a"));
    }

    #[test]
    fn all_correct_gives_micro_one() {
        let instances = vec![inst("дом", 1), inst("облака", 5)];
        let predictions = vec![Some(1), Some(5)];
        let report = bucket_accuracy(&instances, &predictions);
        assert_eq!(report.micro_average(), Some(1.0));
    }

    #[test]
    fn context_prefix_does_not_change_bucket() {
        let cdm = TrainInstance::new("ого_облака", 4, Mode::Cdm, 40).unwrap();
        let report = bucket_accuracy(&[cdm], &[Some(4)]);
        // "облака" has 3 syllables even though "ого_облака" has 5 vowels
        assert_eq!(report.rows()[&3], Counts { correct: 1, total: 1 });
    }

    #[test]
    fn micro_average_matches_flat_recount() {
        let instances: Vec<TrainInstance> = (0..50)
            .map(|i| {
                if i % 2 == 0 {
                    inst("облака", 5)
                } else {
                    inst("вздрогнувшему", 4)
                }
            })
            .collect();
        let predictions: Vec<Option<usize>> = (0..50)
            .map(|i| if i % 3 == 0 { Some(5) } else { Some(2) })
            .collect();
        let report = bucket_accuracy(&instances, &predictions);
        let flat = instances
            .iter()
            .zip(&predictions)
            .filter(|(inst, p)| **p == Some(inst.target()))
            .count() as u64;
        assert_eq!(report.totals().correct, flat);
        assert_eq!(report.totals().total, 50);
    }

    fn homograph_dictionary() -> Vec<LexemeEntry> {
        vec![
            LexemeEntry::new("рука", vec![word("рука", 3), word("руки", 3)]).unwrap(),
            LexemeEntry::new("руки", vec![word("руки", 1)]).unwrap(),
            LexemeEntry::new("дорогой", vec![word("дорогой", 5)]).unwrap(),
            LexemeEntry::new("дорога", vec![word("дорогой", 3)]).unwrap(),
            LexemeEntry::new("дом", vec![word("дом", 1), word("дома", 1)]).unwrap(),
        ]
    }

    #[test]
    fn homographs_are_extracted_across_lexemes() {
        let pairs = extract_homographs(&homograph_dictionary());
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].surface, "дорогой");
        let stresses: Vec<usize> = pairs[0].variants.iter().map(|v| v.stress).collect();
        assert_eq!(stresses, vec![3, 5]);
        assert_eq!(pairs[1].surface, "руки");
        let stresses: Vec<usize> = pairs[1].variants.iter().map(|v| v.stress).collect();
        assert_eq!(stresses, vec![1, 3]);
    }

    #[test]
    fn single_variant_surfaces_are_excluded() {
        let pairs = extract_homographs(&homograph_dictionary());
        assert!(pairs.iter().all(|p| p.surface != "дом"));
        assert!(pairs.iter().all(|p| p.surface != "дома"));
    }

    #[test]
    fn yo_surfaces_are_not_ambiguous() {
        let entries = vec![
            LexemeEntry::new("поём", vec![word("поём", 2)]).unwrap(),
            LexemeEntry::new("поем", vec![word("поём", 1)]).unwrap(),
        ];
        assert!(extract_homographs(&entries).is_empty());
    }

    #[test]
    fn extraction_is_idempotent_over_its_own_output() {
        let pairs = extract_homographs(&homograph_dictionary());
        let rebuilt: Vec<LexemeEntry> = pairs
            .iter()
            .map(|p| {
                LexemeEntry::new(
                    p.surface.clone(),
                    p.variants
                        .iter()
                        .map(|v| word(&p.surface, v.stress))
                        .collect(),
                )
                .unwrap()
            })
            .collect();
        let again = extract_homographs(&rebuilt);
        assert_eq!(pairs, again);
    }

    fn corpus_with_counts(counts: &[(&str, usize, usize)]) -> Vec<CorpusUtterance> {
        let mut out = Vec::new();
        for (surface, stress, n) in counts {
            for _ in 0..*n {
                out.push(CorpusUtterance::new(vec![word(surface, *stress)]).unwrap());
            }
        }
        out
    }

    #[test]
    fn threshold_keeps_frequent_pairs() {
        let pairs = vec![HomographPair {
            surface: "слова".into(),
            variants: vec![
                HomographVariant { stress: 2, corpus_count: 0 },
                HomographVariant { stress: 4, corpus_count: 0 },
            ],
        }];
        let corpus = corpus_with_counts(&[("слова", 2, 984), ("слова", 4, 812)]);
        let kept = threshold_homographs(pairs, &corpus, 50, 50, ThresholdBasis::PerVariant);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].variants[0].corpus_count, 984);
        assert_eq!(kept[0].variants[1].corpus_count, 812);
    }

    #[test]
    fn threshold_drops_rare_variants() {
        let pairs = vec![HomographPair {
            surface: "слова".into(),
            variants: vec![
                HomographVariant { stress: 2, corpus_count: 0 },
                HomographVariant { stress: 4, corpus_count: 0 },
            ],
        }];
        let corpus = corpus_with_counts(&[("слова", 2, 500), ("слова", 4, 3)]);
        let kept = threshold_homographs(
            pairs.clone(),
            &corpus,
            50,
            50,
            ThresholdBasis::PerVariant,
        );
        assert!(kept.is_empty());
        // the total basis keeps it
        let kept = threshold_homographs(pairs, &corpus, 50, 50, ThresholdBasis::Total);
        assert_eq!(kept.len(), 1);
    }

    #[test]
    fn top_k_truncates_by_total_count() {
        let make_pair = |surface: &str| HomographPair {
            surface: surface.into(),
            variants: vec![
                HomographVariant { stress: 1, corpus_count: 0 },
                HomographVariant { stress: 3, corpus_count: 0 },
            ],
        };
        let pairs = vec![make_pair("мука"), make_pair("пора"), make_pair("руки")];
        let corpus = corpus_with_counts(&[
            ("мука", 1, 5),
            ("мука", 3, 5),
            ("пора", 1, 30),
            ("пора", 3, 20),
            ("руки", 1, 10),
            ("руки", 3, 10),
        ]);
        let kept = threshold_homographs(pairs, &corpus, 5, 2, ThresholdBasis::PerVariant);
        assert_eq!(kept.len(), 2);
        assert_eq!(kept[0].surface, "пора");
        assert_eq!(kept[1].surface, "руки");
    }

    #[test]
    fn aggregate_is_weighted_mean_of_variant_accuracies() {
        let pair = PairScore {
            surface: "слова".into(),
            variants: vec![
                VariantScore {
                    stress: 4,
                    stressed_form: "слова́".into(),
                    occurrences: 984,
                    correct: 857,
                    accuracy: Some(857.0 / 984.0),
                },
                VariantScore {
                    stress: 2,
                    stressed_form: "сло́ва".into(),
                    occurrences: 812,
                    correct: 580,
                    accuracy: Some(580.0 / 812.0),
                },
            ],
            aggregate: Some((857.0 + 580.0) / 1796.0),
            total_occurrences: 1796,
        };
        let agg = pair.aggregate.unwrap();
        assert!((agg - 0.80).abs() < 0.005, "aggregate {agg}");
        let accs: Vec<f64> = pair.variants.iter().filter_map(|v| v.accuracy).collect();
        let lo = accs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = accs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(agg >= lo && agg <= hi);
    }

    #[test]
    fn constant_model_scores_the_frequent_variant_pattern() {
        // zero weights: uniform output, constrained decode falls to the first
        // vowel, so the first-vowel variant scores 1.0 and the other 0.0
        let cfg = EncodingConfig::with_max_len(12);
        let mut params: ModelParams<f32> = ModelParams::init(4, 0.0, cfg, 0);
        for i in 0..crate::nn::BLOCK_NAMES.len() {
            for v in params.block_mut(i) {
                *v = 0.0;
            }
        }
        let pairs = vec![HomographPair {
            surface: "мука".into(),
            variants: vec![
                HomographVariant { stress: 1, corpus_count: 6 },
                HomographVariant { stress: 3, corpus_count: 4 },
            ],
        }];
        let corpus = corpus_with_counts(&[("мука", 1, 6), ("мука", 3, 4)]);
        let models = [ScoredModel {
            name: "constant".into(),
            params: &params,
            mode: Mode::Cfm,
            decode: DecodeMode::Constrained,
        }];
        let reports = score_homographs(&models, &pairs, &corpus);
        let pair = &reports[0].pairs[0];
        assert_eq!(pair.variants[0].accuracy, Some(1.0));
        assert_eq!(pair.variants[1].accuracy, Some(0.0));
        // aggregate equals the max-class frequency
        assert_eq!(pair.aggregate, Some(0.6));
    }

    #[test]
    fn zero_occurrence_variant_reports_none() {
        let cfg = EncodingConfig::with_max_len(12);
        let params: ModelParams<f32> = ModelParams::init(4, 0.0, cfg, 0);
        let pairs = vec![HomographPair {
            surface: "мука".into(),
            variants: vec![
                HomographVariant { stress: 1, corpus_count: 0 },
                HomographVariant { stress: 3, corpus_count: 0 },
            ],
        }];
        let corpus = corpus_with_counts(&[("мука", 1, 3)]);
        let models = [ScoredModel {
            name: "m".into(),
            params: &params,
            mode: Mode::Cfm,
            decode: DecodeMode::Constrained,
        }];
        let reports = score_homographs(&models, &pairs, &corpus);
        let pair = &reports[0].pairs[0];
        assert_eq!(pair.variants[1].accuracy, None);
        assert_eq!(pair.total_occurrences, 3);
    }
}
