//! Cyrillic alphabet facts and stress-mark handling.
//!
//! Everything downstream (instance building, encoding, evaluation) leans on
//! this module for three facts about Russian orthography: the 33-letter
//! alphabet, the 10 vowel letters, and the convention that a word carries
//! exactly one stressed vowel. Stressed text is written with a combining
//! acute (U+0301) immediately after the stressed vowel: `облака́`.

use thiserror::Error;

/// Combining acute accent, the canonical stress mark in annotated text.
pub const STRESS_MARK: char = '\u{0301}';

/// The Russian alphabet plus the `_` separator used for context-augmented
/// inputs. Letter indices are fixed: `а` is 0, `я` is 32, `_` is 33.
pub struct Alphabet;

impl Alphabet {
    pub const LETTERS: [char; 33] = [
        'а', 'б', 'в', 'г', 'д', 'е', 'ё', 'ж', 'з', 'и', 'й', 'к', 'л', 'м', 'н', 'о', 'п',
        'р', 'с', 'т', 'у', 'ф', 'х', 'ц', 'ч', 'ш', 'щ', 'ъ', 'ы', 'ь', 'э', 'ю', 'я',
    ];
    pub const VOWELS: [char; 10] = ['а', 'е', 'ё', 'и', 'о', 'у', 'ы', 'э', 'ю', 'я'];
    pub const SEPARATOR: char = '_';
    /// One channel per letter plus one for the separator.
    pub const CHANNELS: usize = Self::LETTERS.len() + 1;

    /// Channel index of a character: letters map onto `0..33`, the separator
    /// onto 33. Anything else is not representable.
    pub fn index_of(c: char) -> Option<usize> {
        if c == Self::SEPARATOR {
            return Some(Self::LETTERS.len());
        }
        Self::LETTERS.iter().position(|&l| l == c)
    }

    /// Inverse of [`Alphabet::index_of`].
    pub fn char_at(index: usize) -> Option<char> {
        if index == Self::LETTERS.len() {
            Some(Self::SEPARATOR)
        } else {
            Self::LETTERS.get(index).copied()
        }
    }

    pub fn is_letter(c: char) -> bool {
        Self::LETTERS.contains(&c)
    }

    pub fn is_vowel(c: char) -> bool {
        Self::VOWELS.contains(&c)
    }

    /// The letters joined into one string, used as the channel map in model
    /// file headers.
    pub fn channel_map() -> String {
        let mut s: String = Self::LETTERS.iter().collect();
        s.push(Self::SEPARATOR);
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextError {
    #[error("empty input")]
    EmptyInput,
    #[error("illegal character {ch:?} at position {pos}")]
    IllegalCharacter { pos: usize, ch: char },
    #[error("no stress mark (expected one combining acute U+0301)")]
    NoStressMark,
    #[error("multiple stress marks")]
    MultipleStressMarks,
    #[error("stress mark does not follow a vowel")]
    StressOnConsonant,
    #[error("word {word:?} contains no vowel")]
    NoVowel { word: String },
    #[error("stress index {stress} out of range for {word:?}")]
    StressOutOfRange { word: String, stress: usize },
}

/// A normalized word together with the position of its stressed vowel.
///
/// Invariants enforced at construction: the surface is non-empty, drawn from
/// [`Alphabet::LETTERS`], and the character at `stress` is a vowel.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StressedWord {
    chars: String,
    stress: usize,
}

impl StressedWord {
    pub fn new(chars: impl Into<String>, stress: usize) -> Result<Self, TextError> {
        let chars: String = chars.into();
        if chars.is_empty() {
            return Err(TextError::EmptyInput);
        }
        for (pos, ch) in chars.chars().enumerate() {
            if !Alphabet::is_letter(ch) {
                return Err(TextError::IllegalCharacter { pos, ch });
            }
        }
        if !chars.chars().any(Alphabet::is_vowel) {
            return Err(TextError::NoVowel { word: chars });
        }
        match chars.chars().nth(stress) {
            None => Err(TextError::StressOutOfRange {
                word: chars,
                stress,
            }),
            Some(c) if !Alphabet::is_vowel(c) => Err(TextError::StressOnConsonant),
            Some(_) => Ok(StressedWord { chars, stress }),
        }
    }

    /// The unstressed surface form.
    pub fn surface(&self) -> &str {
        &self.chars
    }

    /// 0-based character index of the stressed vowel.
    pub fn stress(&self) -> usize {
        self.stress
    }

    pub fn stressed_char(&self) -> char {
        self.chars.chars().nth(self.stress).expect("stress in range")
    }

    /// Length in characters, not bytes.
    pub fn len(&self) -> usize {
        self.chars.chars().count()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn syllables(&self) -> usize {
        count_syllables(&self.chars)
    }
}

/// Lowercase `raw` and verify every character is a Russian letter or the
/// separator. `ё` stays distinct from `е`.
pub fn normalize(raw: &str) -> Result<String, TextError> {
    if raw.is_empty() {
        return Err(TextError::EmptyInput);
    }
    let mut out = String::with_capacity(raw.len());
    for (pos, ch) in raw.chars().enumerate() {
        // Cyrillic case folding is one-to-one, so this preserves positions.
        for low in ch.to_lowercase() {
            if !Alphabet::is_letter(low) && low != Alphabet::SEPARATOR {
                return Err(TextError::IllegalCharacter { pos, ch });
            }
            out.push(low);
        }
    }
    Ok(out)
}

/// Parse a word carrying exactly one combining acute into a [`StressedWord`].
/// The acute must immediately follow the stressed vowel.
pub fn parse_stress_mark(marked: &str) -> Result<StressedWord, TextError> {
    let chars: Vec<char> = marked.chars().collect();
    let stripped: String = chars.iter().filter(|&&c| c != STRESS_MARK).collect();
    // character problems outrank mark problems in the report
    let normalized = normalize(&stripped)?;
    let marks: Vec<usize> = chars
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == STRESS_MARK)
        .map(|(i, _)| i)
        .collect();
    match marks.len() {
        0 => return Err(TextError::NoStressMark),
        1 => {}
        _ => return Err(TextError::MultipleStressMarks),
    }
    let mark_pos = marks[0];
    if mark_pos == 0 {
        return Err(TextError::StressOnConsonant);
    }
    StressedWord::new(normalized, mark_pos - 1)
}

/// Inverse of [`parse_stress_mark`]: write the word with its acute.
pub fn format_stress_mark(word: &StressedWord) -> String {
    let mut out = String::with_capacity(word.surface().len() + 2);
    for (i, ch) in word.surface().chars().enumerate() {
        out.push(ch);
        if i == word.stress() {
            out.push(STRESS_MARK);
        }
    }
    out
}

/// Number of syllables = number of vowel letters; Russian syllables have a
/// (C)V(C) shape, so the counts coincide.
pub fn count_syllables(chars: &str) -> usize {
    chars.chars().filter(|&c| Alphabet::is_vowel(c)).count()
}

/// If the word contains exactly one `ё`, that vowel is the stressed one.
/// Two or more (`трёхколёсный`) and the rule declines.
pub fn yo_override(chars: &str) -> Option<usize> {
    let mut found = None;
    for (i, c) in chars.chars().enumerate() {
        if c == 'ё' {
            if found.is_some() {
                return None;
            }
            found = Some(i);
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn alphabet_has_expected_shape() {
        assert_eq!(Alphabet::LETTERS.len(), 33);
        assert_eq!(Alphabet::VOWELS.len(), 10);
        assert!(Alphabet::VOWELS.iter().all(|v| Alphabet::is_letter(*v)));
        // letter -> index is a bijection onto 0..33, separator takes 33
        for (i, &l) in Alphabet::LETTERS.iter().enumerate() {
            assert_eq!(Alphabet::index_of(l), Some(i));
            assert_eq!(Alphabet::char_at(i), Some(l));
        }
        assert_eq!(Alphabet::index_of('_'), Some(33));
        assert_eq!(Alphabet::index_of('x'), None);
        assert_eq!(Alphabet::CHANNELS, 34);
    }

    #[test]
    fn normalize_folds_case() {
        assert_eq!(normalize("Облака").unwrap(), "облака");
    }

    #[test]
    fn normalize_keeps_yo() {
        assert_eq!(normalize("ёж").unwrap(), "ёж");
        assert_eq!(normalize("Ёж").unwrap(), "ёж");
    }

    #[test]
    fn normalize_rejects_latin() {
        assert_eq!(
            normalize("word"),
            Err(TextError::IllegalCharacter { pos: 0, ch: 'w' })
        );
    }

    #[test]
    fn normalize_rejects_digits_and_hyphens() {
        assert!(matches!(
            normalize("во-первых"),
            Err(TextError::IllegalCharacter { pos: 2, ch: '-' })
        ));
        assert!(matches!(
            normalize("дом3"),
            Err(TextError::IllegalCharacter { pos: 3, ch: '3' })
        ));
    }

    #[test]
    fn normalize_rejects_empty() {
        assert_eq!(normalize(""), Err(TextError::EmptyInput));
    }

    #[test]
    fn parse_final_stress() {
        let w = parse_stress_mark("облака́").unwrap();
        assert_eq!(w.surface(), "облака");
        assert_eq!(w.stress(), 5);
    }

    #[test]
    fn parse_initial_stress() {
        let w = parse_stress_mark("о́блака").unwrap();
        assert_eq!(w.surface(), "облака");
        assert_eq!(w.stress(), 0);
    }

    #[test]
    fn parse_rejects_two_acutes() {
        assert_eq!(
            parse_stress_mark("сло́во́"),
            Err(TextError::MultipleStressMarks)
        );
    }

    #[test]
    fn parse_rejects_missing_acute() {
        assert_eq!(parse_stress_mark("слово"), Err(TextError::NoStressMark));
    }

    #[test]
    fn parse_rejects_acute_after_consonant() {
        assert_eq!(
            parse_stress_mark("сл́ово"),
            Err(TextError::StressOnConsonant)
        );
        // leading acute has nothing to attach to
        assert_eq!(
            parse_stress_mark("\u{0301}дом"),
            Err(TextError::StressOnConsonant)
        );
    }

    #[test]
    fn format_round_trips_examples() {
        let w = StressedWord::new("облака", 5).unwrap();
        assert_eq!(format_stress_mark(&w), "облака́");
        let dom = StressedWord::new("дом", 1).unwrap();
        assert_eq!(format_stress_mark(&dom), "до́м");
        let ruki = StressedWord::new("руки", 3).unwrap();
        assert_eq!(format_stress_mark(&ruki), "руки́");
    }

    #[test]
    fn syllable_counts() {
        assert_eq!(count_syllables("облака"), 3);
        assert_eq!(count_syllables("всплеск"), 1);
        assert_eq!(count_syllables("вздрогнувшему"), 4);
        assert_eq!(count_syllables("встр"), 0);
    }

    #[test]
    fn yo_rule() {
        assert_eq!(yo_override("ёж"), Some(0));
        assert_eq!(yo_override("дом"), None);
        assert_eq!(yo_override("трёхколёсный"), None);
        assert_eq!(yo_override("узнаёт"), Some(4));
    }

    #[test]
    fn constructor_enforces_invariants() {
        assert_eq!(
            StressedWord::new("дом", 0).unwrap_err(),
            TextError::StressOnConsonant
        );
        assert!(matches!(
            StressedWord::new("встр", 1),
            Err(TextError::NoVowel { .. })
        ));
        assert!(matches!(
            StressedWord::new("дом", 7),
            Err(TextError::StressOutOfRange { .. })
        ));
        assert_eq!(StressedWord::new("", 0).unwrap_err(), TextError::EmptyInput);
    }

    fn arb_stressed_word() -> impl Strategy<Value = StressedWord> {
        let letters = prop::collection::vec(0usize..33, 1..=14);
        (letters, any::<prop::sample::Index>()).prop_map(|(idxs, which)| {
            let mut chars: Vec<char> = idxs
                .into_iter()
                .map(|i| Alphabet::LETTERS[i])
                .collect();
            let vowel_positions: Vec<usize> = chars
                .iter()
                .enumerate()
                .filter(|(_, c)| Alphabet::is_vowel(**c))
                .map(|(i, _)| i)
                .collect();
            let stress = if vowel_positions.is_empty() {
                chars.push('а');
                chars.len() - 1
            } else {
                vowel_positions[which.index(vowel_positions.len())]
            };
            StressedWord::new(chars.into_iter().collect::<String>(), stress).unwrap()
        })
    }

    proptest! {
        #[test]
        fn parse_inverts_format(w in arb_stressed_word()) {
            prop_assert_eq!(parse_stress_mark(&format_stress_mark(&w)).unwrap(), w);
        }

        #[test]
        fn normalize_is_idempotent(w in arb_stressed_word()) {
            let once = normalize(w.surface()).unwrap();
            prop_assert_eq!(normalize(&once).unwrap(), once);
        }

        #[test]
        fn syllable_count_matches_brute_force(w in arb_stressed_word()) {
            // independent recount against a hardcoded vowel list
            let vowels = ['а', 'е', 'ё', 'и', 'о', 'у', 'ы', 'э', 'ю', 'я'];
            let brute = w.surface().chars().filter(|c| vowels.contains(c)).count();
            prop_assert_eq!(count_syllables(w.surface()), brute);
        }

        #[test]
        fn accepted_words_have_vowel_stress(w in arb_stressed_word()) {
            prop_assert!(Alphabet::is_vowel(w.stressed_char()));
        }
    }
}
