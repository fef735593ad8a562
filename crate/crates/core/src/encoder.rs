//! One-hot encoding of instances and decoding of model outputs.
//!
//! An instance becomes a `max_len x channels` binary matrix: row `i` is the
//! unit vector for character `i`, rows past the end of the input stay zero.
//! The target is a one-hot vector over the `max_len` positions. Decoding
//! inverts the output side: raw mode takes the plain argmax, constrained
//! mode restricts to vowel positions of the actual input.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::TrainInstance;
use crate::textcore::Alphabet;

/// Matrix geometry. 34 channels (33 letters + separator) is the default;
/// 33 drops the separator channel and with it CDM-style inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingConfig {
    pub max_len: usize,
    pub channels: usize,
}

impl Default for EncodingConfig {
    fn default() -> Self {
        EncodingConfig {
            max_len: 40,
            channels: Alphabet::CHANNELS,
        }
    }
}

impl EncodingConfig {
    pub fn new(max_len: usize, channels: usize) -> Result<Self, EncodeError> {
        if max_len == 0 {
            return Err(EncodeError::BadConfig("max_len must be positive".into()));
        }
        if channels != Alphabet::CHANNELS && channels != Alphabet::CHANNELS - 1 {
            return Err(EncodeError::BadConfig(format!(
                "channels must be {} or {}, got {channels}",
                Alphabet::CHANNELS - 1,
                Alphabet::CHANNELS
            )));
        }
        Ok(EncodingConfig { max_len, channels })
    }

    pub fn with_max_len(max_len: usize) -> Self {
        EncodingConfig {
            max_len,
            ..EncodingConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("input of {len} characters exceeds max_len {max_len}")]
    InstanceTooLong { len: usize, max_len: usize },
    #[error("separator requires the 34-channel configuration")]
    SeparatorNeedsChannel,
    #[error("input has no vowel to decode onto")]
    NoVowel,
    #[error("{0}")]
    BadConfig(String),
}

/// Dense `max_len x channels` one-hot matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputMatrix {
    values: Vec<u8>,
    max_len: usize,
    channels: usize,
    len: usize,
}

impl InputMatrix {
    pub fn row(&self, i: usize) -> &[u8] {
        &self.values[i * self.channels..(i + 1) * self.channels]
    }

    /// Which channel is hot in row `i`, or `None` for a padding row.
    pub fn active_channel(&self, i: usize) -> Option<usize> {
        self.row(i).iter().position(|&v| v == 1)
    }

    /// Occupied rows, i.e. the instance length in characters.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Invert the encoding: read characters off the hot channels until the
    /// first all-zero row.
    pub fn recover_input(&self) -> (String, usize) {
        let mut s = String::new();
        for i in 0..self.max_len {
            match self.active_channel(i) {
                Some(ch) => s.push(Alphabet::char_at(ch).expect("channel in range")),
                None => break,
            }
        }
        let n = s.chars().count();
        (s, n)
    }
}

/// One-hot target over the `max_len` positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetVector {
    values: Vec<u8>,
    index: usize,
}

impl TargetVector {
    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn index(&self) -> usize {
        self.index
    }
}

/// Encode an instance into its input matrix and target vector.
pub fn encode(
    instance: &TrainInstance,
    cfg: &EncodingConfig,
) -> Result<(InputMatrix, TargetVector), EncodeError> {
    let len = instance.len();
    if len > cfg.max_len {
        return Err(EncodeError::InstanceTooLong {
            len,
            max_len: cfg.max_len,
        });
    }
    let mut values = vec![0u8; cfg.max_len * cfg.channels];
    for (i, ch) in instance.input().chars().enumerate() {
        let channel = Alphabet::index_of(ch).expect("instance characters are representable");
        if channel >= cfg.channels {
            return Err(EncodeError::SeparatorNeedsChannel);
        }
        values[i * cfg.channels + channel] = 1;
    }
    let matrix = InputMatrix {
        values,
        max_len: cfg.max_len,
        channels: cfg.channels,
        len,
    };
    let mut target = vec![0u8; cfg.max_len];
    target[instance.target()] = 1;
    Ok((
        matrix,
        TargetVector {
            values: target,
            index: instance.target(),
        },
    ))
}

/// Raw argmax or vowel-constrained decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecodeMode {
    Raw,
    Constrained,
}

impl std::str::FromStr for DecodeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(DecodeMode::Raw),
            "constrained" => Ok(DecodeMode::Constrained),
            other => Err(format!(
                "unknown decode mode {other:?} (expected raw or constrained)"
            )),
        }
    }
}

/// Argmax over an explicit set of legal positions; ties go to the lowest
/// index. `None` when no legal position is in range.
pub fn constrained_argmax<F: PartialOrd + Copy>(
    scores: &[F],
    legal: impl IntoIterator<Item = usize>,
) -> Option<usize> {
    let mut best: Option<(usize, F)> = None;
    for i in legal {
        let Some(&s) = scores.get(i) else { continue };
        match best {
            Some((_, b)) if !(s > b) => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
}

/// Turn a score vector back into a stress position for `input`.
pub fn decode_position<F: PartialOrd + Copy>(
    scores: &[F],
    input: &str,
    mode: DecodeMode,
) -> Result<usize, EncodeError> {
    match mode {
        DecodeMode::Raw => {
            constrained_argmax(scores, 0..scores.len()).ok_or(EncodeError::NoVowel)
        }
        DecodeMode::Constrained => {
            let legal = input
                .chars()
                .enumerate()
                .filter(|(_, c)| Alphabet::is_vowel(*c))
                .map(|(i, _)| i);
            constrained_argmax(scores, legal).ok_or(EncodeError::NoVowel)
        }
    }
}
