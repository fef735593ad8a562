//! Character-level word stress placement for Russian.
//!
//! The crate covers the whole pipeline: parsing stress-annotated
//! dictionaries and corpora, reproducible lexeme-wise and utterance-wise
//! splits, context augmentation, one-hot encoding, a from-scratch
//! bidirectional LSTM classifier with exact backpropagation, training with
//! dev-based epoch selection, bit-exact model serialization, and the
//! evaluation protocol (syllable-bucketed accuracy, micro-average, homograph
//! scoring).
//!
//! The guide under `book/` walks through each layer with runnable examples;
//! its chapters double as this crate's doc-tests.

pub mod dataset;
pub mod encoder;
pub mod eval;
pub mod modelio;
pub mod nn;
pub mod textcore;
pub mod trainer;

mod book;

pub use dataset::{Mode, SplitConfig, TrainInstance};
pub use encoder::{DecodeMode, EncodingConfig};
pub use nn::ModelParams;
pub use textcore::StressedWord;

/// SplitMix64 finalizer; a cheap bijective avalanche used wherever a keyed
/// hash or derived seed is needed.
pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
