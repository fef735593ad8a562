//! The guide's chapters compiled as doc-tests, so every code block in
//! `book/` stays in sync with the crate.

#[doc = include_str!("../../../book/src/stress-and-syllables.md")]
mod stress_and_syllables {}
