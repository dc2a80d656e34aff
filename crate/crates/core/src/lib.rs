//! Model-agnostic sequence decoding.
//!
//! The engine drives any [`model::ConditionalModel`] (a next-token distribution
//! plus one attention row per step) through greedy decoding, beam search with a
//! composable scoring stack, or exhaustive enumeration. Supporting modules cover
//! preprocessing (tokenizer, vocabulary, BPE), a count-based n-gram language
//! model for shallow fusion, and decoding diagnostics.

pub mod decoder;
pub mod diagnostics;
pub mod lm;
pub mod model;
pub mod scoring;
pub mod textprep;

pub use decoder::{
    beam_search, decode_corpus, exhaustive_decode, greedy_decode, BeamConfig, DecodeError,
    DecodeResult, Hypothesis, ScoredHypothesis,
};
pub use lm::{LmError, NgramLm};
pub use model::{ConditionalModel, CopyChannelModel, ModelError, StepOutput, TableModel};
pub use scoring::{AttentionMatrix, ScoreConfig, ScoreError, Scorer};
pub use textprep::{BpeMerges, Role, TextprepError, TokenId, TokenSequence, Vocabulary};

/// Natural-log sum of exponentials, stable for `-inf` entries.
pub fn logsumexp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}
