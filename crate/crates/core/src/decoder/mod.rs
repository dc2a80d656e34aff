//! Greedy decoding, beam search and the exhaustive-search oracle.

mod beam;
mod corpus;
mod exhaustive;
mod greedy;

pub use beam::beam_search;
pub use corpus::decode_corpus;
pub use exhaustive::{exhaustive_decode, score_sequence, EXHAUSTIVE_LIMIT};
pub use greedy::greedy_decode;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelError;
use crate::scoring::{RepetitionTracker, ScoreConfig, ScoreError};
use crate::textprep::{TokenId, EOS, SOS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("invalid decoder configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("exhaustive search would enumerate about {estimate:.3e} sequences (limit {limit:.0e})")]
    TooLarge { estimate: f64, limit: f64 },
    #[error("no hypothesis with finite score")]
    NoHypothesis,
    #[error("invalid target sequence: {0}")]
    BadTarget(String),
    #[error("example {index}: {source}")]
    AtExample { index: usize, source: Box<DecodeError> },
}

/// Beam width, step cap and the scoring stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamConfig {
    pub beam_size: usize,
    pub max_steps: usize,
    /// Stop as soon as `beam_size` hypotheses have terminated.
    pub stop_early: bool,
    pub scoring: ScoreConfig,
}

impl BeamConfig {
    pub fn new(beam_size: usize, max_steps: usize) -> Self {
        BeamConfig { beam_size, max_steps, stop_early: false, scoring: ScoreConfig::default() }
    }

    pub fn with_scoring(mut self, scoring: ScoreConfig) -> Self {
        self.scoring = scoring;
        self
    }

    pub fn validate(&self) -> Result<(), DecodeError> {
        if self.beam_size < 1 {
            return Err(DecodeError::Config("beam size must be at least 1".into()));
        }
        if self.max_steps < 1 {
            return Err(DecodeError::Config("max steps must be at least 1".into()));
        }
        self.scoring.validate()?;
        Ok(())
    }
}

/// A target prefix under construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypothesis {
    /// Token ids, starting with `<sos>`.
    pub ids: Vec<TokenId>,
    /// Cumulative untempered model log-probability.
    pub model_logprob: f64,
    /// Cumulative in-beam score.
    pub score: f64,
    /// One attention row per generated token.
    pub attention_rows: Vec<Vec<f64>>,
    pub terminated: bool,
    #[serde(skip)]
    pub(crate) tracker: RepetitionTracker,
}

impl Hypothesis {
    pub fn start() -> Self {
        Hypothesis {
            ids: vec![SOS],
            model_logprob: 0.0,
            score: 0.0,
            attention_rows: Vec::new(),
            terminated: false,
            tracker: RepetitionTracker::default(),
        }
    }

    /// Number of generated tokens, `<eos>` included.
    pub fn generated_len(&self) -> usize {
        self.ids.len() - 1
    }

    /// Generated tokens without `<sos>` and without a terminal `<eos>`.
    pub fn target(&self) -> &[TokenId] {
        let end = if self.terminated { self.ids.len() - 1 } else { self.ids.len() };
        &self.ids[1..end]
    }

    pub(crate) fn extend(
        &self,
        token: TokenId,
        score: f64,
        model_logprob: f64,
        row: &[f64],
        tracker: &RepetitionTracker,
    ) -> Self {
        let mut ids = Vec::with_capacity(self.ids.len() + 1);
        ids.extend_from_slice(&self.ids);
        ids.push(token);
        let mut attention_rows = Vec::with_capacity(self.attention_rows.len() + 1);
        attention_rows.extend_from_slice(&self.attention_rows);
        attention_rows.push(row.to_vec());
        Hypothesis {
            ids,
            model_logprob,
            score,
            attention_rows,
            terminated: token == EOS,
            tracker: tracker.clone(),
        }
    }
}

/// A hypothesis with its final score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredHypothesis {
    pub hypothesis: Hypothesis,
    pub final_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodeResult {
    /// Highest-scoring finalist, or the best live hypothesis when nothing
    /// terminated within the step cap (then `best.hypothesis.terminated` is false).
    pub best: ScoredHypothesis,
    /// Terminated hypotheses, best first.
    pub finalists: Vec<ScoredHypothesis>,
    /// Live hypotheses when the search stopped, best first.
    pub final_beam: Vec<Hypothesis>,
    pub steps_taken: usize,
}

impl DecodeResult {
    pub fn terminated(&self) -> bool {
        self.best.hypothesis.terminated
    }
}

/// Descending score, then ascending lexicographic ids.
pub(crate) fn rank_order(a_score: f64, a_ids: &[TokenId], b_score: f64, b_ids: &[TokenId]) -> Ordering {
    b_score.total_cmp(&a_score).then_with(|| a_ids.cmp(b_ids))
}

pub(crate) fn sort_scored(list: &mut [ScoredHypothesis]) {
    list.sort_by(|a, b| {
        rank_order(a.final_score, &a.hypothesis.ids, b.final_score, &b.hypothesis.ids)
    });
}
