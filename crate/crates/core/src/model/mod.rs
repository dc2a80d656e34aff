//! The conditional next-token model interface and reference models.
//!
//! A decoder sees a model only through [`ConditionalModel::step`]: given the
//! source ids and a target prefix beginning with `<sos>`, it returns
//! natural-log next-token probabilities and one attention row over the source.

mod copy;
mod table;

pub use copy::{copy_step, CopyChannelModel};
pub use table::{TableEntry, TableFixture, TableModel};

use thiserror::Error;

use crate::textprep::{TokenId, SOS};

/// Tolerance on `logsumexp(logprobs) = 0` and on attention rows summing to 1.
pub const STEP_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("copy-channel epsilon must lie in [0, 0.5), got {0}")]
    BadEpsilon(f64),
    #[error("prefix must begin with <sos>")]
    MissingSos,
    #[error("source sequence is empty")]
    EmptySource,
    #[error("token id {id} out of range for vocabulary of size {size}")]
    IdOutOfRange { id: TokenId, size: usize },
    #[error("fixture has no entry for source {source_tokens:?}, prefix {prefix:?}")]
    MissingEntry { source_tokens: Vec<String>, prefix: Vec<String> },
    #[error("invalid fixture: {0}")]
    BadFixture(String),
    #[error("malformed step output: {0}")]
    BadStep(String),
}

/// Next-token distribution and attention row for one decoder step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub logprobs: Vec<f64>,
    pub attention_row: Vec<f64>,
}

impl StepOutput {
    /// Checks the normalization contract against the expected shapes.
    pub fn validate(&self, vocab_size: usize, source_len: usize) -> Result<(), ModelError> {
        if self.logprobs.len() != vocab_size {
            return Err(ModelError::BadStep(format!(
                "{} logprobs for a vocabulary of {vocab_size}",
                self.logprobs.len()
            )));
        }
        let total = crate::logsumexp(&self.logprobs);
        if total.is_nan() || total.abs() > STEP_TOLERANCE {
            return Err(ModelError::BadStep(format!("logsumexp of logprobs is {total}")));
        }
        if self.attention_row.len() != source_len {
            return Err(ModelError::BadStep(format!(
                "attention row of length {} for a source of {source_len}",
                self.attention_row.len()
            )));
        }
        if self.attention_row.iter().any(|&a| a.is_nan() || a < 0.0) {
            return Err(ModelError::BadStep("negative attention weight".into()));
        }
        let mass: f64 = self.attention_row.iter().sum();
        if (mass - 1.0).abs() > STEP_TOLERANCE {
            return Err(ModelError::BadStep(format!("attention row sums to {mass}")));
        }
        Ok(())
    }
}

/// `p(y_t | X, y_<t)` together with the step's attention row.
///
/// `step` must be a pure function of its arguments.
pub trait ConditionalModel: Send + Sync {
    fn vocab_size(&self) -> usize;

    fn step(&self, source: &[TokenId], prefix: &[TokenId]) -> Result<StepOutput, ModelError>;
}

impl<M: ConditionalModel + ?Sized> ConditionalModel for &M {
    fn vocab_size(&self) -> usize {
        (**self).vocab_size()
    }

    fn step(&self, source: &[TokenId], prefix: &[TokenId]) -> Result<StepOutput, ModelError> {
        (**self).step(source, prefix)
    }
}

impl<M: ConditionalModel + ?Sized> ConditionalModel for Box<M> {
    fn vocab_size(&self) -> usize {
        (**self).vocab_size()
    }

    fn step(&self, source: &[TokenId], prefix: &[TokenId]) -> Result<StepOutput, ModelError> {
        (**self).step(source, prefix)
    }
}

pub(crate) fn check_inputs(
    source: &[TokenId],
    prefix: &[TokenId],
    vocab_size: usize,
) -> Result<(), ModelError> {
    if prefix.first() != Some(&SOS) {
        return Err(ModelError::MissingSos);
    }
    if source.is_empty() {
        return Err(ModelError::EmptySource);
    }
    if let Some(&id) = source.iter().chain(prefix).find(|&&id| id as usize >= vocab_size) {
        return Err(ModelError::IdOutOfRange { id, size: vocab_size });
    }
    Ok(())
}
