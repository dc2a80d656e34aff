use crate::textprep::{TokenId, Vocabulary, EOS};

use super::{check_inputs, ConditionalModel, ModelError, StepOutput};

/// Noisy copy channel: at target position `t` it emits `source[t]` (or
/// `<eos>` once the source is exhausted) with probability `1 - epsilon`,
/// spreading `epsilon` uniformly over every other token, specials included.
/// Attention is one-hot at `min(t, S - 1)`.
#[derive(Debug, Clone)]
pub struct CopyChannelModel {
    epsilon: f64,
    vocab: Vocabulary,
}

impl CopyChannelModel {
    pub fn new(epsilon: f64, vocab: Vocabulary) -> Result<Self, ModelError> {
        check_epsilon(epsilon)?;
        Ok(CopyChannelModel { epsilon, vocab })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }
}

fn check_epsilon(epsilon: f64) -> Result<(), ModelError> {
    if (0.0..0.5).contains(&epsilon) {
        Ok(())
    } else {
        Err(ModelError::BadEpsilon(epsilon))
    }
}

impl ConditionalModel for CopyChannelModel {
    fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    fn step(&self, source: &[TokenId], prefix: &[TokenId]) -> Result<StepOutput, ModelError> {
        check_inputs(source, prefix, self.vocab.len())?;
        copy_step(source, prefix, self.epsilon, self.vocab.len())
    }
}

/// The copy-channel distribution for a vocabulary of `vocab_size` tokens.
pub fn copy_step(
    source: &[TokenId],
    prefix: &[TokenId],
    epsilon: f64,
    vocab_size: usize,
) -> Result<StepOutput, ModelError> {
    check_epsilon(epsilon)?;
    check_inputs(source, prefix, vocab_size)?;
    let t = prefix.len() - 1;
    let target = source.get(t).copied().unwrap_or(EOS);
    let noise = (epsilon / (vocab_size - 1) as f64).ln();
    let mut logprobs = vec![noise; vocab_size];
    logprobs[target as usize] = (1.0 - epsilon).ln();
    let mut attention_row = vec![0.0; source.len()];
    attention_row[t.min(source.len() - 1)] = 1.0;
    Ok(StepOutput { logprobs, attention_row })
}
