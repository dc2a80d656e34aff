use crate::model::ConditionalModel;
use crate::textprep::TokenId;

use super::{DecodeError, DecodeResult, Hypothesis, ScoredHypothesis};

/// Appends the most probable token (lowest id on ties) until `<eos>` or
/// `max_steps` tokens. Scores are pure cumulative model log-probability.
pub fn greedy_decode<M: ConditionalModel + ?Sized>(
    model: &M,
    source: &[TokenId],
    max_steps: usize,
) -> Result<DecodeResult, DecodeError> {
    if max_steps < 1 {
        return Err(DecodeError::Config("max steps must be at least 1".into()));
    }
    let mut hyp = Hypothesis::start();
    let mut steps = 0;
    while steps < max_steps && !hyp.terminated {
        let out = model.step(source, &hyp.ids)?;
        out.validate(model.vocab_size(), source.len())?;
        let (token, logprob) = out
            .logprobs
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (id, lp)| if lp > best.1 { (id, lp) } else { best });
        let total = hyp.model_logprob + logprob;
        let tracker = hyp.tracker.clone();
        hyp = hyp.extend(token as TokenId, total, total, &out.attention_row, &tracker);
        steps += 1;
    }
    let best = ScoredHypothesis { final_score: hyp.score, hypothesis: hyp };
    let (finalists, final_beam) = if best.hypothesis.terminated {
        (vec![best.clone()], Vec::new())
    } else {
        (Vec::new(), vec![best.hypothesis.clone()])
    };
    Ok(DecodeResult { best, finalists, final_beam, steps_taken: steps })
}
