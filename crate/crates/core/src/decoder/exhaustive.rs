use crate::lm::NgramLm;
use crate::model::ConditionalModel;
use crate::scoring::{ScoreConfig, Scorer};
use crate::textprep::{TokenId, EOS};

use super::{rank_order, DecodeError, DecodeResult, Hypothesis, ScoredHypothesis};

/// Largest `size(V)^max_steps` the exhaustive search will attempt.
pub const EXHAUSTIVE_LIMIT: f64 = 1e7;

/// Scores a complete target (ids after `<sos>`, optionally ending in
/// `<eos>`) from scratch under `scorer`, stepping the model along it.
///
/// Scoring stops at the first token the scorer rules out; the returned
/// hypothesis then ends at that token with a final score of `-inf`.
pub fn score_sequence<M: ConditionalModel + ?Sized>(
    model: &M,
    source: &[TokenId],
    target: &[TokenId],
    scorer: &Scorer<'_>,
) -> Result<ScoredHypothesis, DecodeError> {
    if let Some(pos) = target.iter().position(|&t| t == EOS) {
        if pos + 1 != target.len() {
            return Err(DecodeError::BadTarget("<eos> before the end of the target".into()));
        }
    }
    let window = scorer.window(source.len());
    let mut hyp = Hypothesis::start();
    for &token in target {
        if token as usize >= model.vocab_size() {
            return Err(DecodeError::BadTarget(format!("token id {token} out of range")));
        }
        let out = model.step(source, &hyp.ids)?;
        out.validate(model.vocab_size(), source.len())?;
        let step = scorer.step_scores(&out, &hyp.ids, &hyp.tracker, window);
        let inc = step.increments[token as usize];
        let next = hyp.extend(
            token,
            hyp.score + inc,
            hyp.model_logprob + out.logprobs[token as usize],
            &out.attention_row,
            &step.tracker,
        );
        hyp = next;
        if inc == f64::NEG_INFINITY {
            return Ok(ScoredHypothesis { hypothesis: hyp, final_score: f64::NEG_INFINITY });
        }
    }
    let final_score = scorer.final_score(hyp.score, hyp.generated_len(), &hyp.attention_rows);
    Ok(ScoredHypothesis { hypothesis: hyp, final_score })
}

/// Enumerates every target of at most `max_steps` tokens ending in `<eos>`
/// and returns the one with the highest final score.
///
/// Branches are pruned only where the model assigns zero probability or the
/// length window forbids the token; every surviving candidate is rescored
/// from scratch with [`score_sequence`]. Ties are broken by lexicographic ids.
/// `finalists` holds just the winner.
pub fn exhaustive_decode<M: ConditionalModel + ?Sized>(
    model: &M,
    source: &[TokenId],
    max_steps: usize,
    scoring: &ScoreConfig,
    lm: Option<&NgramLm>,
) -> Result<DecodeResult, DecodeError> {
    if max_steps < 1 {
        return Err(DecodeError::Config("max steps must be at least 1".into()));
    }
    let estimate = (model.vocab_size() as f64).powi(max_steps as i32);
    if estimate > EXHAUSTIVE_LIMIT {
        return Err(DecodeError::TooLarge { estimate, limit: EXHAUSTIVE_LIMIT });
    }
    let scorer = Scorer::new(scoring, lm)?;
    let window = scorer.window(source.len());

    let mut best: Option<ScoredHypothesis> = None;
    let mut stack: Vec<Vec<TokenId>> = vec![Vec::new()];
    while let Some(target) = stack.pop() {
        let mut prefix = Vec::with_capacity(target.len() + 1);
        prefix.push(crate::textprep::SOS);
        prefix.extend_from_slice(&target);
        let out = model.step(source, &prefix)?;
        let generated = target.len();
        for (token, &lp) in out.logprobs.iter().enumerate() {
            if lp == f64::NEG_INFINITY {
                continue;
            }
            let token = token as TokenId;
            if let Some(w) = window {
                if (token == EOS && generated < w.min) || (token != EOS && generated >= w.max) {
                    continue;
                }
            }
            let mut child = target.clone();
            child.push(token);
            if token == EOS {
                let scored = score_sequence(model, source, &child, &scorer)?;
                if scored.final_score == f64::NEG_INFINITY {
                    continue;
                }
                let better = best.as_ref().is_none_or(|b| {
                    rank_order(
                        scored.final_score,
                        &scored.hypothesis.ids,
                        b.final_score,
                        &b.hypothesis.ids,
                    )
                    .is_lt()
                });
                if better {
                    best = Some(scored);
                }
            } else if child.len() < max_steps {
                stack.push(child);
            }
        }
    }
    let best = best.ok_or(DecodeError::NoHypothesis)?;
    Ok(DecodeResult {
        finalists: vec![best.clone()],
        best,
        final_beam: Vec::new(),
        steps_taken: max_steps,
    })
}
