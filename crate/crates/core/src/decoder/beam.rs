use crate::lm::NgramLm;
use crate::model::ConditionalModel;
use crate::scoring::{RepetitionTracker, Scorer};
use crate::textprep::{TokenId, EOS};

use super::{rank_order, sort_scored, BeamConfig, DecodeError, DecodeResult, Hypothesis, ScoredHypothesis};

/// A child not yet materialized into a [`Hypothesis`].
struct Candidate {
    parent: usize,
    token: TokenId,
    score: f64,
    model_logprob: f64,
}

/// Beam search.
///
/// Every step expands each live hypothesis over the whole vocabulary and
/// scores the children. Children ending in `<eos>` move to the finalists
/// without taking a beam slot; the best `beam_size` of the rest stay live.
/// After `max_steps` (or once the beam empties) the finalists are re-ranked by
/// their final score. Ties are broken by lexicographic token ids.
pub fn beam_search<M: ConditionalModel + ?Sized>(
    model: &M,
    source: &[TokenId],
    config: &BeamConfig,
    lm: Option<&NgramLm>,
) -> Result<DecodeResult, DecodeError> {
    config.validate()?;
    let scorer = Scorer::new(&config.scoring, lm)?;
    let window = scorer.window(source.len());
    let vocab_size = model.vocab_size();

    let mut live = vec![Hypothesis::start()];
    let mut finalists = Vec::new();
    let mut steps = 0;
    while steps < config.max_steps && !live.is_empty() {
        steps += 1;
        let mut candidates = Vec::new();
        let mut expansions: Vec<(Vec<f64>, RepetitionTracker)> = Vec::with_capacity(live.len());
        for (parent_idx, parent) in live.iter().enumerate() {
            let out = model.step(source, &parent.ids)?;
            out.validate(vocab_size, source.len())?;
            let step = scorer.step_scores(&out, &parent.ids, &parent.tracker, window);
            for (token, &inc) in step.increments.iter().enumerate() {
                if inc == f64::NEG_INFINITY {
                    continue;
                }
                let score = parent.score + inc;
                let model_logprob = parent.model_logprob + out.logprobs[token];
                if token == EOS as usize {
                    let hyp = parent.extend(EOS, score, model_logprob, &out.attention_row, &step.tracker);
                    let final_score = scorer.final_score(score, hyp.generated_len(), &hyp.attention_rows);
                    finalists.push(ScoredHypothesis { hypothesis: hyp, final_score });
                } else {
                    candidates.push(Candidate {
                        parent: parent_idx,
                        token: token as TokenId,
                        score,
                        model_logprob,
                    });
                }
            }
            expansions.push((out.attention_row, step.tracker));
        }
        let order = |a: &Candidate, b: &Candidate| {
            rank_order(a.score, &live[a.parent].ids, b.score, &live[b.parent].ids)
                .then_with(|| a.token.cmp(&b.token))
        };
        if candidates.len() > config.beam_size {
            candidates.select_nth_unstable_by(config.beam_size - 1, order);
            candidates.truncate(config.beam_size);
        }
        candidates.sort_by(order);
        live = candidates
            .iter()
            .map(|c| {
                let (row, tracker) = &expansions[c.parent];
                live[c.parent].extend(c.token, c.score, c.model_logprob, row, tracker)
            })
            .collect();
        if config.stop_early && finalists.len() >= config.beam_size {
            break;
        }
    }

    sort_scored(&mut finalists);
    let best = match finalists.first() {
        Some(best) => best.clone(),
        None => {
            let hyp = live.first().ok_or(DecodeError::NoHypothesis)?.clone();
            let final_score = scorer.final_score(hyp.score, hyp.generated_len(), &hyp.attention_rows);
            ScoredHypothesis { hypothesis: hyp, final_score }
        }
    };
    Ok(DecodeResult { best, finalists, final_beam: live, steps_taken: steps })
}
