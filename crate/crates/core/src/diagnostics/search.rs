use serde::{Deserialize, Serialize};

use crate::decoder::{decode_corpus, score_sequence, BeamConfig};
use crate::lm::NgramLm;
use crate::model::ConditionalModel;
use crate::scoring::Scorer;
use crate::textprep::{TokenId, TokenSequence, Vocabulary};

use super::bleu::bleu;
use super::{length_stats, DiagnosticsError, BLEU_ORDER};

/// A source with its decoded and gold targets. Targets are ids after
/// `<sos>`; include the final `<eos>` to score a terminated sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreTriple {
    pub source: Vec<TokenId>,
    pub decoded: Vec<TokenId>,
    pub gold: Vec<TokenId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    pub index: usize,
    pub decoded_score: f64,
    pub gold_score: f64,
    /// `decoded_score / gold_score`; absent when not finite.
    pub ratio: Option<f64>,
    /// The gold target outscores what the decoder returned.
    pub search_error: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRatioReport {
    pub records: Vec<RatioRecord>,
    pub search_errors: usize,
    pub mean_ratio: Option<f64>,
}

/// Rescores decoded and gold targets under the same scorer and flags every
/// example where the gold target scores higher.
pub fn score_ratio_report<M: ConditionalModel + ?Sized>(
    model: &M,
    scorer: &Scorer<'_>,
    triples: &[ScoreTriple],
) -> Result<ScoreRatioReport, DiagnosticsError> {
    let mut records = Vec::with_capacity(triples.len());
    for (index, t) in triples.iter().enumerate() {
        let decoded_score = score_sequence(model, &t.source, &t.decoded, scorer)?.final_score;
        let gold_score = score_sequence(model, &t.source, &t.gold, scorer)?.final_score;
        let ratio = decoded_score / gold_score;
        records.push(RatioRecord {
            index,
            decoded_score,
            gold_score,
            ratio: ratio.is_finite().then_some(ratio),
            search_error: gold_score > decoded_score,
        });
    }
    let finite: Vec<f64> = records.iter().filter_map(|r| r.ratio).collect();
    let mean_ratio = (!finite.is_empty()).then(|| finite.iter().sum::<f64>() / finite.len() as f64);
    Ok(ScoreRatioReport {
        search_errors: records.iter().filter(|r| r.search_error).count(),
        records,
        mean_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub lm_weight: f64,
    pub bleu: f64,
    pub length_ratio: f64,
}

/// Decodes the corpus once per LM weight and scores the best targets against
/// the references.
pub fn lm_weight_sweep<M: ConditionalModel + ?Sized>(
    model: &M,
    lm: &NgramLm,
    sources: &[Vec<TokenId>],
    references: &[Vec<TokenId>],
    base: &BeamConfig,
    weights: &[f64],
    parallelism: usize,
) -> Result<Vec<SweepPoint>, DiagnosticsError> {
    weights
        .iter()
        .map(|&lm_weight| {
            let mut config = base.clone();
            config.scoring.lm_weight = lm_weight;
            let results = decode_corpus(model, sources, &config, Some(lm), parallelism)?;
            let decoded: Vec<Vec<TokenId>> =
                results.iter().map(|r| r.best.hypothesis.target().to_vec()).collect();
            Ok(SweepPoint {
                lm_weight,
                bleu: bleu(&decoded, references, BLEU_ORDER)?.score,
                length_ratio: length_stats(&decoded, references)?.ratio,
            })
        })
        .collect()
}

/// Held-out perplexity of LMs trained on the first `size` sentences, for
/// each size.
pub fn perplexity_curve(
    train: &[TokenSequence],
    heldout: &[TokenSequence],
    sizes: &[usize],
    order: usize,
    discount: f64,
    vocab: &Vocabulary,
) -> Result<Vec<(usize, f64)>, DiagnosticsError> {
    sizes
        .iter()
        .map(|&size| {
            let lm = NgramLm::train(&train[..size.min(train.len())], order, discount, vocab)?;
            Ok((size, lm.perplexity(heldout)?))
        })
        .collect()
}
