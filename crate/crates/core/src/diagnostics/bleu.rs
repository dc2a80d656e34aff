use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use super::DiagnosticsError;

/// Clipped n-gram match and candidate counts for orders `1..=max_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NgramStats {
    pub matches: Vec<u64>,
    pub totals: Vec<u64>,
    pub hypothesis_len: u64,
    pub reference_len: u64,
}

impl NgramStats {
    fn zero(max_n: usize) -> Self {
        NgramStats { matches: vec![0; max_n], totals: vec![0; max_n], hypothesis_len: 0, reference_len: 0 }
    }

    fn add(&mut self, other: &NgramStats) {
        for (m, o) in self.matches.iter_mut().zip(&other.matches) {
            *m += o;
        }
        for (t, o) in self.totals.iter_mut().zip(&other.totals) {
            *t += o;
        }
        self.hypothesis_len += other.hypothesis_len;
        self.reference_len += other.reference_len;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuScore {
    pub score: f64,
    pub precisions: Vec<f64>,
    pub brevity_penalty: f64,
    pub stats: NgramStats,
}

fn ngram_counts<T: Eq + Hash>(tokens: &[T], n: usize) -> HashMap<&[T], u64> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_default() += 1;
        }
    }
    counts
}

/// Clipped n-gram statistics for one hypothesis/reference pair.
pub fn ngram_stats<T: Eq + Hash>(hypothesis: &[T], reference: &[T], max_n: usize) -> NgramStats {
    let mut stats = NgramStats::zero(max_n);
    stats.hypothesis_len = hypothesis.len() as u64;
    stats.reference_len = reference.len() as u64;
    for n in 1..=max_n {
        let hyp = ngram_counts(hypothesis, n);
        let reference = ngram_counts(reference, n);
        stats.totals[n - 1] = hyp.values().sum();
        stats.matches[n - 1] =
            hyp.iter().map(|(g, &c)| c.min(reference.get(g).copied().unwrap_or(0))).sum();
    }
    stats
}

/// BLEU from accumulated statistics. With `smooth`, orders `n >= 2` use
/// add-one precision `(m + 1) / (t + 1)`.
pub fn bleu_from_stats(stats: &NgramStats, smooth: bool) -> BleuScore {
    let precisions: Vec<f64> = stats
        .matches
        .iter()
        .zip(&stats.totals)
        .enumerate()
        .map(|(i, (&m, &t))| {
            if smooth && i > 0 {
                (m + 1) as f64 / (t + 1) as f64
            } else if t == 0 {
                0.0
            } else {
                m as f64 / t as f64
            }
        })
        .collect();
    let (c, r) = (stats.hypothesis_len as f64, stats.reference_len as f64);
    let brevity_penalty = if c == 0.0 {
        0.0
    } else if c > r {
        1.0
    } else {
        (1.0 - r / c).exp()
    };
    let score = if precisions.contains(&0.0) || brevity_penalty == 0.0 {
        0.0
    } else {
        let log_mean = precisions.iter().map(|p| p.ln()).sum::<f64>() / precisions.len() as f64;
        brevity_penalty * log_mean.exp()
    };
    BleuScore { score, precisions, brevity_penalty, stats: stats.clone() }
}

/// Corpus-level BLEU with one reference per hypothesis and no smoothing.
pub fn bleu<T: Eq + Hash>(
    hypotheses: &[Vec<T>],
    references: &[Vec<T>],
    max_n: usize,
) -> Result<BleuScore, DiagnosticsError> {
    if hypotheses.len() != references.len() {
        return Err(DiagnosticsError::LengthMismatch {
            decoded: hypotheses.len(),
            references: references.len(),
        });
    }
    if max_n == 0 {
        return Err(DiagnosticsError::BadMaxN);
    }
    let mut total = NgramStats::zero(max_n);
    for (h, r) in hypotheses.iter().zip(references) {
        total.add(&ngram_stats(h, r, max_n));
    }
    Ok(bleu_from_stats(&total, false))
}

/// Sentence-level BLEU with add-one smoothing for `n >= 2`.
pub fn sentence_bleu<T: Eq + Hash>(hypothesis: &[T], reference: &[T], max_n: usize) -> f64 {
    bleu_from_stats(&ngram_stats(hypothesis, reference, max_n.max(1)), true).score
}

/// Sums per-example statistics.
pub fn accumulate<'a, I: IntoIterator<Item = &'a NgramStats>>(stats: I, max_n: usize) -> NgramStats {
    let mut total = NgramStats::zero(max_n);
    for s in stats {
        total.add(s);
    }
    total
}
