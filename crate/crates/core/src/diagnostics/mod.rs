//! Metrics and reports for decoded output: edit distance, BLEU, length
//! statistics, search-error detection and attention coverage.

mod bleu;
mod edit;
mod report;
mod search;
mod svg;

pub use bleu::{accumulate, bleu, bleu_from_stats, ngram_stats, sentence_bleu, BleuScore, NgramStats};
pub use edit::{edit_distance, edit_script, EditOp, EditStats};
pub use report::{evaluate, EditAggregate, EvalAggregates, EvalReport, ExampleRecord, Metrics, SubstitutionCount};
pub use search::{
    lm_weight_sweep, perplexity_curve, score_ratio_report, RatioRecord, ScoreRatioReport, ScoreTriple,
    SweepPoint,
};
pub use svg::attention_svg;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decoder::DecodeError;
use crate::lm::LmError;
use crate::scoring::{focus_position, AttentionMatrix};

/// BLEU order used by reports.
pub const BLEU_ORDER: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("{decoded} decoded sequences but {references} references")]
    LengthMismatch { decoded: usize, references: usize },
    #[error("empty corpus")]
    Empty,
    #[error("references have zero total length")]
    ZeroReferenceLength,
    #[error("n-gram order must be at least 1")]
    BadMaxN,
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Lm(#[from] LmError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthStats {
    pub mean_decoded: f64,
    pub mean_reference: f64,
    /// `mean_decoded / mean_reference`.
    pub ratio: f64,
}

pub fn length_stats<T>(decoded: &[Vec<T>], references: &[Vec<T>]) -> Result<LengthStats, DiagnosticsError> {
    if decoded.len() != references.len() {
        return Err(DiagnosticsError::LengthMismatch { decoded: decoded.len(), references: references.len() });
    }
    if decoded.is_empty() {
        return Err(DiagnosticsError::Empty);
    }
    let n = decoded.len() as f64;
    let dec: usize = decoded.iter().map(Vec::len).sum();
    let reference: usize = references.iter().map(Vec::len).sum();
    if reference == 0 {
        return Err(DiagnosticsError::ZeroReferenceLength);
    }
    Ok(LengthStats {
        mean_decoded: dec as f64 / n,
        mean_reference: reference as f64 / n,
        ratio: dec as f64 / reference as f64,
    })
}

/// Source positions never receiving focus, and positions receiving focus in
/// more than one row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttentionReport {
    pub uncovered: Vec<usize>,
    pub multi_attended: Vec<usize>,
}

pub fn attention_report(attention: &AttentionMatrix, threshold: f64) -> AttentionReport {
    let mut hits = vec![0usize; attention.source_len()];
    for row in attention.rows() {
        if let Some(pos) = focus_position(row, threshold) {
            hits[pos] += 1;
        }
    }
    AttentionReport {
        uncovered: (0..hits.len()).filter(|&j| hits[j] == 0).collect(),
        multi_attended: (0..hits.len()).filter(|&j| hits[j] > 1).collect(),
    }
}
