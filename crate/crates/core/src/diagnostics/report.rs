use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::bleu::{accumulate, bleu_from_stats, ngram_stats, sentence_bleu, BleuScore, NgramStats};
use super::edit::{edit_script, EditOp, EditStats};
use super::{DiagnosticsError, LengthStats, BLEU_ORDER};

/// Substitution pairs kept in the aggregate.
const TOP_SUBSTITUTIONS: usize = 20;

/// Which metrics to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    pub bleu: bool,
    pub edit: bool,
    pub length: bool,
}

impl Metrics {
    pub fn all() -> Self {
        Metrics { bleu: true, edit: true, length: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleRecord {
    pub index: usize,
    pub decoded_len: usize,
    pub reference_len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edit: Option<EditStats>,
    /// Edit distance divided by the reference length (at least 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized_edit: Option<f64>,
    /// `[decoded, reference]` token pairs aligned by substitution.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub substitutions: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ngrams: Option<NgramStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentence_bleu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubstitutionCount {
    pub decoded: String,
    pub reference: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditAggregate {
    pub distance: usize,
    pub insertions: usize,
    pub deletions: usize,
    pub substitutions: usize,
    pub mean_normalized: f64,
    pub top_substitutions: Vec<SubstitutionCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalAggregates {
    pub examples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bleu: Option<BleuScore>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<LengthStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edit: Option<EditAggregate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub examples: Vec<ExampleRecord>,
    pub aggregates: EvalAggregates,
}

impl EvalReport {
    /// Rebuilds the aggregates from the per-example records alone.
    pub fn aggregate(examples: &[ExampleRecord]) -> Result<EvalAggregates, DiagnosticsError> {
        if examples.is_empty() {
            return Err(DiagnosticsError::Empty);
        }
        let n = examples.len() as f64;

        let bleu = if examples.iter().all(|e| e.ngrams.is_some()) {
            let stats = accumulate(examples.iter().filter_map(|e| e.ngrams.as_ref()), BLEU_ORDER);
            Some(bleu_from_stats(&stats, false))
        } else {
            None
        };

        let decoded: usize = examples.iter().map(|e| e.decoded_len).sum();
        let reference: usize = examples.iter().map(|e| e.reference_len).sum();
        let length = (reference > 0).then(|| LengthStats {
            mean_decoded: decoded as f64 / n,
            mean_reference: reference as f64 / n,
            ratio: decoded as f64 / reference as f64,
        });

        let edit = if examples.iter().all(|e| e.edit.is_some()) {
            let mut agg = EditAggregate {
                distance: 0,
                insertions: 0,
                deletions: 0,
                substitutions: 0,
                mean_normalized: 0.0,
                top_substitutions: Vec::new(),
            };
            let mut pairs: BTreeMap<(&str, &str), usize> = BTreeMap::new();
            for e in examples {
                let s = e.edit.unwrap_or_default();
                agg.distance += s.distance;
                agg.insertions += s.insertions;
                agg.deletions += s.deletions;
                agg.substitutions += s.substitutions;
                agg.mean_normalized += e.normalized_edit.unwrap_or(0.0);
                for [d, r] in &e.substitutions {
                    *pairs.entry((d.as_str(), r.as_str())).or_default() += 1;
                }
            }
            agg.mean_normalized /= n;
            let mut ranked: Vec<_> = pairs.into_iter().collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            agg.top_substitutions = ranked
                .into_iter()
                .take(TOP_SUBSTITUTIONS)
                .map(|((d, r), count)| SubstitutionCount {
                    decoded: d.to_string(),
                    reference: r.to_string(),
                    count,
                })
                .collect();
            Some(agg)
        } else {
            None
        };

        Ok(EvalAggregates { examples: examples.len(), bleu, length, edit })
    }
}

/// Per-example and aggregate metrics for aligned decoded/reference token
/// sequences.
pub fn evaluate<S: AsRef<str>>(
    decoded: &[Vec<S>],
    references: &[Vec<S>],
    metrics: Metrics,
) -> Result<EvalReport, DiagnosticsError> {
    if decoded.len() != references.len() {
        return Err(DiagnosticsError::LengthMismatch { decoded: decoded.len(), references: references.len() });
    }
    if decoded.is_empty() {
        return Err(DiagnosticsError::Empty);
    }
    let mut examples = Vec::with_capacity(decoded.len());
    for (index, (d, r)) in decoded.iter().zip(references).enumerate() {
        let d: Vec<&str> = d.iter().map(AsRef::as_ref).collect();
        let r: Vec<&str> = r.iter().map(AsRef::as_ref).collect();
        let mut record = ExampleRecord {
            index,
            decoded_len: d.len(),
            reference_len: r.len(),
            edit: None,
            normalized_edit: None,
            substitutions: Vec::new(),
            ngrams: None,
            sentence_bleu: None,
        };
        if metrics.edit {
            let mut stats = EditStats::default();
            for op in edit_script(&d, &r) {
                match op {
                    EditOp::Match(_) => {}
                    EditOp::Substitute { from, to } => {
                        stats.substitutions += 1;
                        record.substitutions.push([from.to_string(), to.to_string()]);
                    }
                    EditOp::Delete(_) => stats.deletions += 1,
                    EditOp::Insert(_) => stats.insertions += 1,
                }
            }
            stats.distance = stats.substitutions + stats.deletions + stats.insertions;
            record.normalized_edit = Some(stats.distance as f64 / r.len().max(1) as f64);
            record.edit = Some(stats);
        }
        if metrics.bleu {
            record.ngrams = Some(ngram_stats(&d, &r, BLEU_ORDER));
            record.sentence_bleu = Some(sentence_bleu(&d, &r, BLEU_ORDER));
        }
        examples.push(record);
    }
    let mut aggregates = EvalReport::aggregate(&examples)?;
    if !metrics.length {
        aggregates.length = None;
    } else if aggregates.length.is_none() {
        return Err(DiagnosticsError::ZeroReferenceLength);
    }
    Ok(EvalReport { examples, aggregates })
}
