use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::textprep::{TokenId, Vocabulary};

use super::{check_inputs, ConditionalModel, ModelError, StepOutput, STEP_TOLERANCE};

/// Probability vectors must sum to 1 within this before renormalization.
pub const TABLE_TOLERANCE: f64 = 1e-9;

/// On-disk fixture: `{"vocab": [...], "entries": [...]}`.
///
/// `vocab` lists every token in id order, starting with the four specials.
/// Entry tokens may be given as strings or as integer ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableFixture {
    pub vocab: Vec<String>,
    pub entries: Vec<TableEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub source: Vec<TokenRef>,
    pub prefix: Vec<TokenRef>,
    pub probs: Vec<f64>,
    pub attention: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TokenRef {
    Id(TokenId),
    Token(String),
}

#[derive(Debug, Clone, PartialEq)]
struct Row {
    logprobs: Vec<f64>,
    probs: Vec<f64>,
    attention: Vec<f64>,
}

/// Explicit lookup table from `(source, prefix)` to a step distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct TableModel {
    vocab: Vocabulary,
    rows: BTreeMap<(Vec<TokenId>, Vec<TokenId>), Row>,
}

impl TableModel {
    pub fn new(vocab: Vocabulary) -> Self {
        TableModel { vocab, rows: BTreeMap::new() }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Adds (or replaces) one entry. `probs` is renormalized if it sums to 1
    /// within [`TABLE_TOLERANCE`]; otherwise the entry is rejected.
    pub fn insert(
        &mut self,
        source: Vec<TokenId>,
        prefix: Vec<TokenId>,
        mut probs: Vec<f64>,
        attention: Vec<f64>,
    ) -> Result<(), ModelError> {
        let key_desc = || format!("source {source:?}, prefix {prefix:?}");
        check_inputs(&source, &prefix, self.vocab.len())
            .map_err(|e| ModelError::BadFixture(format!("{}: {e}", key_desc())))?;
        if probs.len() != self.vocab.len() {
            return Err(ModelError::BadFixture(format!(
                "{}: {} probabilities for a vocabulary of {}",
                key_desc(),
                probs.len(),
                self.vocab.len()
            )));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(ModelError::BadFixture(format!("{}: invalid probability", key_desc())));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > TABLE_TOLERANCE {
            return Err(ModelError::BadFixture(format!(
                "{}: probabilities sum to {total}",
                key_desc()
            )));
        }
        // Already-normalized vectors are kept bit-exact so fixtures roundtrip.
        if (total - 1.0).abs() > 4.0 * f64::EPSILON {
            probs.iter_mut().for_each(|p| *p /= total);
        }
        if attention.len() != source.len()
            || attention.iter().any(|a| !a.is_finite() || *a < 0.0)
            || (attention.iter().sum::<f64>() - 1.0).abs() > STEP_TOLERANCE
        {
            return Err(ModelError::BadFixture(format!(
                "{}: attention must be a distribution over {} source positions",
                key_desc(),
                source.len()
            )));
        }
        let logprobs = probs.iter().map(|p| p.ln()).collect();
        self.rows.insert((source, prefix), Row { logprobs, probs, attention });
        Ok(())
    }

    /// The stored probability vector for a key.
    pub fn probs(&self, source: &[TokenId], prefix: &[TokenId]) -> Option<&[f64]> {
        self.rows.get(&(source.to_vec(), prefix.to_vec())).map(|r| r.probs.as_slice())
    }

    pub fn from_fixture(fixture: TableFixture) -> Result<Self, ModelError> {
        let vocab = Vocabulary::from_file_str(&fixture.vocab.join("\n"))
            .map_err(|e| ModelError::BadFixture(e.to_string()))?;
        if vocab.len() != fixture.vocab.len() {
            return Err(ModelError::BadFixture("vocabulary contains duplicates".into()));
        }
        let mut model = TableModel::new(vocab);
        for (i, entry) in fixture.entries.into_iter().enumerate() {
            let source = model.resolve(&entry.source, i)?;
            let prefix = model.resolve(&entry.prefix, i)?;
            model.insert(source, prefix, entry.probs, entry.attention)?;
        }
        Ok(model)
    }

    fn resolve(&self, refs: &[TokenRef], entry: usize) -> Result<Vec<TokenId>, ModelError> {
        refs.iter()
            .map(|r| match r {
                TokenRef::Id(id) if (*id as usize) < self.vocab.len() => Ok(*id),
                TokenRef::Token(t) => self.vocab.id(t).ok_or_else(|| {
                    ModelError::BadFixture(format!("entry {entry}: unknown token {t:?}"))
                }),
                TokenRef::Id(id) => {
                    Err(ModelError::BadFixture(format!("entry {entry}: id {id} out of range")))
                }
            })
            .collect()
    }

    pub fn to_fixture(&self) -> TableFixture {
        let name = |ids: &[TokenId]| -> Vec<TokenRef> {
            ids.iter().map(|&id| TokenRef::Token(self.vocab.tokens()[id as usize].clone())).collect()
        };
        TableFixture {
            vocab: self.vocab.tokens().to_vec(),
            entries: self
                .rows
                .iter()
                .map(|((source, prefix), row)| TableEntry {
                    source: name(source),
                    prefix: name(prefix),
                    probs: row.probs.clone(),
                    attention: row.attention.clone(),
                })
                .collect(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self, ModelError> {
        let fixture: TableFixture =
            serde_json::from_str(text).map_err(|e| ModelError::BadFixture(e.to_string()))?;
        Self::from_fixture(fixture)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_fixture()).expect("fixture serializes")
    }

    fn names(&self, ids: &[TokenId]) -> Vec<String> {
        ids.iter()
            .map(|&id| self.vocab.token(id).map(str::to_string).unwrap_or_else(|_| id.to_string()))
            .collect()
    }
}

impl ConditionalModel for TableModel {
    fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    fn step(&self, source: &[TokenId], prefix: &[TokenId]) -> Result<StepOutput, ModelError> {
        check_inputs(source, prefix, self.vocab.len())?;
        match self.rows.get(&(source.to_vec(), prefix.to_vec())) {
            Some(row) => Ok(StepOutput {
                logprobs: row.logprobs.clone(),
                attention_row: row.attention.clone(),
            }),
            None => Err(ModelError::MissingEntry {
                source_tokens: self.names(source),
                prefix: self.names(prefix),
            }),
        }
    }
}
