use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::TextprepError;

/// Dense vocabulary id.
pub type TokenId = u32;

pub const PAD: TokenId = 0;
pub const UNK: TokenId = 1;
pub const SOS: TokenId = 2;
pub const EOS: TokenId = 3;

const SPECIALS: [&str; 4] = ["<pad>", "<unk>", "<sos>", "<eos>"];

/// Bidirectional token/id mapping. Ids 0..=3 are always `<pad>`, `<unk>`,
/// `<sos>`, `<eos>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
}

impl Vocabulary {
    /// A vocabulary holding only the four special tokens.
    pub fn specials_only() -> Self {
        let mut vocab = Vocabulary { tokens: Vec::new(), index: HashMap::new() };
        for tok in SPECIALS {
            vocab.push(tok.to_string());
        }
        vocab
    }

    /// Builds a vocabulary from the specials followed by `tokens` in order.
    /// Duplicates and literal special tokens are skipped.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Self::specials_only();
        for tok in tokens {
            let tok = tok.into();
            if !vocab.index.contains_key(&tok) {
                vocab.push(tok);
            }
        }
        vocab
    }

    fn push(&mut self, token: String) {
        let id = self.tokens.len() as TokenId;
        self.index.insert(token.clone(), id);
        self.tokens.push(token);
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    /// Always false; a vocabulary holds at least the specials.
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    /// Id of `token`, or the `<unk>` id.
    pub fn id_or_unk(&self, token: &str) -> TokenId {
        self.id(token).unwrap_or(UNK)
    }

    pub fn token(&self, id: TokenId) -> Result<&str, TextprepError> {
        self.tokens
            .get(id as usize)
            .map(String::as_str)
            .ok_or(TextprepError::IdOutOfRange { id, size: self.tokens.len() })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S], role: Role) -> TokenSequence {
        TokenSequence {
            ids: tokens.iter().map(|t| self.id_or_unk(t.as_ref())).collect(),
            role,
        }
    }

    pub fn decode(&self, ids: &[TokenId]) -> Result<Vec<String>, TextprepError> {
        ids.iter().map(|&id| self.token(id).map(str::to_string)).collect()
    }

    /// One token per line; the line number is the id.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for tok in &self.tokens {
            let _ = writeln!(out, "{tok}");
        }
        out
    }

    pub fn from_file_str(text: &str) -> Result<Self, TextprepError> {
        let lines: Vec<&str> = text.lines().collect();
        if lines.len() < 4 {
            return Err(TextprepError::BadVocabFile(format!(
                "expected at least 4 lines, found {}",
                lines.len()
            )));
        }
        for (i, special) in SPECIALS.iter().enumerate() {
            if lines[i] != *special {
                return Err(TextprepError::BadVocabFile(format!(
                    "line {} must be {special}, found {:?}",
                    i + 1,
                    lines[i]
                )));
            }
        }
        let mut vocab = Self::specials_only();
        for (i, line) in lines.iter().enumerate().skip(4) {
            if line.is_empty() {
                return Err(TextprepError::BadVocabFile(format!("empty token at line {}", i + 1)));
            }
            if vocab.index.contains_key(*line) {
                return Err(TextprepError::BadVocabFile(format!(
                    "duplicate token {line:?} at line {}",
                    i + 1
                )));
            }
            vocab.push(line.to_string());
        }
        Ok(vocab)
    }
}

/// Whether a sequence is a source `X` or a target `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Source,
    Target,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub ids: Vec<TokenId>,
    pub role: Role,
}

impl TokenSequence {
    pub fn new(ids: Vec<TokenId>, role: Role) -> Self {
        TokenSequence { ids, role }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Keeps the `max_size - 4` most frequent tokens (ties broken by lexicographic
/// order) after the four specials.
pub fn build_vocab<S: AsRef<str>>(
    corpus: &[Vec<S>],
    max_size: usize,
) -> Result<Vocabulary, TextprepError> {
    if max_size < 4 {
        return Err(TextprepError::MaxSizeTooSmall(max_size));
    }
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for sentence in corpus {
        for tok in sentence {
            let tok = tok.as_ref();
            if SPECIALS.contains(&tok) || tok.is_empty() {
                continue;
            }
            *counts.entry(tok).or_default() += 1;
        }
    }
    let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(max_size - 4);
    Ok(Vocabulary::from_tokens(ranked.into_iter().map(|(t, _)| t)))
}
