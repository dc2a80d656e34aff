//! Count-based n-gram language model with interpolated absolute discounting.
//!
//! For a context `c` with successor total `N(c) > 0` and `D(c)` distinct
//! successors,
//!
//! ```text
//! p(w | c) = max(N(c, w) - d, 0) / N(c) + d * D(c) / N(c) * p(w | c')
//! ```
//!
//! where `c'` drops the oldest token of `c`. A context never seen falls back
//! to `c'` entirely, and the recursion bottoms out in the uniform
//! distribution over predictable tokens. `<pad>` and `<sos>` are never
//! predicted, so the uniform base has `size(V) - 2` outcomes and both carry
//! probability zero.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::textprep::{TokenId, TokenSequence, Vocabulary, EOS, PAD, SOS, UNK};

pub const DEFAULT_ORDER: usize = 3;
pub const DEFAULT_DISCOUNT: f64 = 0.75;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LmError {
    #[error("cannot train a language model on an empty corpus")]
    EmptyCorpus,
    #[error("n-gram order must be at least 1")]
    BadOrder,
    #[error("discount must lie in (0, 1), got {0}")]
    BadDiscount(f64),
    #[error("token id {id} out of range for vocabulary of size {size}")]
    IdOutOfRange { id: TokenId, size: usize },
    #[error("malformed language model file at line {line}: {reason}")]
    BadFile { line: usize, reason: String },
}

#[derive(Debug, Clone, Default, PartialEq)]
struct Successors {
    counts: HashMap<TokenId, u64>,
    total: u64,
}

/// Interpolated absolute-discounting n-gram model over target tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct NgramLm {
    order: usize,
    discount: f64,
    vocab: Vocabulary,
    /// `levels[n]` maps contexts of length `n` to their successor counts.
    levels: Vec<HashMap<Vec<TokenId>, Successors>>,
}

impl NgramLm {
    /// Counts n-grams of every order `1..=order`. Each sentence is padded
    /// with `order - 1` `<sos>` tokens and terminated by `<eos>`.
    pub fn train(
        corpus: &[TokenSequence],
        order: usize,
        discount: f64,
        vocab: &Vocabulary,
    ) -> Result<Self, LmError> {
        let mut lm = Self::empty(order, discount, vocab)?;
        if corpus.is_empty() {
            return Err(LmError::EmptyCorpus);
        }
        for sentence in corpus {
            lm.check_ids(&sentence.ids)?;
            let padded = lm.pad(&sentence.ids);
            for i in (order - 1)..padded.len() {
                for ctx_len in 0..order {
                    let context = padded[i - ctx_len..i].to_vec();
                    lm.add(context, padded[i], 1);
                }
            }
        }
        Ok(lm)
    }

    fn empty(order: usize, discount: f64, vocab: &Vocabulary) -> Result<Self, LmError> {
        if order == 0 {
            return Err(LmError::BadOrder);
        }
        if !(discount > 0.0 && discount < 1.0) {
            return Err(LmError::BadDiscount(discount));
        }
        Ok(NgramLm { order, discount, vocab: vocab.clone(), levels: vec![HashMap::new(); order] })
    }

    fn add(&mut self, context: Vec<TokenId>, token: TokenId, count: u64) {
        let succ = self.levels[context.len()].entry(context).or_default();
        *succ.counts.entry(token).or_default() += count;
        succ.total += count;
    }

    fn check_ids(&self, ids: &[TokenId]) -> Result<(), LmError> {
        match ids.iter().find(|&&id| id as usize >= self.vocab.len()) {
            Some(&id) => Err(LmError::IdOutOfRange { id, size: self.vocab.len() }),
            None => Ok(()),
        }
    }

    /// Stray `<pad>`/`<sos>` inside a sentence are counted as `<unk>`.
    fn pad(&self, ids: &[TokenId]) -> Vec<TokenId> {
        let mut padded = vec![SOS; self.order - 1];
        padded.extend(ids.iter().map(|&id| if id == PAD || id == SOS { UNK } else { id }));
        padded.push(EOS);
        padded
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Number of tokens the model can predict (`size(V)` minus `<pad>`, `<sos>`).
    pub fn support_size(&self) -> usize {
        self.vocab.len() - 2
    }

    /// Raw count of `token` after `context` (context length < order).
    pub fn count(&self, context: &[TokenId], token: TokenId) -> u64 {
        self.levels
            .get(context.len())
            .and_then(|level| level.get(context))
            .and_then(|s| s.counts.get(&token).copied())
            .unwrap_or(0)
    }

    /// `log p(token | context)`; only the last `order - 1` context ids are used.
    pub fn logprob(&self, context: &[TokenId], token: TokenId) -> Result<f64, LmError> {
        self.check_ids(context)?;
        self.check_ids(&[token])?;
        Ok(self.prob(context, token).ln())
    }

    pub(crate) fn prob(&self, context: &[TokenId], token: TokenId) -> f64 {
        if token == PAD || token == SOS {
            return 0.0;
        }
        let keep = context.len().min(self.order - 1);
        self.interpolated(&context[context.len() - keep..], token)
    }

    fn interpolated(&self, context: &[TokenId], token: TokenId) -> f64 {
        let lower = || {
            if context.is_empty() {
                1.0 / self.support_size() as f64
            } else {
                self.interpolated(&context[1..], token)
            }
        };
        match self.levels[context.len()].get(context) {
            Some(succ) if succ.total > 0 => {
                let total = succ.total as f64;
                let seen = succ.counts.get(&token).copied().unwrap_or(0) as f64;
                let discounted = (seen - self.discount).max(0.0) / total;
                let backoff = self.discount * succ.counts.len() as f64 / total;
                discounted + backoff * lower()
            }
            _ => lower(),
        }
    }

    /// `log p(token | history)` where `history` is the target generated so far
    /// (no `<sos>`); the context is padded on the left with `<sos>`.
    pub fn next_logprob(&self, history: &[TokenId], token: TokenId) -> f64 {
        let ctx_len = self.order - 1;
        let mut context = Vec::with_capacity(ctx_len);
        let tail = &history[history.len().saturating_sub(ctx_len)..];
        context.extend(std::iter::repeat_n(SOS, ctx_len - tail.len()));
        context.extend_from_slice(tail);
        self.prob(&context, token).ln()
    }

    /// Chain-rule log probability of a sentence, including its `<eos>`.
    pub fn sequence_logprob(&self, sentence: &TokenSequence) -> Result<f64, LmError> {
        self.check_ids(&sentence.ids)?;
        let padded = self.pad(&sentence.ids);
        let ctx_len = self.order - 1;
        Ok((ctx_len..padded.len())
            .map(|i| self.prob(&padded[i - ctx_len..i], padded[i]).ln())
            .sum())
    }

    /// `exp(-total logprob / predicted tokens)`, counting one `<eos>` per sentence.
    pub fn perplexity(&self, corpus: &[TokenSequence]) -> Result<f64, LmError> {
        if corpus.is_empty() {
            return Err(LmError::EmptyCorpus);
        }
        let mut total = 0.0;
        let mut predicted = 0usize;
        for sentence in corpus {
            total += self.sequence_logprob(sentence)?;
            predicted += sentence.len() + 1;
        }
        Ok((-total / predicted as f64).exp())
    }

    /// Header line, then `level \t context \t token \t count` sorted by
    /// level, context ids and token id.
    pub fn to_file_string(&self) -> String {
        let mut out = format!("ngramlm v1 order={} discount={}\n", self.order, self.discount);
        let name = |id: TokenId| self.vocab.tokens()[id as usize].as_str();
        for (ctx_len, level) in self.levels.iter().enumerate() {
            let sorted: BTreeMap<&Vec<TokenId>, &Successors> = level.iter().collect();
            for (context, succ) in sorted {
                let ctx: Vec<&str> = context.iter().map(|&id| name(id)).collect();
                let tokens: BTreeMap<TokenId, u64> =
                    succ.counts.iter().map(|(&k, &v)| (k, v)).collect();
                for (token, count) in tokens {
                    let _ = writeln!(
                        out,
                        "{}\t{}\t{}\t{}",
                        ctx_len + 1,
                        ctx.join(" "),
                        name(token),
                        count
                    );
                }
            }
        }
        out
    }

    /// Parses the text format; tokens are resolved against `vocab`.
    pub fn from_file_str(text: &str, vocab: &Vocabulary) -> Result<Self, LmError> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        let bad = |line: usize, reason: String| LmError::BadFile { line, reason };
        let (order, discount) = parse_header(header).ok_or_else(|| {
            bad(1, format!("expected \"ngramlm v1 order=<n> discount=<d>\", found {header:?}"))
        })?;
        let mut lm = Self::empty(order, discount, vocab).map_err(|e| bad(1, e.to_string()))?;
        let resolve = |tok: &str, line: usize| {
            vocab.id(tok).ok_or_else(|| bad(line, format!("token {tok:?} not in vocabulary")))
        };
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let fields: Vec<&str> = line.split('\t').collect();
            let [level, context, token, count] = fields[..] else {
                return Err(bad(lineno, "expected 4 tab-separated fields".into()));
            };
            let level: usize = level.parse().map_err(|_| bad(lineno, "bad level".into()))?;
            let context: Vec<TokenId> = context
                .split(' ')
                .filter(|t| !t.is_empty())
                .map(|t| resolve(t, lineno))
                .collect::<Result<_, _>>()?;
            if level == 0 || level > order || context.len() != level - 1 {
                return Err(bad(lineno, format!("context length does not match level {level}")));
            }
            let token = resolve(token, lineno)?;
            let count: u64 = count.parse().map_err(|_| bad(lineno, "bad count".into()))?;
            lm.add(context, token, count);
        }
        if lm.levels[0].is_empty() {
            return Err(LmError::EmptyCorpus);
        }
        Ok(lm)
    }
}

fn parse_header(header: &str) -> Option<(usize, f64)> {
    let rest = header.strip_prefix("ngramlm v1 ")?;
    let (order, discount) = rest.split_once(' ')?;
    let order = order.strip_prefix("order=")?.parse().ok()?;
    let discount = discount.strip_prefix("discount=")?.parse().ok()?;
    Some((order, discount))
}
