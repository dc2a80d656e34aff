//! Preprocessing: tokenization, vocabulary construction and BPE subwords.

mod bpe;
mod tokenize;
mod vocab;

pub use bpe::{apply_bpe, join_subwords, learn_bpe, subword_inventory, BpeMerges, END_OF_WORD};
pub use tokenize::{detokenize, tokenize};
pub use vocab::{build_vocab, Role, TokenId, TokenSequence, Vocabulary, EOS, PAD, SOS, UNK};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TextprepError {
    #[error("vocabulary max_size must be at least 4 (got {0})")]
    MaxSizeTooSmall(usize),
    #[error("token id {id} out of range for vocabulary of size {size}")]
    IdOutOfRange { id: TokenId, size: usize },
    #[error("malformed vocabulary file: {0}")]
    BadVocabFile(String),
    #[error("malformed merges file at line {line}: {reason}")]
    BadMergesFile { line: usize, reason: String },
}
