//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;
use seqdec::textprep::{EOS, SOS};
use seqdec::{NgramLm, Role, TableModel, TokenId, TokenSequence, Vocabulary};

pub const A: TokenId = 4;
pub const B: TokenId = 5;
pub const C: TokenId = 6;

fn random_simplex(rng: &mut StdRng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Content tokens `a b c`; every prefix of up to `max_steps - 1` generated
/// tokens gets a random distribution over `<eos> a b c` and a random
/// attention row over the source.
pub fn random_table(rng: &mut StdRng, max_steps: usize) -> (TableModel, Vec<TokenId>) {
    let vocab = Vocabulary::from_tokens(["a", "b", "c"]);
    let source_len = rng.gen_range(1..=4);
    let source: Vec<TokenId> = (0..source_len).map(|_| rng.gen_range(A..=C)).collect();
    let mut model = TableModel::new(vocab);
    let mut frontier: Vec<Vec<TokenId>> = vec![vec![SOS]];
    for _ in 0..max_steps {
        let mut next = Vec::new();
        for prefix in frontier {
            let p = random_simplex(rng, 4);
            let probs = vec![0.0, 0.0, 0.0, p[0], p[1], p[2], p[3]];
            let attention = random_simplex(rng, source_len);
            model.insert(source.clone(), prefix.clone(), probs, attention).unwrap();
            for t in A..=C {
                let mut child = prefix.clone();
                child.push(t);
                next.push(child);
            }
        }
        frontier = next;
    }
    (model, source)
}

/// Order-2 LM over the `a b c` vocabulary trained on random sentences.
pub fn random_lm(rng: &mut StdRng) -> NgramLm {
    let vocab = Vocabulary::from_tokens(["a", "b", "c"]);
    let corpus: Vec<TokenSequence> = (0..12)
        .map(|_| {
            let len = rng.gen_range(1..=5);
            TokenSequence::new((0..len).map(|_| rng.gen_range(A..=C)).collect(), Role::Target)
        })
        .collect();
    NgramLm::train(&corpus, 2, 0.75, &vocab).unwrap()
}

/// `n` content tokens `w0..`.
pub fn word_vocab(n: usize) -> Vocabulary {
    Vocabulary::from_tokens((0..n).map(|i| format!("w{i}")))
}

pub fn random_source(rng: &mut StdRng, vocab: &Vocabulary, min_len: usize, max_len: usize) -> Vec<TokenId> {
    let len = rng.gen_range(min_len..=max_len);
    (0..len).map(|_| rng.gen_range(4..vocab.len() as TokenId)).collect()
}

fn dist(eos: f64, a: f64, b: f64, c: f64) -> Vec<f64> {
    vec![0.0, 0.0, 0.0, eos, a, b, c]
}

/// Greedy takes `a` (.6) then `a` (.7) then stops (.5): `[a a]` at .21.
/// The optimum is `[b]` at .4, found by a width-2 beam.
pub fn delayed_reward() -> TableModel {
    let mut m = TableModel::new(Vocabulary::from_tokens(["a", "b", "c"]));
    let src = vec![A];
    let mut put = |prefix: &[TokenId], p: Vec<f64>| {
        let mut full = vec![SOS];
        full.extend_from_slice(prefix);
        m.insert(src.clone(), full, p, vec![1.0]).unwrap();
    };
    put(&[], dist(0.0, 0.6, 0.4, 0.0));
    put(&[A], dist(0.3, 0.7, 0.0, 0.0));
    put(&[B], dist(1.0, 0.0, 0.0, 0.0));
    put(&[A, A], dist(0.5, 0.5, 0.0, 0.0));
    m
}

/// Source of two tokens. The likelier branch loops `a b a b ...` with
/// attention alternating between the two source positions and only stops
/// once `max_steps` is reached; `c <eos>` stops at once with attention moving
/// forward.
pub fn cyclic(max_steps: usize) -> (TableModel, Vec<TokenId>) {
    let mut m = TableModel::new(Vocabulary::from_tokens(["a", "b", "c"]));
    let src = vec![A, B];
    let first = vec![1.0, 0.0];
    let second = vec![0.0, 1.0];
    m.insert(src.clone(), vec![SOS], dist(0.0, 0.6, 0.0, 0.4), first.clone()).unwrap();
    m.insert(src.clone(), vec![SOS, C], dist(1.0, 0.0, 0.0, 0.0), second.clone()).unwrap();
    let mut prefix = vec![SOS, A];
    while prefix.len() < max_steps {
        let next = if prefix.last() == Some(&A) { B } else { A };
        let row = if next == A { first.clone() } else { second.clone() };
        let p = if next == A { dist(0.0, 1.0, 0.0, 0.0) } else { dist(0.0, 0.0, 1.0, 0.0) };
        m.insert(src.clone(), prefix.clone(), p, row).unwrap();
        prefix.push(next);
    }
    let row = if prefix.last() == Some(&A) { second } else { first };
    m.insert(src.clone(), prefix, dist(1.0, 0.0, 0.0, 0.0), row).unwrap();
    (m, src)
}

pub fn with_eos(ids: &[TokenId]) -> Vec<TokenId> {
    let mut v = ids.to_vec();
    v.push(EOS);
    v
}
