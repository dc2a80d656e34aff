mod common;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::*;
use seqdec::decoder::score_sequence;
use seqdec::scoring::{coverage_penalty, repetition_penalty};
use seqdec::textprep::{build_vocab, tokenize, EOS, SOS};
use seqdec::{ConditionalModel, ScoreConfig, Scorer, TokenId};

/// Final score rebuilt term by term from raw model and LM queries.
fn composed(
    model: &dyn ConditionalModel,
    lm: &seqdec::NgramLm,
    source: &[TokenId],
    target: &[TokenId],
    cfg: &ScoreConfig,
) -> f64 {
    let mut prefix = vec![SOS];
    let mut total = 0.0;
    let mut rows = Vec::new();
    for &t in target {
        let out = model.step(source, &prefix).unwrap();
        let mut context = vec![SOS; lm.order() - 1];
        context.extend_from_slice(&prefix[1..]);
        let ctx = &context[context.len() - (lm.order() - 1)..];
        total += out.logprobs[t as usize] + cfg.lm_weight * lm.logprob(ctx, t).unwrap();
        rows.push(out.attention_row);
        prefix.push(t);
    }
    total += repetition_penalty(&rows, cfg.rep_threshold, cfg.rep_penalty);
    let len = target.len() as f64;
    let adjusted = if cfg.length_normalize { total / len } else { total + cfg.length_bonus * len };
    adjusted + cfg.coverage_weight * coverage_penalty(&rows, cfg.coverage_floor)
}

#[test]
fn final_score_composes_additively() {
    let mut rng = StdRng::seed_from_u64(21);
    for round in 0..30 {
        let (model, source) = random_table(&mut rng, 4);
        let lm = random_lm(&mut rng);
        let len = rng.gen_range(0..=3);
        let mut target: Vec<TokenId> = (0..len).map(|_| rng.gen_range(A..=C)).collect();
        target.push(EOS);
        let cfg = ScoreConfig {
            lm_weight: 0.5,
            rep_threshold: 0.4,
            rep_penalty: 1.5,
            coverage_weight: 1.0,
            length_bonus: if round % 2 == 0 { 0.3 } else { 0.0 },
            length_normalize: round % 2 == 1,
            ..Default::default()
        };
        let scorer = Scorer::new(&cfg, Some(&lm)).unwrap();
        let got = score_sequence(&model, &source, &target, &scorer).unwrap().final_score;
        let want = composed(&model, &lm, &source, &target, &cfg);
        assert!((got - want).abs() < 1e-9, "round {round}: {got} vs {want}");
    }
}

#[test]
fn tokenizer_and_vocab_hand_examples() {
    assert_eq!(tokenize("It's no use"), ["It", "'s", "no", "use"]);
    assert!(tokenize("").is_empty());
    assert_eq!(tokenize("a   b"), ["a", "b"]);

    let corpus: Vec<Vec<&str>> = vec![vec!["a", "b", "a", "c", "b", "a"]];
    let v = build_vocab(&corpus, 6).unwrap();
    assert_eq!(&v.tokens()[4..], ["a", "b"]);
    assert_eq!(v.encode(&["c"], seqdec::Role::Source).ids, vec![seqdec::textprep::UNK]);
    let tie = build_vocab(&[vec!["y", "x", "y", "x"]], 5).unwrap();
    assert_eq!(&tie.tokens()[4..], ["x"]);
}
