use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;

use seqdec::diagnostics::lm_weight_sweep;
use seqdec::lm::{DEFAULT_DISCOUNT, DEFAULT_ORDER};
use seqdec::{NgramLm, Role, TokenSequence, Vocabulary};

use super::{
    load_lm, load_vocab, read_corpus, read_sentences, tokenized_sources, write_output, ModelArgs,
    SearchArgs, Side,
};

fn encode_all(vocab: &Vocabulary, corpus: &[Vec<String>]) -> Vec<TokenSequence> {
    corpus.iter().map(|s| vocab.encode(s, Role::Target)).collect()
}

#[derive(Args, Debug)]
pub struct LmTrainArgs {
    /// Plain text or JSONL corpus.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "target")]
    side: Side,
    #[arg(long)]
    vocab: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    order: usize,
    #[arg(long, default_value_t = DEFAULT_DISCOUNT)]
    discount: f64,
    /// Report perplexity on this corpus after training.
    #[arg(long)]
    heldout: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

pub fn lm_train(args: LmTrainArgs) -> Result<()> {
    if args.order < 1 {
        return Err(super::usage("--order must be at least 1"));
    }
    if !(args.discount > 0.0 && args.discount < 1.0) {
        return Err(super::usage(format!("--discount must lie in (0, 1), got {}", args.discount)));
    }
    let vocab = load_vocab(&args.vocab)?;
    let corpus = read_sentences(&args.input, args.side)?;
    if corpus.is_empty() {
        bail!("{}: empty corpus", args.input.display());
    }
    let lm = NgramLm::train(&encode_all(&vocab, &corpus), args.order, args.discount, &vocab)?;
    write_output(Some(&args.out), &lm.to_file_string())?;
    println!("sentences: {}, order: {}, vocabulary size: {}", corpus.len(), lm.order(), vocab.len());
    if let Some(path) = &args.heldout {
        let heldout = read_sentences(path, args.side)?;
        let ppl = lm.perplexity(&encode_all(&vocab, &heldout)).context("held-out corpus")?;
        println!("held-out perplexity: {ppl:.6}");
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct LmScoreArgs {
    #[arg(long)]
    lm: PathBuf,
    #[arg(long)]
    vocab: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "target")]
    side: Side,
}

#[derive(Serialize)]
struct LmScore {
    sentences: usize,
    predicted_tokens: usize,
    logprob: f64,
    perplexity: f64,
    vocab_size: usize,
}

pub fn lm_score(args: LmScoreArgs) -> Result<()> {
    let vocab = load_vocab(&args.vocab)?;
    let lm = load_lm(&args.lm, &vocab)?;
    let corpus = encode_all(&vocab, &read_sentences(&args.input, args.side)?);
    if corpus.is_empty() {
        bail!("{}: empty corpus", args.input.display());
    }
    let mut logprob = 0.0;
    for s in &corpus {
        logprob += lm.sequence_logprob(s)?;
    }
    let score = LmScore {
        sentences: corpus.len(),
        predicted_tokens: corpus.iter().map(|s| s.len() + 1).sum(),
        logprob,
        perplexity: lm.perplexity(&corpus)?,
        vocab_size: vocab.len(),
    };
    println!("{}", serde_json::to_string(&score)?);
    Ok(())
}

#[derive(Args, Debug)]
pub struct LmSweepArgs {
    /// JSONL corpus with targets.
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated LM weights.
    #[arg(long, value_delimiter = ',', required = true)]
    weights: Vec<f64>,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn lm_sweep(args: LmSweepArgs) -> Result<()> {
    if args.weights.iter().any(|w| w.is_nan() || *w < 0.0) {
        return Err(super::usage("--weights must be non-negative"));
    }
    let records = read_corpus(&args.input)?;
    let sources = tokenized_sources(&args.input, &records)?;
    let (model, lm) = args.model.load(&sources)?;
    let Some(lm) = lm else {
        return Err(super::usage("lm-sweep needs --lm"));
    };
    let vocab = model.vocab();
    let mut refs = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        let Some(t) = &r.target else {
            bail!("{}:{}: record has no target", args.input.display(), i + 1);
        };
        refs.push(vocab.encode(&seqdec::textprep::tokenize(t), Role::Target).ids);
    }
    let ids: Vec<_> = sources.iter().map(|s| vocab.encode(s, Role::Source).ids).collect();
    let points = lm_weight_sweep(
        model.model(),
        &lm,
        &ids,
        &refs,
        &args.search.config(),
        &args.weights,
        args.search.parallelism(),
    )?;
    write_output(args.out.as_deref(), &(serde_json::to_string_pretty(&points)? + "\n"))
}
