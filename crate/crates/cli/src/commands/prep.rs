use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use tracing::info;

use seqdec::textprep::{apply_bpe, build_vocab, learn_bpe};
use seqdec::BpeMerges;

use super::{read_file, read_sentences, write_output, Side};

#[derive(Args, Debug)]
pub struct VocabBuildArgs {
    /// Plain text or JSONL corpus.
    #[arg(long)]
    input: PathBuf,
    /// Which side of JSONL records to read.
    #[arg(long, value_enum, default_value = "source")]
    side: Side,
    /// Largest vocabulary size, specials included (at least 4).
    #[arg(long, default_value_t = 30000)]
    max_size: usize,
    #[arg(long)]
    out: PathBuf,
}

pub fn vocab_build(args: VocabBuildArgs) -> Result<()> {
    if args.max_size < 4 {
        return Err(super::usage(format!("--max-size must be at least 4, got {}", args.max_size)));
    }
    let corpus = read_sentences(&args.input, args.side)?;
    if corpus.is_empty() {
        bail!("{}: empty corpus", args.input.display());
    }
    let vocab = build_vocab(&corpus, args.max_size)?;
    write_output(Some(&args.out), &vocab.to_file_string())?;
    info!(sentences = corpus.len(), "vocabulary built");
    println!("vocabulary size: {}", vocab.len());
    Ok(())
}

#[derive(Args, Debug)]
pub struct BpeLearnArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "source")]
    side: Side,
    /// Number of merges to learn (fewer if pair counts drop below 2).
    #[arg(long)]
    merges: usize,
    #[arg(long)]
    out: PathBuf,
}

pub fn bpe_learn(args: BpeLearnArgs) -> Result<()> {
    let corpus = read_sentences(&args.input, args.side)?;
    if corpus.is_empty() {
        bail!("{}: empty corpus", args.input.display());
    }
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for word in corpus.iter().flatten() {
        *counts.entry(word.clone()).or_default() += 1;
    }
    let merges = learn_bpe(&counts, args.merges);
    write_output(Some(&args.out), &merges.to_file_string())?;
    println!("merges learned: {}", merges.len());
    Ok(())
}

#[derive(Args, Debug)]
pub struct BpeApplyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "source")]
    side: Side,
    /// Merges file written by bpe-learn.
    #[arg(long)]
    merges: PathBuf,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn bpe_apply(args: BpeApplyArgs) -> Result<()> {
    let merges = BpeMerges::from_file_str(&read_file(&args.merges)?)?;
    let corpus = read_sentences(&args.input, args.side)?;
    let mut out = String::new();
    for sentence in &corpus {
        let pieces: Vec<String> = sentence.iter().flat_map(|w| apply_bpe(w, &merges)).collect();
        out.push_str(&pieces.join(" "));
        out.push('\n');
    }
    write_output(args.out.as_deref(), &out)
}
