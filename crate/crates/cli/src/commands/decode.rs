use std::path::PathBuf;

use anyhow::{anyhow, bail, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use tracing::info;

use seqdec::diagnostics::{score_ratio_report, ScoreTriple};
use seqdec::textprep::{tokenize, EOS};
use seqdec::{decode_corpus, DecodeResult, Hypothesis, Role, Scorer, Vocabulary};

use super::{read_corpus, read_file, tokenized_sources, write_output, ModelArgs, ScoreArgs, SearchArgs};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisRecord {
    /// Generated tokens without `<sos>` and `<eos>`.
    pub tokens: Vec<String>,
    pub model_logprob: f64,
    pub score: f64,
    pub terminated: bool,
}

/// One output line of `decode`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeRecord {
    pub source: Vec<String>,
    /// Best first.
    pub hypotheses: Vec<HypothesisRecord>,
    /// Attention rows of the best hypothesis, one per generated token.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attention: Option<Vec<Vec<f64>>>,
}

fn hypothesis_record(vocab: &Vocabulary, h: &Hypothesis, score: f64) -> Result<HypothesisRecord> {
    Ok(HypothesisRecord {
        tokens: vocab.decode(h.target())?,
        model_logprob: h.model_logprob,
        score,
        terminated: h.terminated,
    })
}

fn decode_record(
    vocab: &Vocabulary,
    source: Vec<String>,
    result: &DecodeResult,
    nbest: usize,
    emit_attention: bool,
) -> Result<DecodeRecord> {
    let hypotheses = if result.finalists.is_empty() {
        vec![hypothesis_record(vocab, &result.best.hypothesis, result.best.final_score)?]
    } else {
        result
            .finalists
            .iter()
            .take(nbest)
            .map(|f| hypothesis_record(vocab, &f.hypothesis, f.final_score))
            .collect::<Result<_>>()?
    };
    Ok(DecodeRecord {
        source,
        hypotheses,
        attention: emit_attention.then(|| result.best.hypothesis.attention_rows.clone()),
    })
}

#[derive(Args, Debug)]
pub struct DecodeArgs {
    /// JSONL corpus of {"source": ..., "target": ...} records.
    #[arg(long)]
    input: PathBuf,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Hypotheses to emit per source.
    #[arg(long, default_value_t = 1)]
    nbest: usize,
    /// Include the attention matrix of the best hypothesis.
    #[arg(long)]
    emit_attention: bool,
}

pub fn decode(args: DecodeArgs) -> Result<()> {
    if args.nbest < 1 {
        return Err(super::usage("--nbest must be at least 1"));
    }
    let records = read_corpus(&args.input)?;
    let sources = tokenized_sources(&args.input, &records)?;
    let (model, lm) = args.model.load(&sources)?;
    let vocab = model.vocab();
    let ids: Vec<_> = sources.iter().map(|s| vocab.encode(s, Role::Source).ids).collect();
    let config = args.search.config();
    let results = decode_corpus(model.model(), &ids, &config, lm.as_ref(), args.search.parallelism())
        .map_err(|e| match e {
            seqdec::DecodeError::AtExample { index, source } => {
                anyhow!("{}:{}: {source}", args.input.display(), index + 1)
            }
            other => other.into(),
        })?;
    let mut out = String::new();
    let mut unterminated = 0;
    for (source, result) in sources.into_iter().zip(&results) {
        unterminated += usize::from(!result.terminated());
        let record = decode_record(vocab, source, result, args.nbest, args.emit_attention)?;
        out.push_str(&serde_json::to_string(&record)?);
        out.push('\n');
    }
    info!(sentences = results.len(), unterminated, "decoded");
    write_output(args.out.as_deref(), &out)
}

#[derive(Args, Debug)]
pub struct ScoreRatioArgs {
    /// JSONL corpus with targets.
    #[arg(long)]
    input: PathBuf,
    /// Output of `decode` on the same corpus.
    #[arg(long)]
    decoded: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    score: ScoreArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn score_ratio(args: ScoreRatioArgs) -> Result<()> {
    let records = read_corpus(&args.input)?;
    let sources = tokenized_sources(&args.input, &records)?;
    let decoded_text = read_file(&args.decoded)?;
    let decoded: Vec<DecodeRecord> = decoded_text
        .lines()
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| anyhow!("{}:{}: {e}", args.decoded.display(), i + 1)))
        .collect::<Result<_>>()?;
    if decoded.len() != records.len() {
        bail!("{} decoded records but {} corpus records", decoded.len(), records.len());
    }
    let (model, lm) = args.model.load(&sources)?;
    let vocab = model.vocab();
    let with_eos = |mut ids: Vec<u32>, terminated: bool| {
        if terminated {
            ids.push(EOS);
        }
        ids
    };
    let mut triples = Vec::with_capacity(records.len());
    for (i, ((rec, src), dec)) in records.iter().zip(&sources).zip(&decoded).enumerate() {
        let Some(target) = &rec.target else {
            bail!("{}:{}: record has no target", args.input.display(), i + 1);
        };
        let best = dec
            .hypotheses
            .first()
            .ok_or_else(|| anyhow!("{}:{}: no hypotheses", args.decoded.display(), i + 1))?;
        triples.push(ScoreTriple {
            source: vocab.encode(src, Role::Source).ids,
            decoded: with_eos(vocab.encode(&best.tokens, Role::Target).ids, best.terminated),
            gold: with_eos(vocab.encode(&tokenize(target), Role::Target).ids, true),
        });
    }
    let config = args.score.config();
    let scorer = Scorer::new(&config, lm.as_ref()).map_err(|e| super::usage(e.to_string()))?;
    let report = score_ratio_report(model.model(), &scorer, &triples)?;
    write_output(args.out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))
}
