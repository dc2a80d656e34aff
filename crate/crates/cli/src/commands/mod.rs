pub mod decode;
pub mod evaluate;
pub mod lm;
pub mod prep;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use tracing::debug;

use seqdec::textprep::tokenize;
use seqdec::{
    BeamConfig, ConditionalModel, CopyChannelModel, NgramLm, ScoreConfig, TableModel, Vocabulary,
};

/// Invalid flags or flag combinations; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// One line of a JSONL corpus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub source: String,
    #[serde(default)]
    pub target: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Source,
    Target,
}

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

pub fn read_corpus(path: &Path) -> Result<Vec<CorpusRecord>> {
    let text = read_file(path)?;
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| anyhow!("{}:{}: {e}", path.display(), i + 1))
        })
        .collect()
}

/// Tokenized sentences from a file of plain text lines or JSONL corpus
/// records (taking `side` from each record).
pub fn read_sentences(path: &Path, side: Side) -> Result<Vec<Vec<String>>> {
    let text = read_file(path)?;
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            if !line.trim_start().starts_with('{') {
                return Ok(tokenize(line));
            }
            let rec: CorpusRecord = serde_json::from_str(line)
                .map_err(|e| anyhow!("{}:{}: {e}", path.display(), i + 1))?;
            match side {
                Side::Source => Ok(tokenize(&rec.source)),
                Side::Target => rec
                    .target
                    .map(|t| tokenize(&t))
                    .ok_or_else(|| anyhow!("{}:{}: record has no target", path.display(), i + 1)),
            }
        })
        .collect()
}

pub fn load_vocab(path: &Path) -> Result<Vocabulary> {
    Vocabulary::from_file_str(&read_file(path)?).with_context(|| format!("in {}", path.display()))
}

pub fn load_lm(path: &Path, vocab: &Vocabulary) -> Result<NgramLm> {
    NgramLm::from_file_str(&read_file(path)?, vocab).with_context(|| format!("in {}", path.display()))
}

/// `copy:<epsilon>` or `table:<fixture path>`.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Copy(f64),
    Table(PathBuf),
}

impl FromStr for ModelSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            Some(("copy", eps)) => {
                let eps: f64 = eps.parse().map_err(|_| format!("bad epsilon '{eps}'"))?;
                if !(0.0..0.5).contains(&eps) {
                    return Err(format!("epsilon must lie in [0, 0.5), got {eps}"));
                }
                Ok(ModelSpec::Copy(eps))
            }
            Some(("table", path)) if !path.is_empty() => Ok(ModelSpec::Table(PathBuf::from(path))),
            _ => Err("expected copy:<epsilon> or table:<path>".into()),
        }
    }
}

pub enum LoadedModel {
    Copy(CopyChannelModel),
    Table(TableModel),
}

impl LoadedModel {
    /// Loads the model. A copy model takes its vocabulary from `vocab`, or
    /// else from every token of `fallback_corpus`.
    pub fn load(spec: &ModelSpec, vocab: Option<&Path>, fallback_corpus: &[Vec<String>]) -> Result<Self> {
        match spec {
            ModelSpec::Copy(eps) => {
                let vocab = match vocab {
                    Some(p) => load_vocab(p)?,
                    None => seqdec::textprep::build_vocab(fallback_corpus, usize::MAX)?,
                };
                debug!(size = vocab.len(), "copy model vocabulary");
                Ok(LoadedModel::Copy(CopyChannelModel::new(*eps, vocab)?))
            }
            ModelSpec::Table(path) => {
                if vocab.is_some() {
                    tracing::warn!("--vocab is ignored for table models");
                }
                let model = TableModel::from_json_str(&read_file(path)?)
                    .with_context(|| format!("in {}", path.display()))?;
                Ok(LoadedModel::Table(model))
            }
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        match self {
            LoadedModel::Copy(m) => m.vocab(),
            LoadedModel::Table(m) => m.vocab(),
        }
    }

    pub fn model(&self) -> &dyn ConditionalModel {
        match self {
            LoadedModel::Copy(m) => m,
            LoadedModel::Table(m) => m,
        }
    }

    pub fn lm(&self, path: Option<&Path>) -> Result<Option<NgramLm>> {
        let Some(path) = path else { return Ok(None) };
        let lm = load_lm(path, self.vocab())?;
        if lm.vocab() != self.vocab() {
            bail!("language model vocabulary differs from the model vocabulary");
        }
        Ok(Some(lm))
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be a finite value >= 0, got {s}"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be a finite value > 0, got {s}"))
    }
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("must lie in (0, 1], got {s}"))
    }
}

fn at_least_one(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(format!("must be an integer >= 1, got {s}")),
    }
}

/// Scoring flags; unset flags keep the identity configuration.
#[derive(Args, Debug, Clone)]
pub struct ScoreArgs {
    /// Weight of the language model in shallow fusion.
    #[arg(long, value_parser = non_negative)]
    lm_weight: Option<f64>,
    /// Per-token bonus added to the final score.
    #[arg(long, value_parser = non_negative, conflicts_with = "length_norm")]
    length_bonus: Option<f64>,
    /// Divide the final score by the hypothesis length.
    #[arg(long)]
    length_norm: bool,
    #[arg(long, value_parser = non_negative)]
    coverage_weight: Option<f64>,
    #[arg(long, value_parser = positive)]
    coverage_floor: Option<f64>,
    /// Attention weight at which a source position counts as attended.
    #[arg(long, value_parser = unit_interval)]
    rep_threshold: Option<f64>,
    /// Charge for returning to an earlier-attended source position.
    #[arg(long, value_parser = non_negative)]
    rep_penalty: Option<f64>,
    /// Penalty per sibling rank.
    #[arg(long, value_parser = non_negative)]
    diversity_gamma: Option<f64>,
    #[arg(long, value_parser = positive)]
    temperature: Option<f64>,
    /// Enforce the target length window built from --len-delta and --len-ratio.
    #[arg(long)]
    window: bool,
    #[arg(long, value_parser = non_negative)]
    len_delta: Option<f64>,
    #[arg(long, value_parser = non_negative)]
    len_ratio: Option<f64>,
}

impl ScoreArgs {
    pub fn config(&self) -> ScoreConfig {
        let d = ScoreConfig::default();
        ScoreConfig {
            lm_weight: self.lm_weight.unwrap_or(d.lm_weight),
            length_bonus: self.length_bonus.unwrap_or(d.length_bonus),
            temperature: self.temperature.unwrap_or(d.temperature),
            diversity_gamma: self.diversity_gamma.unwrap_or(d.diversity_gamma),
            coverage_weight: self.coverage_weight.unwrap_or(d.coverage_weight),
            coverage_floor: self.coverage_floor.unwrap_or(d.coverage_floor),
            rep_threshold: self.rep_threshold.unwrap_or(d.rep_threshold),
            rep_penalty: self.rep_penalty.unwrap_or(d.rep_penalty),
            length_delta: self.len_delta.unwrap_or(d.length_delta),
            length_ratio: self.len_ratio.unwrap_or(d.length_ratio),
            length_normalize: self.length_norm,
            window_enabled: self.window,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 5, value_parser = at_least_one)]
    beam_size: usize,
    #[arg(long, default_value_t = 100, value_parser = at_least_one)]
    max_steps: usize,
    /// Stop once beam-size hypotheses have terminated.
    #[arg(long)]
    stop_early: bool,
    #[arg(long, default_value_t = 1, value_parser = at_least_one)]
    parallelism: usize,
    #[command(flatten)]
    score: ScoreArgs,
}

impl SearchArgs {
    pub fn config(&self) -> BeamConfig {
        let mut cfg = BeamConfig::new(self.beam_size, self.max_steps).with_scoring(self.score.config());
        cfg.stop_early = self.stop_early;
        cfg
    }

    pub fn parallelism(&self) -> usize {
        self.parallelism
    }
}

/// Model, vocabulary and LM locations shared by decoding commands.
#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// copy:<epsilon> or table:<fixture.json>
    #[arg(long)]
    model: ModelSpec,
    /// Vocabulary file (copy model only; built from the input when absent).
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Language model file for shallow fusion.
    #[arg(long)]
    lm: Option<PathBuf>,
}

impl ModelArgs {
    pub fn load(&self, fallback_corpus: &[Vec<String>]) -> Result<(LoadedModel, Option<NgramLm>)> {
        let model = LoadedModel::load(&self.model, self.vocab.as_deref(), fallback_corpus)?;
        let lm = model.lm(self.lm.as_deref())?;
        Ok((model, lm))
    }
}

/// Sources of a corpus, tokenized; empty sources are rejected with their
/// line number.
pub fn tokenized_sources(path: &Path, records: &[CorpusRecord]) -> Result<Vec<Vec<String>>> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let toks = tokenize(&r.source);
            if toks.is_empty() {
                bail!("{}:{}: empty source", path.display(), i + 1);
            }
            Ok(toks)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_spec_parsing() {
        assert_eq!("copy:0.1".parse(), Ok(ModelSpec::Copy(0.1)));
        assert_eq!("table:f.json".parse(), Ok(ModelSpec::Table(PathBuf::from("f.json"))));
        assert!("copy:0.5".parse::<ModelSpec>().is_err());
        assert!("table:".parse::<ModelSpec>().is_err());
        assert!("neural:x".parse::<ModelSpec>().is_err());
    }

    #[test]
    fn flag_parsers() {
        assert!(non_negative("-1").is_err());
        assert!(positive("0").is_err());
        assert!(unit_interval("1.5").is_err());
        assert_eq!(at_least_one("3"), Ok(3));
        assert!(at_least_one("0").is_err());
    }
}
