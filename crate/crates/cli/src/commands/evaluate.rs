use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use serde_json::Value;

use seqdec::diagnostics::{attention_svg, evaluate as run_evaluation, DiagnosticsError, Metrics};
use seqdec::textprep::tokenize;

use super::decode::DecodeRecord;
use super::{read_file, write_output, CorpusRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Bleu,
    Edit,
    Length,
    All,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Decoder output, JSONL corpus or plain text.
    #[arg(long)]
    decoded: PathBuf,
    /// References, JSONL corpus (targets) or plain text.
    #[arg(long)]
    reference: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    metric: Metric,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write one attention heatmap per decoded record into this directory.
    #[arg(long)]
    attention_svg: Option<PathBuf>,
}

enum Line {
    Decoded(DecodeRecord),
    Text(Vec<String>),
}

impl Line {
    fn tokens(&self) -> Vec<String> {
        match self {
            Line::Decoded(r) => r.hypotheses.first().map(|h| h.tokens.clone()).unwrap_or_default(),
            Line::Text(t) => t.clone(),
        }
    }
}

/// Decode records, corpus records (their targets) or raw text, per line.
fn read_lines(path: &Path) -> Result<Vec<Line>> {
    let text = read_file(path)?;
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            if !line.trim_start().starts_with('{') {
                return Ok(Line::Text(tokenize(line)));
            }
            let at = |e: serde_json::Error| anyhow!("{}:{}: {e}", path.display(), i + 1);
            let value: Value = serde_json::from_str(line).map_err(at)?;
            if value.get("hypotheses").is_some() {
                Ok(Line::Decoded(serde_json::from_value(value).map_err(at)?))
            } else {
                let rec: CorpusRecord = serde_json::from_value(value).map_err(at)?;
                let target = rec
                    .target
                    .ok_or_else(|| anyhow!("{}:{}: record has no target", path.display(), i + 1))?;
                Ok(Line::Text(tokenize(&target)))
            }
        })
        .collect()
}

pub fn evaluate(args: EvaluateArgs) -> Result<()> {
    let decoded = read_lines(&args.decoded)?;
    let references = read_lines(&args.reference)?;
    if decoded.len() != references.len() {
        bail!(
            "{} has {} lines but {} has {}",
            args.decoded.display(),
            decoded.len(),
            args.reference.display(),
            references.len()
        );
    }
    let metrics = match args.metric {
        Metric::Bleu => Metrics { bleu: true, edit: false, length: false },
        Metric::Edit => Metrics { bleu: false, edit: true, length: false },
        Metric::Length => Metrics { bleu: false, edit: false, length: true },
        Metric::All => Metrics::all(),
    };
    let hyp: Vec<Vec<String>> = decoded.iter().map(Line::tokens).collect();
    let refs: Vec<Vec<String>> = references.iter().map(Line::tokens).collect();
    let report = run_evaluation(&hyp, &refs, metrics).map_err(|e| match e {
        DiagnosticsError::Empty => anyhow!("{}: no lines to evaluate", args.decoded.display()),
        other => other.into(),
    })?;

    if let Some(dir) = &args.attention_svg {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let mut written = 0;
        for (i, line) in decoded.iter().enumerate() {
            let Line::Decoded(rec) = line else { continue };
            let (Some(rows), Some(best)) = (&rec.attention, rec.hypotheses.first()) else { continue };
            let mut target = best.tokens.clone();
            if best.terminated {
                target.push("<eos>".into());
            }
            let path = dir.join(format!("example_{:05}.svg", i + 1));
            fs::write(&path, attention_svg(rows, &rec.source, &target))
                .with_context(|| format!("cannot write {}", path.display()))?;
            written += 1;
        }
        tracing::info!(written, "attention heatmaps");
    }
    write_output(args.out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))
}
