//! `seqdec` command-line driver.
//!
//! ```bash
//! seqdec vocab-build --input train.txt --max-size 10000 --out vocab.txt
//! seqdec lm-train --input train.txt --vocab vocab.txt --order 3 --out lm.txt
//! seqdec decode --input corpus.jsonl --model copy:0.1 --beam-size 4 --out decoded.jsonl
//! seqdec evaluate --decoded decoded.jsonl --reference corpus.jsonl --metric all
//! ```

mod commands;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use commands::UsageError;

#[derive(Parser, Debug)]
#[command(name = "seqdec", version, about = "Beam-search decoding, scoring corrections and decoding diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a frequency-truncated vocabulary file.
    VocabBuild(commands::prep::VocabBuildArgs),
    /// Learn byte-pair-encoding merges from a corpus.
    BpeLearn(commands::prep::BpeLearnArgs),
    /// Segment a corpus into subwords with a merges file.
    BpeApply(commands::prep::BpeApplyArgs),
    /// Train an n-gram language model.
    LmTrain(commands::lm::LmTrainArgs),
    /// Log-probability and perplexity of a corpus under a language model.
    LmScore(commands::lm::LmScoreArgs),
    /// Decode a corpus once per LM weight and report BLEU and length ratio.
    LmSweep(commands::lm::LmSweepArgs),
    /// Decode a JSONL corpus.
    Decode(commands::decode::DecodeArgs),
    /// Compare decoded and gold scores to detect search errors.
    ScoreRatio(commands::decode::ScoreRatioArgs),
    /// BLEU, edit-distance and length statistics against references.
    Evaluate(commands::evaluate::EvaluateArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let filter = EnvFilter::try_from_env("SEQDEC_LOG").unwrap_or_else(|_| EnvFilter::new("warn"));
    tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr).init();

    let result = match cli.command {
        Command::VocabBuild(args) => commands::prep::vocab_build(args),
        Command::BpeLearn(args) => commands::prep::bpe_learn(args),
        Command::BpeApply(args) => commands::prep::bpe_apply(args),
        Command::LmTrain(args) => commands::lm::lm_train(args),
        Command::LmScore(args) => commands::lm::lm_score(args),
        Command::LmSweep(args) => commands::lm::lm_sweep(args),
        Command::Decode(args) => commands::decode::decode(args),
        Command::ScoreRatio(args) => commands::decode::score_ratio(args),
        Command::Evaluate(args) => commands::evaluate::evaluate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) if err.is::<UsageError>() => {
            eprintln!("error: {err}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
