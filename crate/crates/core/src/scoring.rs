//! The composable scoring stack.
//!
//! In-beam terms are added once per generated token: tempered model
//! log-probability, weighted LM log-probability, repetition charge and the
//! sibling-rank adjustment. Length normalization or bonus and the coverage
//! penalty only enter the final score of a completed hypothesis:
//!
//! ```text
//! s_final = length_adjust(s_beam, T) + coverage_weight * cp(A)
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lm::NgramLm;
use crate::model::StepOutput;
use crate::textprep::{TokenId, EOS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error("{name} must be {expected}, got {value}")]
    OutOfRange { name: &'static str, expected: &'static str, value: f64 },
    #[error("length normalization and length bonus are mutually exclusive")]
    LengthModesConflict,
    #[error("hypothesis length must be at least 1")]
    ZeroLength,
    #[error("attention row {row} is not a distribution over {columns} source positions")]
    BadAttentionRow { row: usize, columns: usize },
}

fn range_err(name: &'static str, expected: &'static str, value: f64) -> ScoreError {
    ScoreError::OutOfRange { name, expected, value }
}

/// All scoring hyperparameters. The default is the identity configuration:
/// pure cumulative model log-probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreConfig {
    pub lm_weight: f64,
    pub length_bonus: f64,
    pub temperature: f64,
    pub diversity_gamma: f64,
    pub coverage_weight: f64,
    pub coverage_floor: f64,
    pub rep_threshold: f64,
    pub rep_penalty: f64,
    pub length_delta: f64,
    pub length_ratio: f64,
    pub length_normalize: bool,
    pub window_enabled: bool,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            lm_weight: 0.0,
            length_bonus: 0.0,
            temperature: 1.0,
            diversity_gamma: 0.0,
            coverage_weight: 0.0,
            coverage_floor: 1e-10,
            rep_threshold: 0.5,
            rep_penalty: 0.0,
            length_delta: 0.0,
            length_ratio: 0.0,
            length_normalize: false,
            window_enabled: false,
        }
    }
}

impl ScoreConfig {
    pub fn validate(&self) -> Result<(), ScoreError> {
        let non_negative = [
            ("lm_weight", self.lm_weight),
            ("length_bonus", self.length_bonus),
            ("diversity_gamma", self.diversity_gamma),
            ("coverage_weight", self.coverage_weight),
            ("rep_penalty", self.rep_penalty),
            ("length_delta", self.length_delta),
            ("length_ratio", self.length_ratio),
        ];
        for (name, value) in non_negative {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(range_err(name, ">= 0", value));
            }
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(range_err("temperature", "> 0", self.temperature));
        }
        if !(self.coverage_floor > 0.0 && self.coverage_floor <= 1.0) {
            return Err(range_err("coverage_floor", "in (0, 1]", self.coverage_floor));
        }
        if !(self.rep_threshold > 0.0 && self.rep_threshold <= 1.0) {
            return Err(range_err("rep_threshold", "in (0, 1]", self.rep_threshold));
        }
        if self.length_normalize && self.length_bonus > 0.0 {
            return Err(ScoreError::LengthModesConflict);
        }
        Ok(())
    }
}

/// Row-stochastic attention matrix: one row per decoder step, one column per
/// source position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionMatrix {
    source_len: usize,
    rows: Vec<Vec<f64>>,
}

impl AttentionMatrix {
    pub fn new(source_len: usize, rows: Vec<Vec<f64>>) -> Result<Self, ScoreError> {
        for (i, row) in rows.iter().enumerate() {
            let mass: f64 = row.iter().sum();
            if row.len() != source_len
                || row.iter().any(|a| a.is_nan() || *a < 0.0)
                || (mass - 1.0).abs() > 1e-6
            {
                return Err(ScoreError::BadAttentionRow { row: i, columns: source_len });
            }
        }
        Ok(AttentionMatrix { source_len, rows })
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn column_sums(&self) -> Vec<f64> {
        column_sums(&self.rows, self.source_len)
    }
}

fn column_sums(rows: &[Vec<f64>], source_len: usize) -> Vec<f64> {
    let mut sums = vec![0.0; source_len];
    for row in rows {
        for (s, a) in sums.iter_mut().zip(row) {
            *s += a;
        }
    }
    sums
}

/// `step_logprob + lm_weight * lm_logprob`; the LM term is skipped entirely
/// at weight zero.
pub fn fuse_step(step_logprob: f64, lm_logprob: f64, lm_weight: f64) -> Result<f64, ScoreError> {
    if lm_weight.is_nan() || lm_weight < 0.0 {
        return Err(range_err("lm_weight", ">= 0", lm_weight));
    }
    Ok(if lm_weight == 0.0 { step_logprob } else { step_logprob + lm_weight * lm_logprob })
}

/// Renormalized `log p_i / tau`. Equal to a softmax over `z / tau` for any
/// logits `z` with `log p = log softmax(z)`, since the normalizer cancels.
pub fn apply_temperature(logprobs: &[f64], temperature: f64) -> Result<Vec<f64>, ScoreError> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(range_err("temperature", "> 0", temperature));
    }
    if temperature == 1.0 {
        return Ok(logprobs.to_vec());
    }
    let scaled: Vec<f64> = logprobs.iter().map(|l| l / temperature).collect();
    let norm = crate::logsumexp(&scaled);
    Ok(scaled.into_iter().map(|l| l - norm).collect())
}

/// `score / length`, the length-th root of the probability in log space.
pub fn length_normalized(score: f64, length: usize) -> Result<f64, ScoreError> {
    if length == 0 {
        return Err(ScoreError::ZeroLength);
    }
    Ok(score / length as f64)
}

/// `score + bonus * length`.
pub fn length_bonus(score: f64, length: usize, bonus: f64) -> f64 {
    score + bonus * length as f64
}

/// `sum_j log(min(sum_i A_ij, 1))` with column sums floored at `floor`.
/// An empty matrix has penalty zero.
pub fn coverage_penalty(rows: &[Vec<f64>], floor: f64) -> f64 {
    let Some(first) = rows.first() else { return 0.0 };
    column_sums(rows, first.len())
        .into_iter()
        .map(|s| s.min(1.0).max(floor).ln())
        .sum()
}

/// The column holding over-threshold attention in `row`, if any: the argmax
/// (lowest index on ties) when its weight is at least `threshold`.
pub fn focus_position(row: &[f64], threshold: f64) -> Option<usize> {
    let (pos, &weight) = row
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then_with(|| b.0.cmp(&a.0)))?;
    (weight >= threshold).then_some(pos)
}

/// Incremental state of the repetition rule: which source positions have
/// held focus so far, and the focus of the previous step.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RepetitionTracker {
    visited: Vec<bool>,
    previous: Option<usize>,
}

impl RepetitionTracker {
    /// Consumes one attention row and returns its charge: `-penalty` when the
    /// focus returns to an earlier-visited position after having moved away.
    pub fn charge(&mut self, row: &[f64], threshold: f64, penalty: f64) -> f64 {
        let focus = focus_position(row, threshold);
        let mut charge = 0.0;
        if let Some(pos) = focus {
            if self.visited.len() <= pos {
                self.visited.resize(pos + 1, false);
            }
            if self.visited[pos] && self.previous != Some(pos) {
                charge = -penalty;
            }
            self.visited[pos] = true;
        }
        self.previous = focus;
        charge
    }
}

/// Total repetition charge over a sequence of attention rows.
pub fn repetition_penalty(rows: &[Vec<f64>], threshold: f64, penalty: f64) -> f64 {
    let mut tracker = RepetitionTracker::default();
    rows.iter().map(|row| tracker.charge(row, threshold, penalty)).sum()
}

/// Adjustments `-gamma * (rank - 1)` for `count` children already sorted by
/// rank.
pub fn sibling_penalty(count: usize, gamma: f64) -> Vec<f64> {
    (0..count).map(|r| -gamma * r as f64).collect()
}

/// Inclusive bounds on the number of generated tokens (excluding `<eos>`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthWindow {
    pub min: usize,
    pub max: usize,
}

/// `floor(max(S - delta, (1 - ratio) S))` (at least 1) to
/// `ceil(max(S + delta, (1 + ratio) S))`.
pub fn length_window(source_len: usize, delta: f64, ratio: f64) -> LengthWindow {
    // Absorb rounding noise such as 1.1 * 30 = 33.000000000000004.
    const SLACK: f64 = 1e-9;
    let s = source_len as f64;
    let lower = (s - delta).max((1.0 - ratio) * s);
    let upper = (s + delta).max((1.0 + ratio) * s);
    let min = ((lower + SLACK).floor().max(1.0)) as usize;
    let max = ((upper - SLACK).ceil().max(min as f64)) as usize;
    LengthWindow { min, max }
}

/// Per-token in-beam increments for the children of one hypothesis, and the
/// repetition state they inherit.
#[derive(Debug, Clone)]
pub struct StepScores {
    /// `-inf` marks a child that is not allowed.
    pub increments: Vec<f64>,
    pub tracker: RepetitionTracker,
}

/// A validated [`ScoreConfig`] plus the optional fusion LM.
#[derive(Debug, Clone, Copy)]
pub struct Scorer<'a> {
    config: &'a ScoreConfig,
    lm: Option<&'a NgramLm>,
}

impl<'a> Scorer<'a> {
    pub fn new(config: &'a ScoreConfig, lm: Option<&'a NgramLm>) -> Result<Self, ScoreError> {
        config.validate()?;
        Ok(Scorer { config, lm })
    }

    pub fn config(&self) -> &ScoreConfig {
        self.config
    }

    pub fn window(&self, source_len: usize) -> Option<LengthWindow> {
        self.config
            .window_enabled
            .then(|| length_window(source_len, self.config.length_delta, self.config.length_ratio))
    }

    /// Scores every possible next token of a hypothesis with ids `prefix`
    /// (starting with `<sos>`).
    pub fn step_scores(
        &self,
        out: &StepOutput,
        prefix: &[TokenId],
        tracker: &RepetitionTracker,
        window: Option<LengthWindow>,
    ) -> StepScores {
        let cfg = self.config;
        let mut increments = apply_temperature(&out.logprobs, cfg.temperature)
            .expect("temperature validated by Scorer::new");
        if let (Some(lm), true) = (self.lm, cfg.lm_weight > 0.0) {
            let history = &prefix[1..];
            for (token, inc) in increments.iter_mut().enumerate() {
                *inc += cfg.lm_weight * lm.next_logprob(history, token as TokenId);
            }
        }
        if let Some(window) = window {
            let generated = prefix.len() - 1;
            if generated < window.min {
                increments[EOS as usize] = f64::NEG_INFINITY;
            }
            if generated >= window.max {
                for (token, inc) in increments.iter_mut().enumerate() {
                    if token != EOS as usize {
                        *inc = f64::NEG_INFINITY;
                    }
                }
            }
        }
        let mut tracker = tracker.clone();
        let charge = tracker.charge(&out.attention_row, cfg.rep_threshold, cfg.rep_penalty);
        if charge != 0.0 {
            increments.iter_mut().for_each(|inc| *inc += charge);
        }
        if cfg.diversity_gamma > 0.0 {
            let mut order: Vec<usize> = (0..increments.len()).collect();
            order.sort_by(|&a, &b| increments[b].total_cmp(&increments[a]).then(a.cmp(&b)));
            let adjustments = sibling_penalty(order.len(), cfg.diversity_gamma);
            for (token, adj) in order.into_iter().zip(adjustments) {
                increments[token] += adj;
            }
        }
        StepScores { increments, tracker }
    }

    /// `s_final` for a hypothesis with in-beam score `score`, `generated`
    /// tokens (including `<eos>`) and the given attention rows.
    pub fn final_score(&self, score: f64, generated: usize, rows: &[Vec<f64>]) -> f64 {
        let cfg = self.config;
        let mut total = if cfg.length_normalize && generated > 0 {
            score / generated as f64
        } else if cfg.length_bonus > 0.0 {
            length_bonus(score, generated, cfg.length_bonus)
        } else {
            score
        };
        if cfg.coverage_weight > 0.0 {
            total += cfg.coverage_weight * coverage_penalty(rows, cfg.coverage_floor);
        }
        total
    }
}
