//! Byte-pair-encoding subword segmentation (merge learning and application).
//!
//! Words start as character sequences with [`END_OF_WORD`] appended to the
//! final character, so `"ab"` is `["a", "b</w>"]`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use super::TextprepError;

pub const END_OF_WORD: &str = "</w>";

const MERGES_HEADER: &str = "#bpe-merges v1";

/// Ordered merge list; a merge's priority is its position.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BpeMerges {
    merges: Vec<(String, String)>,
    ranks: HashMap<(String, String), usize>,
}

impl BpeMerges {
    /// Fails on duplicate pairs.
    pub fn from_pairs<I>(pairs: I) -> Result<Self, TextprepError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut merges = BpeMerges::default();
        for (i, pair) in pairs.into_iter().enumerate() {
            if merges.ranks.contains_key(&pair) {
                return Err(TextprepError::BadMergesFile {
                    line: i + 2,
                    reason: format!("duplicate merge {} {}", pair.0, pair.1),
                });
            }
            merges.push(pair);
        }
        Ok(merges)
    }

    fn push(&mut self, pair: (String, String)) {
        self.ranks.insert(pair.clone(), self.merges.len());
        self.merges.push(pair);
    }

    pub fn len(&self) -> usize {
        self.merges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.merges.is_empty()
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn rank(&self, left: &str, right: &str) -> Option<usize> {
        self.ranks.get(&(left.to_string(), right.to_string())).copied()
    }

    /// Header line followed by `left right` per merge, in priority order.
    pub fn to_file_string(&self) -> String {
        let mut out = String::from(MERGES_HEADER);
        out.push('\n');
        for (l, r) in &self.merges {
            let _ = writeln!(out, "{l} {r}");
        }
        out
    }

    pub fn from_file_str(text: &str) -> Result<Self, TextprepError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, MERGES_HEADER)) => {}
            Some((_, other)) => {
                return Err(TextprepError::BadMergesFile {
                    line: 1,
                    reason: format!("expected header {MERGES_HEADER:?}, found {other:?}"),
                })
            }
            None => {
                return Err(TextprepError::BadMergesFile { line: 1, reason: "empty file".into() })
            }
        }
        let mut pairs = Vec::new();
        for (i, line) in lines {
            let mut parts = line.split(' ');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(l), Some(r), None) if !l.is_empty() && !r.is_empty() => {
                    pairs.push((l.to_string(), r.to_string()))
                }
                _ => {
                    return Err(TextprepError::BadMergesFile {
                        line: i + 1,
                        reason: format!("expected \"left right\", found {line:?}"),
                    })
                }
            }
        }
        Self::from_pairs(pairs)
    }
}

fn initial_symbols(word: &str) -> Vec<String> {
    let mut symbols: Vec<String> = word.chars().map(String::from).collect();
    if let Some(last) = symbols.last_mut() {
        last.push_str(END_OF_WORD);
    }
    symbols
}

/// Learns up to `num_merges` merges from a word-frequency table.
///
/// Each round merges the most frequent adjacent pair (ties go to the
/// lexicographically smallest `(left, right)`); learning stops early once no
/// pair occurs at least twice.
pub fn learn_bpe(word_counts: &BTreeMap<String, u64>, num_merges: usize) -> BpeMerges {
    let mut words: Vec<(Vec<String>, u64)> = word_counts
        .iter()
        .filter(|(w, &c)| !w.is_empty() && c > 0)
        .map(|(w, &c)| (initial_symbols(w), c))
        .collect();
    let mut merges = BpeMerges::default();
    while merges.len() < num_merges {
        let mut pair_counts: HashMap<(&str, &str), u64> = HashMap::new();
        for (symbols, count) in &words {
            for pair in symbols.windows(2) {
                *pair_counts.entry((pair[0].as_str(), pair[1].as_str())).or_default() += count;
            }
        }
        let best = pair_counts
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)));
        let Some(((left, right), count)) = best else { break };
        if count < 2 {
            break;
        }
        let pair = (left.to_string(), right.to_string());
        for (symbols, _) in &mut words {
            merge_pair(symbols, &pair.0, &pair.1);
        }
        merges.push(pair);
    }
    merges
}

/// Merges every non-overlapping occurrence of `(left, right)`, scanning left to right.
fn merge_pair(symbols: &mut Vec<String>, left: &str, right: &str) {
    let mut i = 0;
    while i + 1 < symbols.len() {
        if symbols[i] == left && symbols[i + 1] == right {
            let merged = symbols.remove(i + 1);
            symbols[i].push_str(&merged);
        }
        i += 1;
    }
}

/// Segments `word` by repeatedly applying the highest-priority merge present.
pub fn apply_bpe(word: &str, merges: &BpeMerges) -> Vec<String> {
    let mut symbols = initial_symbols(word);
    loop {
        let best = symbols
            .windows(2)
            .filter_map(|p| merges.rank(&p[0], &p[1]))
            .min();
        let Some(rank) = best else { break };
        let (left, right) = &merges.pairs()[rank];
        merge_pair(&mut symbols, left, right);
    }
    symbols
}

/// Concatenates subwords and strips the end-of-word marker.
pub fn join_subwords<S: AsRef<str>>(subwords: &[S]) -> String {
    let joined: String = subwords.iter().map(AsRef::as_ref).collect();
    joined.strip_suffix(END_OF_WORD).map(str::to_string).unwrap_or(joined)
}

/// Distinct symbols produced by applying `merges` to every word.
pub fn subword_inventory<'a, I>(words: I, merges: &BpeMerges) -> HashSet<String>
where
    I: IntoIterator<Item = &'a str>,
{
    words.into_iter().flat_map(|w| apply_bpe(w, merges)).collect()
}
