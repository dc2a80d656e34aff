use serde::{Deserialize, Serialize};

/// Levenshtein distance with the operation counts of one optimal script.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditStats {
    pub distance: usize,
    pub insertions: usize,
    pub deletions: usize,
    pub substitutions: usize,
}

/// One step of an alignment turning `a` into `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EditOp<T> {
    Match(T),
    Substitute { from: T, to: T },
    Delete(T),
    Insert(T),
}

fn table<T: PartialEq>(a: &[T], b: &[T]) -> Vec<Vec<usize>> {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let diag = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = diag.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d
}

/// Alignment script from `a` to `b`, in order. The backtrace prefers a
/// match, then substitution, then deletion, then insertion.
pub fn edit_script<T: PartialEq + Clone>(a: &[T], b: &[T]) -> Vec<EditOp<T>> {
    let d = table(a, b);
    let (mut i, mut j) = (a.len(), b.len());
    let mut ops = Vec::with_capacity(i.max(j));
    while i > 0 || j > 0 {
        if i > 0 && j > 0 && a[i - 1] == b[j - 1] && d[i][j] == d[i - 1][j - 1] {
            ops.push(EditOp::Match(a[i - 1].clone()));
            i -= 1;
            j -= 1;
        } else if i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + 1 {
            ops.push(EditOp::Substitute { from: a[i - 1].clone(), to: b[j - 1].clone() });
            i -= 1;
            j -= 1;
        } else if i > 0 && d[i][j] == d[i - 1][j] + 1 {
            ops.push(EditOp::Delete(a[i - 1].clone()));
            i -= 1;
        } else {
            ops.push(EditOp::Insert(b[j - 1].clone()));
            j -= 1;
        }
    }
    ops.reverse();
    ops
}

/// Token-level edit distance from `a` to `b` with unit costs.
pub fn edit_distance<T: PartialEq + Clone>(a: &[T], b: &[T]) -> EditStats {
    let mut stats = EditStats::default();
    for op in edit_script(a, b) {
        match op {
            EditOp::Match(_) => {}
            EditOp::Substitute { .. } => stats.substitutions += 1,
            EditOp::Delete(_) => stats.deletions += 1,
            EditOp::Insert(_) => stats.insertions += 1,
        }
    }
    stats.distance = stats.substitutions + stats.deletions + stats.insertions;
    stats
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    #[test]
    fn kitten_sitting() {
        let stats = edit_distance(&chars("kitten"), &chars("sitting"));
        assert_eq!(stats.distance, 3);
        assert_eq!((stats.substitutions, stats.deletions, stats.insertions), (2, 0, 1));
    }

    #[test]
    fn identical_and_empty() {
        let a = chars("same");
        assert_eq!(edit_distance(&a, &a), EditStats::default());
        let n = chars("abcde");
        let stats = edit_distance(&[], &n);
        assert_eq!(stats, EditStats { distance: 5, insertions: 5, deletions: 0, substitutions: 0 });
        assert_eq!(edit_distance(&n, &[]).deletions, 5);
    }

    #[test]
    fn substitution_preferred_over_indel_pair() {
        let script = edit_script(&["a", "x"], &["a", "y"]);
        assert_eq!(script, vec![EditOp::Match("a"), EditOp::Substitute { from: "x", to: "y" }]);
    }
}
