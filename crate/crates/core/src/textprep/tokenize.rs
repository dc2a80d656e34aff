//! A small deterministic rule-based tokenizer.
//!
//! Rules, applied per whitespace-separated chunk:
//! 1. every leading non-alphanumeric character becomes its own token;
//! 2. every trailing non-alphanumeric character becomes its own token;
//! 3. the remaining core is split before an English contraction suffix
//!    (`'s 're 've 'll 'd 'm n't`, straight or curly apostrophe).

const CONTRACTIONS: [&str; 7] = ["n't", "'s", "'re", "'ve", "'ll", "'d", "'m"];

pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        split_chunk(chunk, &mut out);
    }
    out
}

fn is_punct(c: char) -> bool {
    !c.is_alphanumeric()
}

fn split_chunk(chunk: &str, out: &mut Vec<String>) {
    let mut rest = chunk;
    while let Some(c) = rest.chars().next().filter(|&c| is_punct(c)) {
        out.push(c.to_string());
        rest = &rest[c.len_utf8()..];
    }
    let mut trailing = Vec::new();
    while let Some(c) = rest.chars().next_back().filter(|&c| is_punct(c)) {
        trailing.push(c.to_string());
        rest = &rest[..rest.len() - c.len_utf8()];
    }
    if !rest.is_empty() {
        let (stem, suffix) = split_contraction(rest);
        out.push(stem.to_string());
        if let Some(suffix) = suffix {
            out.push(suffix.to_string());
        }
    }
    out.extend(trailing.into_iter().rev());
}

fn split_contraction(word: &str) -> (&str, Option<&str>) {
    let normalized = word.replace('\u{2019}', "'").to_lowercase();
    for suffix in CONTRACTIONS {
        if normalized.len() > suffix.len() && normalized.ends_with(suffix) {
            // Curly apostrophes are three bytes in the original.
            let suffix_chars = suffix.chars().count();
            let cut = word.char_indices().rev().nth(suffix_chars - 1).map(|(i, _)| i).unwrap_or(0);
            if cut > 0 {
                return (&word[..cut], Some(&word[cut..]));
            }
        }
    }
    (word, None)
}

/// Joins tokens with spaces, reattaching contraction suffixes and closing
/// punctuation to the preceding token.
pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    let mut glue_next = false;
    for tok in tokens {
        let tok = tok.as_ref();
        let attaches_left = is_contraction(tok) || matches!(tok, "." | "," | ";" | ":" | "!" | "?" | ")" | "]" | "}");
        if !out.is_empty() && !attaches_left && !glue_next {
            out.push(' ');
        }
        out.push_str(tok);
        glue_next = matches!(tok, "(" | "[" | "{");
    }
    out
}

fn is_contraction(tok: &str) -> bool {
    let normalized = tok.replace('\u{2019}', "'").to_lowercase();
    CONTRACTIONS.contains(&normalized.as_str())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_contractions() {
        assert_eq!(tokenize("It's no use"), vec!["It", "'s", "no", "use"]);
        assert_eq!(tokenize("don't"), vec!["do", "n't"]);
        assert_eq!(tokenize("we\u{2019}ll"), vec!["we", "\u{2019}ll"]);
    }

    #[test]
    fn empty_and_whitespace() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \t\n").is_empty());
        assert_eq!(tokenize("a   b"), vec!["a", "b"]);
    }

    #[test]
    fn detaches_punctuation() {
        assert_eq!(
            tokenize("\"Hello, world!\" (yes)."),
            vec!["\"", "Hello", ",", "world", "!", "\"", "(", "yes", ")", "."]
        );
        assert_eq!(tokenize("yesterday."), vec!["yesterday", "."]);
        assert_eq!(tokenize("e.g."), vec!["e.g", "."]);
        assert_eq!(tokenize("..."), vec![".", ".", "."]);
    }

    #[test]
    fn bare_suffix_is_not_split() {
        assert_eq!(tokenize("'s"), vec!["'", "s"]);
        assert_eq!(tokenize("n't"), vec!["n't"]);
    }

    #[test]
    fn never_empty_tokens() {
        for text in ["  ,  ", "'", "a,,b", "--x--", "it's."] {
            assert!(tokenize(text).iter().all(|t| !t.is_empty()), "{text}");
        }
    }

    #[test]
    fn detokenize_reattaches() {
        let toks = tokenize("It's no use going back to yesterday, because (I was) different.");
        assert_eq!(
            detokenize(&toks),
            "It's no use going back to yesterday, because (I was) different."
        );
    }
}
