//! The one text normalizer shared by response parsing, mention detection in
//! rule agents and post/check consistency warnings.

use std::collections::BTreeSet;

/// Minimum number of shared key tokens for a post to count as mentioning a
/// rumor. Rumors with fewer key tokens need all of them.
pub const MENTION_MIN_OVERLAP: usize = 2;

const STOPWORDS: &[&str] = &[
    "about", "again", "all", "also", "and", "any", "are", "been", "being", "but", "can", "could", "did", "does",
    "doing", "for", "from", "had", "has", "have", "her", "him", "his", "how", "into", "its", "just", "may", "more",
    "most", "nor", "not", "now", "off", "one", "only", "our", "out", "over", "own", "per", "same", "she", "should",
    "some", "such", "than", "that", "the", "their", "them", "then", "there", "they", "this", "too", "under", "very",
    "was", "were", "what", "when", "who", "why", "will", "with", "would", "yet", "you", "your",
];

/// Lowercases, maps every non-alphanumeric character to a space and collapses
/// runs of whitespace.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        } else {
            pending_space = true;
        }
    }
    out
}

pub fn tokens(text: &str) -> Vec<String> {
    normalize(text).split(' ').filter(|t| !t.is_empty()).map(str::to_owned).collect()
}

/// Content-bearing tokens: at least three characters and not a stopword.
pub fn key_tokens(text: &str) -> BTreeSet<String> {
    tokens(text).into_iter().filter(|t| t.chars().count() >= 3 && !STOPWORDS.contains(&t.as_str())).collect()
}

/// Precomputed key tokens of one rumor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RumorKey {
    keys: BTreeSet<String>,
}

impl RumorKey {
    pub fn new(rumor: &str) -> Self {
        Self { keys: key_tokens(rumor) }
    }

    pub fn keys(&self) -> &BTreeSet<String> {
        &self.keys
    }

    pub fn overlap(&self, text_keys: &BTreeSet<String>) -> usize {
        self.keys.intersection(text_keys).count()
    }

    pub fn is_mentioned_by_keys(&self, text_keys: &BTreeSet<String>) -> bool {
        if self.keys.is_empty() {
            return false;
        }
        self.overlap(text_keys) >= MENTION_MIN_OVERLAP.min(self.keys.len())
    }

    pub fn is_mentioned_by(&self, text: &str) -> bool {
        self.is_mentioned_by_keys(&key_tokens(text))
    }
}

/// Jaccard similarity of the normalized token sets.
pub fn similarity(a: &str, b: &str) -> f64 {
    let a: BTreeSet<String> = tokens(a).into_iter().collect();
    let b: BTreeSet<String> = tokens(b).into_iter().collect();
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(&b).count() as f64;
    let union = a.union(&b).count() as f64;
    inter / union
}
