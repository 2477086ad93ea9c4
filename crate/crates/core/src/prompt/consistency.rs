use serde::{Deserialize, Serialize};

use crate::text::{key_tokens, RumorKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningKind {
    /// The post talks about a rumor the agent then marked False.
    MentionedButRejected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub rumor: usize,
    pub kind: WarningKind,
}

/// Diagnostic only: flags rumors the post mentions but the checks reject.
/// Criticizing a rumor also mentions it, so these are hints, not errors.
pub fn mention_consistency(post_text: &str, checks: &[bool], rumor_list: &[String]) -> Vec<Warning> {
    let post_keys = key_tokens(post_text);
    rumor_list
        .iter()
        .zip(checks)
        .enumerate()
        .filter(|(_, (rumor, &check))| !check && RumorKey::new(rumor).is_mentioned_by_keys(&post_keys))
        .map(|(rumor, _)| Warning { rumor, kind: WarningKind::MentionedButRejected })
        .collect()
}
