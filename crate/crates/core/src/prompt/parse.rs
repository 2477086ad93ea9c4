//! The POST/CHECK response grammar.
//!
//! ```text
//! response  = { blank } post-mark body check-mark verdicts
//! post-mark = "POST" line        (case-insensitive, optional trailing ':')
//! body      = line { line }      (everything up to the CHECK marker; trimmed, non-empty)
//! check-mark= "CHECK" line
//! verdicts  = { blank | verdict }
//! verdict   = [ "-" | "*" ] ( "True" | "False" ) [ ":" ] rumor-text
//! ```
//!
//! Verdicts are matched to rumors by normalized token similarity; a verdict
//! whose text matches no rumor confidently takes the rumor at its own
//! position.

use serde::{Deserialize, Serialize};

use crate::text::{normalize, similarity};

/// Jaccard similarity a verdict needs before it is matched by text.
const MATCH_THRESHOLD: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentAction {
    pub post_text: String,
    /// One verdict per rumor, in rumor-list order.
    pub checks: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("response has no POST line")]
    MissingPost,
    #[error("response has no CHECK line after POST")]
    MissingCheck,
    #[error("post body is empty")]
    EmptyPost,
    #[error("expected {expected} verdicts, found {found}")]
    VerdictCount { expected: usize, found: usize },
    #[error("line {line}: verdict must start with True or False: {text:?}")]
    InvalidVerdict { line: usize, text: String },
    #[error("verdict {verdict} matches more than one rumor")]
    AmbiguousMatch { verdict: usize },
}

impl ParseError {
    /// Stable identifier used in trace records.
    pub fn code(&self) -> &'static str {
        match self {
            Self::MissingPost => "missing_post",
            Self::MissingCheck => "missing_check",
            Self::EmptyPost => "empty_post",
            Self::VerdictCount { .. } => "verdict_count",
            Self::InvalidVerdict { .. } => "invalid_verdict",
            Self::AmbiguousMatch { .. } => "ambiguous_match",
        }
    }
}

fn is_marker(line: &str, marker: &str) -> bool {
    let t = line.trim().trim_matches(|c| c == '*' || c == '#').trim();
    let t = t.strip_suffix(':').unwrap_or(t).trim_end();
    t.eq_ignore_ascii_case(marker)
}

fn split_verdict(line: &str) -> Option<(bool, &str)> {
    let t = line.trim_start();
    let t = t.strip_prefix(['-', '*']).map(str::trim_start).unwrap_or(t);
    let end = t.find(|c: char| !c.is_ascii_alphabetic()).unwrap_or(t.len());
    let value = match &t[..end] {
        w if w.eq_ignore_ascii_case("true") => true,
        w if w.eq_ignore_ascii_case("false") => false,
        _ => return None,
    };
    let rest = t[end..].trim_start();
    let rest = rest.strip_prefix(':').unwrap_or(rest).trim();
    Some((value, rest))
}

pub fn parse_response(text: &str, rumor_list: &[String]) -> Result<AgentAction, ParseError> {
    let lines: Vec<&str> = text.lines().collect();
    let post_at = lines.iter().position(|l| is_marker(l, "POST")).ok_or(ParseError::MissingPost)?;
    let check_at = lines[post_at + 1..]
        .iter()
        .position(|l| is_marker(l, "CHECK"))
        .map(|i| i + post_at + 1)
        .ok_or(ParseError::MissingCheck)?;
    let post_text = lines[post_at + 1..check_at].join("\n").trim().to_owned();
    if post_text.is_empty() {
        return Err(ParseError::EmptyPost);
    }

    let mut verdicts = Vec::new();
    for (offset, line) in lines[check_at + 1..].iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (value, rest) = split_verdict(line)
            .ok_or_else(|| ParseError::InvalidVerdict { line: check_at + 2 + offset, text: line.trim().to_owned() })?;
        verdicts.push((value, rest));
    }
    if verdicts.len() != rumor_list.len() {
        return Err(ParseError::VerdictCount { expected: rumor_list.len(), found: verdicts.len() });
    }

    let normalized: Vec<String> = rumor_list.iter().map(|r| normalize(r)).collect();
    let mut slots: Vec<Option<bool>> = vec![None; rumor_list.len()];
    for (k, &(value, rest)) in verdicts.iter().enumerate() {
        let target =
            match_rumor(rest, &normalized, rumor_list).map_err(|()| ParseError::AmbiguousMatch { verdict: k + 1 })?;
        let j = target.unwrap_or(k);
        if slots[j].replace(value).is_some() {
            return Err(ParseError::AmbiguousMatch { verdict: k + 1 });
        }
    }
    Ok(AgentAction { post_text, checks: slots.into_iter().map(|s| s.unwrap_or(false)).collect() })
}

/// `Ok(Some(j))` for a confident match, `Ok(None)` when nothing clears the
/// threshold, `Err(())` on a tie at the top.
fn match_rumor(text: &str, normalized: &[String], rumors: &[String]) -> Result<Option<usize>, ()> {
    let key = normalize(text);
    if key.is_empty() {
        return Ok(None);
    }
    let exact: Vec<usize> = (0..normalized.len()).filter(|&j| normalized[j] == key).collect();
    match exact.len() {
        1 => return Ok(Some(exact[0])),
        0 => {}
        _ => return Err(()),
    }
    let scores: Vec<f64> = rumors.iter().map(|r| similarity(text, r)).collect();
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if best < MATCH_THRESHOLD {
        return Ok(None);
    }
    let top: Vec<usize> = (0..scores.len()).filter(|&j| scores[j] == best).collect();
    if top.len() > 1 {
        return Err(());
    }
    Ok(Some(top[0]))
}

/// Canonical rendering of an action; [`parse_response`] inverts it.
pub fn format_action(action: &AgentAction, rumor_list: &[String]) -> String {
    let mut out = format!("POST\n{}\nCHECK\n", action.post_text);
    for (check, rumor) in action.checks.iter().zip(rumor_list) {
        out.push_str(if *check { "True " } else { "False " });
        out.push_str(rumor);
        out.push('\n');
    }
    out
}
