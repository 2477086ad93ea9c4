//! Deterministic rule agents.
//!
//! An agent believes rumor `j` iff at least `threshold(acc)` of its visible
//! posts mention `j`. With spread level >= `min_spread_to_post` and at least
//! one belief, it posts the text of its most-mentioned believed rumor (ties
//! to the lower index); otherwise it posts `neutral_post`.

use std::collections::BTreeMap;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use super::{Backend, BackendError, BackendReply, BackendRequest};
use crate::persona::ACCEPT_LEVELS;
use crate::prompt::{format_action, AgentAction, PromptContext};
use crate::text::{key_tokens, RumorKey};

/// Exposure count needed per acceptance level; `None` means never.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AcceptThresholds(pub [Option<u32>; 4]);

impl Default for AcceptThresholds {
    fn default() -> Self {
        Self([None, Some(3), Some(2), Some(1)])
    }
}

impl AcceptThresholds {
    pub fn for_level(&self, level: u8) -> Option<u32> {
        self.0[usize::from(level) - 1]
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ThresholdValue {
    Count(u32),
    Word(String),
}

impl Serialize for AcceptThresholds {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let map: BTreeMap<String, ThresholdValue> = self
            .0
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let v = match t {
                    Some(c) => ThresholdValue::Count(*c),
                    None => ThresholdValue::Word("never".into()),
                };
                ((i + 1).to_string(), v)
            })
            .collect();
        map.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AcceptThresholds {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let map = BTreeMap::<String, ThresholdValue>::deserialize(d)?;
        let mut out = Self::default();
        for (key, value) in map {
            let level: usize = key
                .parse()
                .ok()
                .filter(|l| (1..=usize::from(ACCEPT_LEVELS)).contains(l))
                .ok_or_else(|| de::Error::custom(format!("acceptance level {key:?} outside 1..=4")))?;
            out.0[level - 1] = match value {
                ThresholdValue::Count(0) => return Err(de::Error::custom("threshold must be >= 1 or \"never\"")),
                ThresholdValue::Count(c) => Some(c),
                ThresholdValue::Word(w) if w == "never" => None,
                ThresholdValue::Word(w) => return Err(de::Error::custom(format!("unknown threshold {w:?}"))),
            };
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuleConfig {
    pub accept_thresholds: AcceptThresholds,
    pub min_spread_to_post: u8,
    pub neutral_post: String,
}

impl Default for RuleConfig {
    fn default() -> Self {
        Self {
            accept_thresholds: AcceptThresholds::default(),
            min_spread_to_post: 2,
            neutral_post: "Enjoying a quiet afternoon with a cup of tea.".into(),
        }
    }
}

impl RuleConfig {
    pub fn validate(&self) -> Result<(), BackendError> {
        if self.neutral_post.trim().is_empty() {
            return Err(BackendError::Config("rule.neutral_post must not be empty".into()));
        }
        Ok(())
    }
}

/// The rule agent's decision for one context.
pub fn rule_act(ctx: &PromptContext<'_>, cfg: &RuleConfig) -> AgentAction {
    let keys: Vec<RumorKey> = ctx.rumor_list.iter().map(|r| RumorKey::new(r)).collect();
    act_with_keys(ctx, cfg, &keys)
}

fn act_with_keys(ctx: &PromptContext<'_>, cfg: &RuleConfig, keys: &[RumorKey]) -> AgentAction {
    let mut exposures = vec![0u32; keys.len()];
    for entry in &ctx.post_history {
        let post_keys = key_tokens(entry.text);
        for (j, key) in keys.iter().enumerate() {
            if key.is_mentioned_by_keys(&post_keys) {
                exposures[j] += 1;
            }
        }
    }
    let threshold = cfg.accept_thresholds.for_level(ctx.persona.agent_rumors_acc);
    let checks: Vec<bool> = exposures.iter().map(|&c| threshold.is_some_and(|t| c >= t)).collect();

    let favorite = (0..checks.len()).filter(|&j| checks[j]).fold(None::<usize>, |best, j| match best {
        Some(b) if exposures[b] >= exposures[j] => Some(b),
        _ => Some(j),
    });
    let post_text = match favorite {
        Some(j) if ctx.persona.agent_rumors_spread >= cfg.min_spread_to_post => ctx.rumor_list[j].clone(),
        _ => cfg.neutral_post.clone(),
    };
    AgentAction { post_text, checks }
}

/// Rule agents behind the text interface: the decision is rendered in the
/// canonical POST/CHECK form so it travels the same parse path as model
/// output.
pub struct RuleBackend {
    config: RuleConfig,
    keys: Option<(Vec<String>, Vec<RumorKey>)>,
}

impl RuleBackend {
    pub fn new(config: RuleConfig) -> Self {
        Self { config, keys: None }
    }
}

impl Default for RuleBackend {
    fn default() -> Self {
        Self::new(RuleConfig::default())
    }
}

impl Backend for RuleBackend {
    fn respond(&mut self, request: &BackendRequest<'_>) -> Result<BackendReply, BackendError> {
        let ctx = request.context;
        let stale = self.keys.as_ref().is_none_or(|(rumors, _)| rumors.as_slice() != ctx.rumor_list);
        if stale {
            let keys = ctx.rumor_list.iter().map(|r| RumorKey::new(r)).collect();
            self.keys = Some((ctx.rumor_list.to_vec(), keys));
        }
        let keys = &self.keys.as_ref().expect("just filled").1;
        let action = act_with_keys(ctx, &self.config, keys);
        Ok(BackendReply::local(format_action(&action, ctx.rumor_list)))
    }
}
