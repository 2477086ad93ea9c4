//! Prompt assembly and response parsing.

mod consistency;
mod parse;
mod template;

pub use consistency::{mention_consistency, Warning, WarningKind};
pub use parse::{format_action, parse_response, AgentAction, ParseError};
pub use template::{build_prompt, HistoryEntry, Prompt, PromptContext, SYSTEM_TEXT};
