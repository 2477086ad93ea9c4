use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::persona::{Persona, ScaleDictionaries};

pub const SYSTEM_TEXT: &str = "You are a helpful assistant.";

const INSTRUCTIONS: &str = "\
Read through the post history, especially the new posts. It can be something you've read in other posts but you need to rephase it your personality.
You can criticize the posts if you don't agree with them, you can also repeat them or express in your own way.
";

const OUTPUT_FORMAT: &str = "\
After posting, you will review a list of rumors and decide [CHECK] whether to believe or reject each one. Be honest: if your post mentions a rumor,
your response must be consistent with what you posted.

[Action Output Instruction]
Start with 'POST', then on a new line, specify the content of your new post.
Then, on a new line, output 'CHECK', followed by True or False for each rumor.

Example#1:

POST

I just read that Donald Trump will be president of Greece! OMG! That's interesting.

CHECK

False COVID-19 now named as COVID-114514.

True Donald Trump will be president of Greece.

Example#2:

POST

What a nice day! I enjoy my job as a teacher.

CHECK

False COVID-19 now named as COVID-114514.

False Donald Trump will be president of Greece.
";

const CLOSING: &str = "\
Think step-by-step about the task. Be careful not to let the rumor list affect your judgment on post history.

You CANNOT post the information from the rumor list but NOT in your post history.
";

const SIGN_OFF: &str = "\
Try not to exactly repeat what others have said.

Propose exactly one action (POST and CHECK) for yourself in the current round.

Your response:";

/// One visible post. Posts with no author (seeded rumors, filler) render as
/// bare text; authored posts render as `Author: text`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistoryEntry<'a> {
    pub author: Option<&'a str>,
    pub text: &'a str,
}

/// Everything the acting agent sees in one step.
#[derive(Debug, Clone)]
pub struct PromptContext<'a> {
    pub persona: &'a Persona,
    pub friend_names: Vec<&'a str>,
    /// Subset of `rumor_list`, in list order.
    pub believed_rumors: Vec<&'a str>,
    /// Oldest first.
    pub post_history: Vec<HistoryEntry<'a>>,
    pub rumor_list: &'a [String],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub system: String,
    pub user: String,
}

impl Prompt {
    /// Hex SHA-256 of `system || 0x00 || user`.
    pub fn request_hash(&self) -> String {
        request_hash(&self.system, &self.user)
    }
}

pub(crate) fn request_hash(system: &str, user: &str) -> String {
    let mut h = Sha256::new();
    h.update(system.as_bytes());
    h.update([0u8]);
    h.update(user.as_bytes());
    hex::encode(h.finalize())
}

pub fn build_prompt(ctx: &PromptContext<'_>, dict: &ScaleDictionaries) -> Prompt {
    let p = ctx.persona;
    let mut u = String::with_capacity(4096);
    let _ = writeln!(
        u,
        "Hi, {}, you are a {}-year-old {} known for being {}. Please follow the instructions below.",
        p.agent_name,
        p.agent_age,
        p.agent_job,
        p.traits_joined()
    );
    u.push_str("You are active on a social network, receiving and sending posts.\n");
    let _ = writeln!(
        u,
        "You {}, and you {}.",
        dict.accept_phrase(p.agent_rumors_acc),
        dict.forward_phrase(p.agent_rumors_spread)
    );
    u.push('\n');
    u.push_str(INSTRUCTIONS);
    let friends = if ctx.friend_names.is_empty() { "(none)".to_owned() } else { ctx.friend_names.join(", ") };
    let _ = writeln!(u, "Your posts can be seen by all your friends. Here are your friends: {friends}");
    u.push_str("You are about to send a new post [POST] based on your personal preferences.\n\n\n");
    u.push_str(OUTPUT_FORMAT);
    u.push('\n');
    u.push_str("Before you reviewing the posts, you used to believe:\n");
    for rumor in &ctx.believed_rumors {
        let _ = write!(u, "\nYou used to believe {rumor} is True");
    }
    u.push_str("\n\n");
    if ctx.post_history.is_empty() {
        u.push_str("The previous post history is: (none)\n");
    } else {
        u.push_str("The previous post history is:\n");
        for entry in &ctx.post_history {
            match entry.author {
                Some(author) => {
                    let _ = writeln!(u, "{author}: {}", entry.text);
                }
                None => {
                    let _ = writeln!(u, "{}", entry.text);
                }
            }
        }
    }
    u.push('\n');
    u.push_str(CLOSING);
    u.push('\n');
    u.push_str("The rumor list is:\n");
    for rumor in ctx.rumor_list {
        let _ = writeln!(u, "{rumor}");
    }
    u.push_str("Check whether you believe them based on what you read and send.\n\n");
    u.push_str(SIGN_OFF);
    Prompt { system: SYSTEM_TEXT.to_owned(), user: u }
}
