//! Agent personas and the acceptance/spread scale dictionaries.
//!
//! Roster files are plain `key: value` records separated by blank lines,
//! using the field names below:
//!
//! ```text
//! id: 3
//! agent_name: Leo
//! agent_age: 35
//! agent_job: Software Developer
//! agent_traits: Analytical, Persistent
//! agent_rumors_acc: 3
//! agent_rumors_spread: 3
//! ```
//!
//! Lines starting with `#` are comments.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::rng::{self, SimRng};

pub const ACCEPT_LEVELS: u8 = 4;
pub const SPREAD_LEVELS: u8 = 3;

const ACCEPT_PHRASES: [&str; 4] = [
    "won't easily accept any rumors or new information unless they are confirmed or well-examined",
    "may suspect rumors but will accept them once they appear frequently in posts or generally make sense",
    "will accept any new information unless there is significant controversy or criticism",
    "will easily accept any rumors, even if there are doubts or criticisms",
];

const FORWARD_PHRASES: [&str; 3] = [
    "prefer not to spread much of the new information seen in others' posts",
    "may forward posts seen with comments and feelings, or may just share personal experiences",
    "are willing to share and comment on rumors, posts, and new things seen in posts",
];

const NAMES: &str = include_str!("../../data/names.txt");
const JOBS: &str = include_str!("../../data/jobs.txt");
const TRAITS: &str = include_str!("../../data/traits.txt");

const MIN_AGE: u32 = 18;
const MAX_AGE: u32 = 70;
const TRAITS_PER_AGENT: usize = 2;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PersonaError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("record {record} (line {line}): {message}")]
    Validation { record: usize, line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Persona {
    pub id: u32,
    pub agent_name: String,
    pub agent_age: u32,
    pub agent_job: String,
    pub agent_traits: Vec<String>,
    pub agent_rumors_acc: u8,
    pub agent_rumors_spread: u8,
}

impl Persona {
    /// Traits as they appear in the prompt, e.g. `Analytical, Persistent`.
    pub fn traits_joined(&self) -> String {
        self.agent_traits.join(", ")
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(1..=ACCEPT_LEVELS).contains(&self.agent_rumors_acc) {
            return Err(format!("agent_rumors_acc {} outside 1..={ACCEPT_LEVELS}", self.agent_rumors_acc));
        }
        if !(1..=SPREAD_LEVELS).contains(&self.agent_rumors_spread) {
            return Err(format!("agent_rumors_spread {} outside 1..={SPREAD_LEVELS}", self.agent_rumors_spread));
        }
        if self.agent_name.trim().is_empty() {
            return Err("agent_name is empty".into());
        }
        Ok(())
    }
}

/// Phrase tables keyed by the persona's acceptance (1..=4) and spread
/// (1..=3) levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaleDictionaries {
    pub likely_to_accept_rumors: [String; 4],
    pub likely_to_forward_rumors: [String; 3],
}

impl Default for ScaleDictionaries {
    fn default() -> Self {
        Self {
            likely_to_accept_rumors: ACCEPT_PHRASES.map(str::to_owned),
            likely_to_forward_rumors: FORWARD_PHRASES.map(str::to_owned),
        }
    }
}

impl ScaleDictionaries {
    /// Panics on an out-of-range level; personas are validated on entry.
    pub fn accept_phrase(&self, level: u8) -> &str {
        &self.likely_to_accept_rumors[usize::from(level) - 1]
    }

    pub fn forward_phrase(&self, level: u8) -> &str {
        &self.likely_to_forward_rumors[usize::from(level) - 1]
    }
}

/// How a generated roster assigns one of the two scales.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalePolicy {
    Uniform,
    Fixed(u8),
    PerAgent(Vec<u8>),
}

impl ScalePolicy {
    fn check(&self, n: usize, max: u8, what: &str) -> Result<(), PersonaError> {
        let in_range = |v: u8| (1..=max).contains(&v);
        match self {
            Self::Uniform => Ok(()),
            Self::Fixed(v) if in_range(*v) => Ok(()),
            Self::Fixed(v) => Err(PersonaError::Parameter(format!("fixed {what} level {v} outside 1..={max}"))),
            Self::PerAgent(vs) if vs.len() != n => {
                Err(PersonaError::Parameter(format!("per-agent {what} list has {} entries for {n} agents", vs.len())))
            }
            Self::PerAgent(vs) => match vs.iter().find(|&&v| !in_range(v)) {
                Some(v) => Err(PersonaError::Parameter(format!("per-agent {what} level {v} outside 1..={max}"))),
                None => Ok(()),
            },
        }
    }

    fn draw(&self, index: usize, max: u8, rng: &mut SimRng) -> u8 {
        match self {
            Self::Uniform => 1 + rng::uniform_index(rng, usize::from(max)) as u8,
            Self::Fixed(v) => *v,
            Self::PerAgent(vs) => vs[index],
        }
    }
}

fn pool(data: &'static str) -> Vec<&'static str> {
    data.lines().map(str::trim).filter(|l| !l.is_empty()).collect()
}

pub fn name_pool() -> Vec<&'static str> {
    pool(NAMES)
}

pub fn job_pool() -> Vec<&'static str> {
    pool(JOBS)
}

pub fn trait_pool() -> Vec<&'static str> {
    pool(TRAITS)
}

/// Seeded roster of `n` personas with ids `0..n`.
///
/// Names are drawn without replacement from a shuffled pool; past the pool
/// size they repeat with a numeric suffix. Ages are uniform in 18..=70 and
/// each agent gets two distinct traits.
pub fn generate_personas(
    n: usize,
    seed: u64,
    acc_policy: &ScalePolicy,
    spread_policy: &ScalePolicy,
) -> Result<Vec<Persona>, PersonaError> {
    if n == 0 {
        return Err(PersonaError::Parameter("roster size must be at least 1".into()));
    }
    acc_policy.check(n, ACCEPT_LEVELS, "acceptance")?;
    spread_policy.check(n, SPREAD_LEVELS, "spread")?;

    let mut rng = rng::seeded(seed);
    let mut names = name_pool();
    shuffle(&mut names, &mut rng);
    let jobs = job_pool();
    let traits = trait_pool();

    let roster = (0..n)
        .map(|i| {
            let base = names[i % names.len()];
            let agent_name = match i / names.len() {
                0 => base.to_owned(),
                round => format!("{base} {}", round + 1),
            };
            let agent_age = MIN_AGE + rng::uniform_index(&mut rng, (MAX_AGE - MIN_AGE + 1) as usize) as u32;
            let agent_job = jobs[rng::uniform_index(&mut rng, jobs.len())].to_owned();
            let mut picked: Vec<String> = Vec::with_capacity(TRAITS_PER_AGENT);
            while picked.len() < TRAITS_PER_AGENT {
                let t = traits[rng::uniform_index(&mut rng, traits.len())];
                if !picked.iter().any(|p| p == t) {
                    picked.push(t.to_owned());
                }
            }
            let agent_rumors_acc = acc_policy.draw(i, ACCEPT_LEVELS, &mut rng);
            let agent_rumors_spread = spread_policy.draw(i, SPREAD_LEVELS, &mut rng);
            Persona {
                id: i as u32,
                agent_name,
                agent_age,
                agent_job,
                agent_traits: picked,
                agent_rumors_acc,
                agent_rumors_spread,
            }
        })
        .collect();
    Ok(roster)
}

/// Fisher–Yates, drawing indices through [`rng::uniform_index`].
pub fn shuffle<T>(items: &mut [T], rng: &mut SimRng) {
    for i in (1..items.len()).rev() {
        let j = rng::uniform_index(rng, i + 1);
        items.swap(i, j);
    }
}

const FIELDS: [&str; 7] =
    ["id", "agent_name", "agent_age", "agent_job", "agent_traits", "agent_rumors_acc", "agent_rumors_spread"];

/// `(line, key, value)` triples of one record.
type RawRecord<'a> = Vec<(usize, &'a str, &'a str)>;

/// Parses a roster document. Records keep document order.
pub fn load_personas(doc: &str) -> Result<Vec<Persona>, PersonaError> {
    let mut records: Vec<(usize, RawRecord<'_>)> = Vec::new();
    let mut current: RawRecord<'_> = Vec::new();
    let mut start_line = 0;
    for (i, raw) in doc.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            if !current.is_empty() {
                records.push((start_line, std::mem::take(&mut current)));
            }
            continue;
        }
        if current.is_empty() {
            start_line = line_no;
        }
        let (key, value) = line.split_once(':').ok_or_else(|| PersonaError::Validation {
            record: records.len() + 1,
            line: line_no,
            message: format!("expected `key: value`, got {line:?}"),
        })?;
        current.push((line_no, key.trim(), value.trim()));
    }
    if !current.is_empty() {
        records.push((start_line, current));
    }

    let mut seen = HashSet::new();
    let mut roster = Vec::with_capacity(records.len());
    for (idx, (line, fields)) in records.into_iter().enumerate() {
        let record = idx + 1;
        let fail = |line: usize, message: String| PersonaError::Validation { record, line, message };
        let mut values: [Option<(usize, &str)>; 7] = [None; 7];
        for (l, key, value) in fields {
            let slot =
                FIELDS.iter().position(|f| *f == key).ok_or_else(|| fail(l, format!("unknown field {key:?}")))?;
            if values[slot].replace((l, value)).is_some() {
                return Err(fail(l, format!("field {key:?} given twice")));
            }
        }
        let get = |slot: usize| values[slot].ok_or_else(|| fail(line, format!("missing field {:?}", FIELDS[slot])));
        fn num<T: std::str::FromStr>(
            (l, v): (usize, &str),
            field: &str,
            fail: &dyn Fn(usize, String) -> PersonaError,
        ) -> Result<T, PersonaError> {
            v.parse().map_err(|_| fail(l, format!("{field} {v:?} is not a valid number")))
        }
        let persona = Persona {
            id: num(get(0)?, "id", &fail)?,
            agent_name: get(1)?.1.to_owned(),
            agent_age: num(get(2)?, "agent_age", &fail)?,
            agent_job: get(3)?.1.to_owned(),
            agent_traits: get(4)?.1.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::to_owned).collect(),
            agent_rumors_acc: num(get(5)?, "agent_rumors_acc", &fail)?,
            agent_rumors_spread: num(get(6)?, "agent_rumors_spread", &fail)?,
        };
        persona.validate().map_err(|m| fail(line, m))?;
        if !seen.insert(persona.id) {
            return Err(fail(line, format!("duplicate id {}", persona.id)));
        }
        roster.push(persona);
    }
    Ok(roster)
}

pub fn write_personas(roster: &[Persona]) -> String {
    let mut out = String::new();
    for (i, p) in roster.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!(
            "id: {}\nagent_name: {}\nagent_age: {}\nagent_job: {}\nagent_traits: {}\nagent_rumors_acc: {}\nagent_rumors_spread: {}\n",
            p.id,
            p.agent_name,
            p.agent_age,
            p.agent_job,
            p.traits_joined(),
            p.agent_rumors_acc,
            p.agent_rumors_spread
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LEO: &str = "id: 3\nagent_name: Leo\nagent_age: 35\nagent_job: Software Developer\nagent_traits: Analytical, Persistent\nagent_rumors_acc: 3\nagent_rumors_spread: 3\n";

    pub(crate) fn leo() -> Persona {
        Persona {
            id: 3,
            agent_name: "Leo".into(),
            agent_age: 35,
            agent_job: "Software Developer".into(),
            agent_traits: vec!["Analytical".into(), "Persistent".into()],
            agent_rumors_acc: 3,
            agent_rumors_spread: 3,
        }
    }

    #[test]
    fn pools_are_large_enough() {
        assert!(name_pool().len() >= 100);
        assert!(job_pool().len() >= 30);
        assert!(trait_pool().len() >= 30);
    }

    #[test]
    fn dictionaries_match_the_published_phrases() {
        let d = ScaleDictionaries::default();
        assert_eq!(
            d.accept_phrase(1),
            "won't easily accept any rumors or new information unless they are confirmed or well-examined"
        );
        assert_eq!(d.accept_phrase(4), "will easily accept any rumors, even if there are doubts or criticisms");
        assert_eq!(
            d.forward_phrase(3),
            "are willing to share and comment on rumors, posts, and new things seen in posts"
        );
    }

    #[test]
    fn uniform_roster_conforms() {
        let roster = generate_personas(100, 1, &ScalePolicy::Uniform, &ScalePolicy::Uniform).unwrap();
        assert_eq!(roster.len(), 100);
        let ids: HashSet<u32> = roster.iter().map(|p| p.id).collect();
        assert_eq!(ids.len(), 100);
        for p in &roster {
            p.validate().unwrap();
            assert!((MIN_AGE..=MAX_AGE).contains(&p.agent_age));
            assert_eq!(p.agent_traits.len(), 2);
            assert_ne!(p.agent_traits[0], p.agent_traits[1]);
        }
    }

    #[test]
    fn fixed_policies() {
        let roster = generate_personas(3, 9, &ScalePolicy::Fixed(4), &ScalePolicy::Fixed(3)).unwrap();
        assert!(roster.iter().all(|p| p.agent_rumors_acc == 4 && p.agent_rumors_spread == 3));
        assert!(generate_personas(3, 9, &ScalePolicy::Fixed(5), &ScalePolicy::Uniform).is_err());
        assert!(generate_personas(3, 9, &ScalePolicy::Uniform, &ScalePolicy::Fixed(0)).is_err());
        assert!(generate_personas(3, 9, &ScalePolicy::PerAgent(vec![1, 2]), &ScalePolicy::Uniform).is_err());
        let per = generate_personas(3, 9, &ScalePolicy::PerAgent(vec![1, 2, 4]), &ScalePolicy::Uniform).unwrap();
        assert_eq!(per.iter().map(|p| p.agent_rumors_acc).collect::<Vec<_>>(), vec![1, 2, 4]);
    }

    #[test]
    fn uniform_levels_are_balanced() {
        // 1000 draws over 4 levels: p = 0.25, 3 sigma = 3 * sqrt(0.1875 / 1000) ~ 0.041
        let roster = generate_personas(1000, 2, &ScalePolicy::Uniform, &ScalePolicy::Uniform).unwrap();
        for level in 1..=4 {
            let f = roster.iter().filter(|p| p.agent_rumors_acc == level).count() as f64 / 1000.0;
            assert!((0.19..=0.31).contains(&f), "level {level}: {f}");
        }
    }

    #[test]
    fn large_rosters_suffix_names() {
        let n = name_pool().len() + 5;
        let roster = generate_personas(n, 4, &ScalePolicy::Uniform, &ScalePolicy::Uniform).unwrap();
        assert!(roster[n - 1].agent_name.ends_with(" 2"));
    }

    #[test]
    fn generation_is_pure() {
        let a = generate_personas(50, 77, &ScalePolicy::Uniform, &ScalePolicy::Uniform).unwrap();
        let b = generate_personas(50, 77, &ScalePolicy::Uniform, &ScalePolicy::Uniform).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_personas(50, 78, &ScalePolicy::Uniform, &ScalePolicy::Uniform).unwrap());
    }

    #[test]
    fn loads_leo() {
        assert_eq!(load_personas(LEO).unwrap(), vec![leo()]);
    }

    #[test]
    fn load_errors_name_the_record() {
        let bad = LEO.replace("agent_rumors_acc: 3", "agent_rumors_acc: 5");
        let err = load_personas(&format!("{LEO}\n{}", bad.replace("id: 3", "id: 4"))).unwrap_err();
        assert!(matches!(err, PersonaError::Validation { record: 2, .. }), "{err}");

        let dup = format!("{LEO}\n{LEO}");
        assert!(load_personas(&dup).unwrap_err().to_string().contains("duplicate id 3"));

        let missing = LEO.replace("agent_job: Software Developer\n", "");
        assert!(load_personas(&missing).unwrap_err().to_string().contains("missing field \"agent_job\""));

        assert!(load_personas("id: x\n").is_err());
        assert!(load_personas("nonsense line\n").is_err());
    }

    #[test]
    fn empty_document_is_an_empty_roster() {
        assert!(load_personas("").unwrap().is_empty());
        assert!(load_personas("# only a comment\n\n").unwrap().is_empty());
    }

    fn arb_persona() -> impl Strategy<Value = Persona> {
        (
            any::<u32>(),
            "[A-Z][a-z]{1,8}( [A-Z][a-z]{1,8})?",
            0u32..120,
            "[A-Za-z][A-Za-z ]{0,15}[a-z]",
            prop::collection::vec("[A-Z][a-z-]{1,10}", 0..4),
            1u8..=4,
            1u8..=3,
        )
            .prop_map(|(id, name, age, job, traits, acc, spread)| Persona {
                id,
                agent_name: name,
                agent_age: age,
                agent_job: job,
                agent_traits: traits,
                agent_rumors_acc: acc,
                agent_rumors_spread: spread,
            })
    }

    proptest! {
        #[test]
        fn write_load_round_trip(roster in prop::collection::vec(arb_persona(), 0..6)) {
            let mut seen = HashSet::new();
            let roster: Vec<Persona> = roster.into_iter().filter(|p| seen.insert(p.id)).collect();
            prop_assert_eq!(load_personas(&write_personas(&roster)).unwrap(), roster);
        }
    }
}
